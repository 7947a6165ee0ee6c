"""Command line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
3 impossible handshake outcome detected in verify mode.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .distributions import parse_distribution
from .oracle import enumerate_exact
from .sim import SweepConfig, run_sweep, users_for_load
from .tally import TALLY_CLASSES, ImpossibleOutcomeError, Outcome

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bcsa",
        description=(
            "Monte Carlo simulation of framed random access where every user "
            "broadcasts repeated packet copies, peels interference to decode "
            "its peers, and runs a self-check handshake per peer."
        ),
    )
    p.add_argument("--slots", type=int, required=True, metavar="N",
                   help="slots per frame")
    point = p.add_mutually_exclusive_group(required=True)
    point.add_argument("--load", type=float, action="append", metavar="G",
                       help="channel load (users/slots); repeat for several points")
    point.add_argument("--sweep", metavar="START:STEP:STOP",
                       help="inclusive arithmetic progression of channel loads")
    point.add_argument("--users", type=int, metavar="M",
                       help="explicit user count (single point)")
    p.add_argument("--dist", required=True, metavar="POLY",
                   help="degree distribution polynomial, e.g. '0.86x^3+0.14x^8'")
    p.add_argument("--frames", type=int, default=1000, metavar="F",
                   help="frames per point (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="seed (default 0)")
    p.add_argument("--mode", choices=("broadcast", "unicast"), default="broadcast",
                   help="broadcast: per-user views and handshakes; "
                        "unicast: one exterior receiver, loss only")
    p.add_argument("--handshake", choices=("fast", "verify", "off"), default="fast",
                   help="fast: skip the self-check when both sides decoded; "
                        "verify: always run it and flag impossible outcomes; "
                        "off: loss statistics only")
    p.add_argument("--pairs", default="all", metavar="all|reference:K",
                   help="evaluate all ordered pairs per frame, or K random "
                        "reference receivers per frame")
    p.add_argument("--per-degree", action="store_true",
                   help="add per-degree loss columns plr_k{K}_d{D}")
    p.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    p.add_argument("--workers", type=int, default=1,
                   help="worker processes (default 1); results are identical "
                        "for any worker count")
    p.add_argument("--mode-oracle", action="store_true",
                   help="exactly enumerate the (tiny) instance instead of sampling")
    return p


def _parse_pairs(spec: str) -> int | None:
    if spec == "all":
        return None
    head, sep, tail = spec.partition(":")
    if head == "reference" and sep:
        k = int(tail)
        if k < 1:
            raise ValueError("reference receiver count must be positive")
        return k
    raise ValueError(f"--pairs must be 'all' or 'reference:K', got {spec!r}")


def _parse_sweep(spec: str) -> tuple[float, ...]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("--sweep expects START:STEP:STOP")
    start, step, stop = (float(x) for x in parts)
    if start <= 0 or step <= 0 or stop < start:
        raise ValueError("--sweep needs 0 < START <= STOP and STEP > 0")
    loads = []
    i = 0
    while True:
        g = round(start + i * step, 12)
        if g > stop + 1e-9:
            break
        loads.append(g)
        i += 1
    return tuple(loads)


def _resolve_loads(args) -> tuple[float, ...]:
    if args.load is not None:
        return tuple(sorted(args.load))
    if args.sweep is not None:
        return _parse_sweep(args.sweep)
    if args.users < 1:
        raise ValueError("--users must be positive")
    return (args.users / args.slots,)


def _run_oracle(args, dist, loads, ref_count) -> int:
    if len(loads) != 1:
        raise ValueError("oracle mode evaluates a single operating point")
    if ref_count is not None:
        raise ValueError("oracle mode evaluates all pairs; drop --pairs")
    m = users_for_load(loads[0], args.slots)
    res = enumerate_exact(m, args.slots, dist, args.mode)
    lines = [f"users={m}", f"slots={args.slots}", f"configs={res.config_count}"]
    if res.outcome_probs:
        for i, o in enumerate(TALLY_CLASSES, start=1):
            lines.append(f"p{i}={res.outcome_probs[o]:.12g}")
        lines.append(f"impossible={res.outcome_probs[Outcome.IMPOSSIBLE]:.12g}")
    lines.append(f"plr={res.plr:.12g}")
    for (k, d), v in sorted(res.per_degree_plr.items()):
        lines.append(f"plr_k{k}_d{d}={v:.12g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        dist = parse_distribution(args.dist)
        loads = _resolve_loads(args)
        ref_count = _parse_pairs(args.pairs)
        if args.mode_oracle:
            return _run_oracle(args, dist, loads, ref_count)
        config = SweepConfig(
            n_slots=args.slots,
            dist=dist,
            loads=loads,
            frames=args.frames,
            seed=args.seed,
            mode=args.mode,
            handshake=args.handshake,
            ref_count=ref_count,
            per_degree=args.per_degree,
            workers=args.workers,
        )
        run_sweep(config, args.out if args.out else sys.stdout)
    except ValueError as e:
        print(f"bcsa: error: {e}", file=sys.stderr)
        return 2
    except ImpossibleOutcomeError as e:
        print(f"bcsa: impossible outcome: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"bcsa: i/o error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
