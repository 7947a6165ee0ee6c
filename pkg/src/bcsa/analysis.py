"""Closed-form induced degree distribution, estimators, bounds and checks.

A degree-k receiver erases its own k slots from every peer's slot set, so
a true degree-l peer is observed with degree d with hypergeometric
probability C(n-k,d)C(k,l-d)/C(n,l). Aggregating pair tallies gives the
five outcome probabilities p1..p5, the packet loss rate, and the derived
quantities the bounds speak about:

  p1+p2+p3 = Pr{peer fails to resolve receiver} = plr   (exact identity)
  p1+p2 <= plr, and more tightly p1+p2 <= plr*(1-plr)
  p3 >= plr^2 (conjectured), with p3/plr vs plr measuring how much two
  users' failures are correlated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DegreeDistribution
from .tally import MOMENT_DIM, HandshakeTally, Outcome

__all__ = [
    "induced_distribution",
    "estimate",
    "check_bounds",
    "EstimateReport",
    "BoundCheck",
]


def induced_distribution(
    dist: DegreeDistribution, n: int, k: int
) -> DegreeDistribution:
    """Distribution of peer degrees as observed by a degree-k receiver.

    Coefficients are exact binomial ratios (Python integers keep them
    exact at any n); only the final division rounds, so relative error is
    at machine precision.
    """
    q = dist.max_degree
    if n < q:
        raise ValueError(f"n={n} smaller than max degree q={q}")
    if not 0 <= k <= n:
        raise ValueError(f"receiver degree k={k} outside [0, {n}]")
    probs = []
    for d in range(q + 1):
        denom_free = math.comb(n - k, d)
        mass = 0.0
        for l in range(d, min(q, k + d) + 1):
            if dist.probs[l] == 0.0:
                continue
            mass += dist.probs[l] * (
                (denom_free * math.comb(k, l - d)) / math.comb(n, l)
            )
        probs.append(mass)
    return DegreeDistribution(tuple(probs))


def _induced_coeff_lgamma(n: int, k: int, l: int, d: int) -> float:
    """Log-gamma evaluation of C(n-k,d)C(k,l-d)/C(n,l); cross-check path."""

    def log_comb(a: int, b: int) -> float:
        if b < 0 or b > a:
            return -math.inf
        return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)

    log_term = log_comb(n - k, d) + log_comb(k, l - d) - log_comb(n, l)
    return math.exp(log_term)


@dataclass(frozen=True)
class EstimateReport:
    """Point estimates with frame-batched standard errors.

    outcome_probs/outcome_ses cover the five outcome classes. plr is the
    unresolved-pair share. cov is the covariance matrix of the mean
    per-frame proportion vector (p1..p5, plr), from which any derived
    z-score can be computed; it is None when only one frame was tallied.
    """

    frames: int
    pair_total: int
    outcome_probs: dict[Outcome, float]
    outcome_ses: dict[Outcome, float]
    plr: float
    plr_se: float
    handshake_fail: float  # p1 + p2
    handshake_fail_se: float
    detect_ratio: float
    bound_loose: float
    bound_tight: float
    conj_ratio: float
    per_degree_plr: dict[tuple[int, int], float]
    impossible_count: int
    cov: np.ndarray | None = field(repr=False, default=None)

    @property
    def p1(self) -> float:
        return self.outcome_probs[Outcome.FAILURE_DETECTED]

    @property
    def p2(self) -> float:
        return self.outcome_probs[Outcome.FALSE_HANDSHAKE]

    @property
    def p3(self) -> float:
        return self.outcome_probs[Outcome.AUX_BOTH_FAIL]

    @property
    def p4(self) -> float:
        return self.outcome_probs[Outcome.AUX_PEER_OK]

    @property
    def p5(self) -> float:
        return self.outcome_probs[Outcome.SUCCESSFUL]


def estimate(tally: HandshakeTally) -> EstimateReport:
    """Turn an accumulated tally into probability estimates.

    Standard errors come from the variance of per-frame proportions, not
    per-pair binomial formulas, because pairs within a frame share the
    frame graph and are correlated.
    """
    if tally.pair_total <= 0:
        raise ValueError("empty tally: no pairs recorded")
    pairs = tally.pair_total
    probs = {o: tally.outcome_counts[o] / pairs for o in sorted(tally.outcome_counts)}
    plr = tally.unresolved_pairs / pairs

    cov = None
    ses = {o: math.nan for o in probs}
    plr_se = math.nan
    fail_se = math.nan
    if tally.frames >= 2:
        f = tally.frames
        mean = tally.moment1 / f
        cov = (tally.moment2 - f * np.outer(mean, mean)) / (f - 1) / f
        diag = np.sqrt(np.maximum(np.diag(cov), 0.0))
        for i, o in enumerate(sorted(probs)):
            ses[o] = float(diag[i])
        plr_se = float(diag[5])
        grad = np.zeros(MOMENT_DIM)
        grad[0] = grad[1] = 1.0
        fail_se = float(np.sqrt(max(grad @ cov @ grad, 0.0)))

    c = tally.outcome_counts
    peer_failures = (
        c[Outcome.FAILURE_DETECTED]
        + c[Outcome.FALSE_HANDSHAKE]
        + c[Outcome.AUX_BOTH_FAIL]
    )
    detect_ratio = (
        c[Outcome.FAILURE_DETECTED] / peer_failures if peer_failures else math.nan
    )

    per_degree_plr = {}
    for (k, d), (observed, unresolved) in tally.per_degree.items():
        per_degree_plr[(k, d)] = unresolved / observed
        if d == 0 and observed:
            assert unresolved == observed, "a zero-degree peer can never be resolved"

    return EstimateReport(
        frames=tally.frames,
        pair_total=pairs,
        outcome_probs=probs,
        outcome_ses=ses,
        plr=plr,
        plr_se=plr_se,
        handshake_fail=probs[Outcome.FAILURE_DETECTED]
        + probs[Outcome.FALSE_HANDSHAKE],
        handshake_fail_se=fail_se,
        detect_ratio=detect_ratio,
        bound_loose=plr,
        bound_tight=plr * (1.0 - plr),
        conj_ratio=probs[Outcome.AUX_BOTH_FAIL] / plr**2 if plr > 0 else math.nan,
        per_degree_plr=per_degree_plr,
        impossible_count=tally.impossible_count,
        cov=cov,
    )


@dataclass(frozen=True)
class BoundCheck:
    """One inequality or approximation check with its statistical strength.

    For one-sided checks the claim is lhs <= rhs; margin = rhs - lhs and
    z = margin / se(margin), so z >= -3 means "holds within 3 sigma". For
    two-sided checks the claim is lhs == rhs approximately and |z| <= 3
    means "consistent within 3 sigma".
    """

    name: str
    lhs: float
    rhs: float
    margin: float
    z: float
    two_sided: bool = False

    @property
    def satisfied(self) -> bool:
        """Point-estimate verdict; two-sided checks defer to holds()."""
        return self.holds() if self.two_sided else self.margin >= 0

    def holds(self, n_sigma: float = 3.0) -> bool:
        if math.isnan(self.z):
            return True if self.two_sided else self.margin >= 0
        if self.two_sided:
            return abs(self.z) <= n_sigma
        return self.z >= -n_sigma


def _delta_z(report: EstimateReport, margin: float, grad: np.ndarray) -> float:
    """z-score of a derived margin from the component standard errors.

    The combination is deliberately diagonal (no covariance terms): the
    checks target rare-event counts, where sample covariances between the
    outcome-class estimators are noise-dominated and can grossly
    understate the uncertainty of a difference.
    """
    if report.cov is None:
        return math.nan
    var = float(grad**2 @ np.diag(report.cov))
    if var <= 0.0:
        return math.inf if margin >= 0 else -math.inf
    return margin / math.sqrt(var)


def check_bounds(report: EstimateReport) -> list[BoundCheck]:
    """Evaluate the handshake-failure bounds and the correlation checks.

    Returns, in order: the loose bound p1+p2 <= plr, the tight bound
    p1+p2 <= plr*(1-plr), the conjectured p3 >= plr^2, and the two-sided
    low-load approximation p3/plr == plr (the conditional probability
    that both directions fail, given one did).
    """
    p = report.plr
    fail = report.handshake_fail
    p3 = report.outcome_probs[Outcome.AUX_BOTH_FAIL]
    checks = []

    grad = np.zeros(MOMENT_DIM)
    grad[0] = grad[1] = -1.0
    grad[5] = 1.0
    checks.append(
        BoundCheck(
            name="loose",
            lhs=fail,
            rhs=p,
            margin=p - fail,
            z=_delta_z(report, p - fail, grad),
        )
    )

    grad = np.zeros(MOMENT_DIM)
    grad[0] = grad[1] = -1.0
    grad[5] = 1.0 - 2.0 * p
    margin = p * (1.0 - p) - fail
    checks.append(
        BoundCheck(
            name="tight", lhs=fail, rhs=p * (1.0 - p), margin=margin,
            z=_delta_z(report, margin, grad),
        )
    )

    grad = np.zeros(MOMENT_DIM)
    grad[2] = 1.0
    grad[5] = -2.0 * p
    margin = p3 - p * p
    checks.append(
        BoundCheck(
            name="conjecture", lhs=p * p, rhs=p3, margin=margin,
            z=_delta_z(report, margin, grad),
        )
    )

    if p > 0:
        conditional = p3 / p
        grad = np.zeros(MOMENT_DIM)
        grad[2] = 1.0 / p
        grad[5] = -p3 / p**2 - 1.0
        margin = conditional - p
        z = _delta_z(report, margin, grad)
    else:
        conditional, margin, z = math.nan, 0.0, math.nan
    checks.append(
        BoundCheck(
            name="conditional", lhs=conditional, rhs=p, margin=margin, z=z,
            two_sided=True,
        )
    )
    return checks
