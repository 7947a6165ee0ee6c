"""Repetition-degree distributions: parsing, rendering, and sampling.

A degree distribution assigns a probability to each repetition degree
l = 0..q; a user of degree l transmits l copies of its packet in a frame.
The text form is a polynomial-style sum such as ``0.25x2+0.6x3+0.15x8``.
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass, field

__all__ = [
    "DegreeDistribution",
    "DistributionParseError",
    "NormalizationError",
    "parse_distribution",
    "render_distribution",
    "sample_degree",
]

#: |sum(probs) - 1| must not exceed this on input; stored probs are renormalized.
SUM_TOLERANCE = 1e-9

_TERM_RE = re.compile(
    r"""^
    (?P<coeff>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?
    (?P<x>x(?:\^?(?P<deg>\d+))?)?
    $""",
    re.VERBOSE,
)

# '+' separates terms unless it is part of an exponent like 1e+3.
_TERM_SPLIT_RE = re.compile(r"(?<![eE])\+")


class DistributionParseError(ValueError):
    """Malformed distribution text; ``position`` is the offset of the bad term."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class NormalizationError(ValueError):
    """Distribution coefficients do not sum to 1 within tolerance."""


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability mass over repetition degrees 0..q.

    ``probs[l]`` is the probability of degree l. Entries must be
    non-negative and sum to 1 within 1e-9; stored values are renormalized
    so downstream formulas see an exactly unit mass. Trailing zero entries
    are stripped, so q == len(probs) - 1 is the highest degree with
    positive probability.
    """

    probs: tuple[float, ...]
    _cdf: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise ValueError("distribution needs at least one coefficient")
        if any(p < 0.0 for p in probs):
            raise ValueError(f"negative coefficient in {probs}")
        total = math.fsum(probs)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise NormalizationError(
                f"coefficients sum to {total!r}, expected 1 within {SUM_TOLERANCE}"
            )
        while len(probs) > 1 and probs[-1] == 0.0:
            probs = probs[:-1]
        if probs[-1] == 0.0 and len(probs) == 1:
            raise NormalizationError("all coefficients are zero")
        if total != 1.0:
            # canonical renormalization: scale, then pin the largest entry
            # so the stored mass sums to exactly 1.0 (makes renormalizing
            # a constructed distribution a no-op)
            scaled = [p / total for p in probs]
            top = max(range(len(scaled)), key=scaled.__getitem__)
            scaled[top] = 1.0 - math.fsum(
                p for i, p in enumerate(scaled) if i != top
            )
            probs = tuple(scaled)
        object.__setattr__(self, "probs", probs)
        cdf = []
        acc = 0.0
        for p in probs:
            acc += p
            cdf.append(acc)
        object.__setattr__(self, "_cdf", tuple(cdf))

    @property
    def max_degree(self) -> int:
        """Highest degree with positive probability (q)."""
        return len(self.probs) - 1

    @property
    def mean_degree(self) -> float:
        return sum(l * p for l, p in enumerate(self.probs))

    def cdf(self) -> tuple[float, ...]:
        """Cumulative probabilities, cdf[l] = P(degree <= l)."""
        return self._cdf

    def __str__(self) -> str:
        return render_distribution(self)


def parse_distribution(text: str) -> DegreeDistribution:
    """Parse a distribution from its polynomial text form.

    Grammar: one or more terms joined by '+'; each term is
    ``[COEFF]['x'[['^']DEG]]`` where COEFF defaults to 1 and DEG defaults
    to 1. A bare coefficient with no 'x' is degree-0 mass. Whitespace is
    ignored. Repeated degrees accumulate.
    """
    if not text or not text.strip():
        raise DistributionParseError("empty distribution text", 0)
    masses: dict[int, float] = {}
    pos = 0
    for raw in _TERM_SPLIT_RE.split(text):
        term = re.sub(r"\s+", "", raw)
        if not term:
            raise DistributionParseError("empty term", pos)
        m = _TERM_RE.match(term)
        if not m or (m.group("coeff") is None and m.group("x") is None):
            raise DistributionParseError(f"malformed term {raw.strip()!r}", pos)
        coeff = float(m.group("coeff")) if m.group("coeff") is not None else 1.0
        if coeff < 0.0:
            raise ValueError(f"negative coefficient in term {raw.strip()!r}")
        if m.group("x") is None:
            degree = 0
        elif m.group("deg") is not None:
            degree = int(m.group("deg"))
        else:
            degree = 1
        masses[degree] = masses.get(degree, 0.0) + coeff
        pos += len(raw) + 1
    probs = [0.0] * (max(masses) + 1)
    for degree, coeff in masses.items():
        probs[degree] = coeff
    return DegreeDistribution(tuple(probs))


def render_distribution(dist: DegreeDistribution) -> str:
    """Canonical text form: ascending degree, 12 significant digits, no caret."""
    terms = []
    for degree, p in enumerate(dist.probs):
        if p == 0.0:
            continue
        coeff = format(p, ".12g")
        terms.append(coeff if degree == 0 else f"{coeff}x{degree}")
    return "+".join(terms)


def sample_degree(dist: DegreeDistribution, rand) -> int:
    """Draw one degree; ``rand`` is a numpy Generator (or anything with .random())."""
    u = rand.random()
    return min(bisect.bisect_right(dist._cdf, u), dist.max_degree)
