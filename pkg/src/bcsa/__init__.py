"""Broadcast coded slotted ALOHA: simulation and exact analysis.

Users repeat their packet in several slots of a shared frame; every user
(or one exterior receiver) peels interference to decode the others, then
runs a per-peer self-check handshake to judge whether its own packet got
through. This package samples such frames in bulk, classifies handshake
outcomes, estimates loss probabilities with standard errors, and checks
them against exact enumeration, induced degree distributions, and
analytic bounds.
"""

from .analysis import (
    BoundCheck,
    EstimateReport,
    check_bounds,
    estimate,
    induced_distribution,
)
from .decoder import DecodeOutcome, peel
from .distributions import (
    DegreeDistribution,
    DistributionParseError,
    NormalizationError,
    parse_distribution,
    render_distribution,
    sample_degree,
)
from .engine import frame_rng, simulate_point
from .graphs import FrameGraph, GraphView, generate_frame, induced_view
from .handshake import Reconstruction, classify, evaluate_peer, handshake_frame, reconstruct
from .oracle import EnumerationSizeError, ExactResult, enumerate_exact
from .sim import SweepConfig, SweepRow, run_sweep, users_for_load
from .tally import (
    HandshakeTally,
    ImpossibleOutcomeError,
    Outcome,
    merge_tallies,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCheck",
    "DecodeOutcome",
    "DegreeDistribution",
    "DistributionParseError",
    "EnumerationSizeError",
    "EstimateReport",
    "ExactResult",
    "FrameGraph",
    "GraphView",
    "HandshakeTally",
    "ImpossibleOutcomeError",
    "NormalizationError",
    "Outcome",
    "Reconstruction",
    "SweepConfig",
    "SweepRow",
    "check_bounds",
    "classify",
    "enumerate_exact",
    "estimate",
    "evaluate_peer",
    "frame_rng",
    "generate_frame",
    "handshake_frame",
    "induced_distribution",
    "induced_view",
    "merge_tallies",
    "parse_distribution",
    "peel",
    "reconstruct",
    "render_distribution",
    "run_sweep",
    "sample_degree",
    "simulate_point",
    "users_for_load",
]
