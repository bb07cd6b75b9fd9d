"""Redistributing crowdfunding donations so that more campaigns reach their goals."""

from .domain import FIXTURES, Campaign, Contribution, Instance, ValidationReport, Violation, baseline, validate_instance
from .estimator import FundRedistributor
from .feasibility import check_feasible, optimize_tiebreak
from .ingest import SynthParams, TraceParseError, filter_campaigns, generate_synthetic, parse_trace, serialize
from .model import NiceLevel, Ordering, Scheme, SchemeSpec, build_constraints
from .oracle import oracle_feasible, oracle_optimum
from .report import ReportBundle, emit, summarize
from .simulate import AcceptanceScenario, Kind, SweepCurve, draw_scenario, nested_chain, sweep
from .solver import Solution, brute_force, solve, verify_solution

__all__ = [
    "AcceptanceScenario",
    "Campaign",
    "Contribution",
    "FIXTURES",
    "FundRedistributor",
    "Instance",
    "Kind",
    "NiceLevel",
    "Ordering",
    "ReportBundle",
    "Scheme",
    "SchemeSpec",
    "Solution",
    "SweepCurve",
    "SynthParams",
    "TraceParseError",
    "ValidationReport",
    "Violation",
    "baseline",
    "brute_force",
    "build_constraints",
    "check_feasible",
    "draw_scenario",
    "emit",
    "filter_campaigns",
    "generate_synthetic",
    "nested_chain",
    "optimize_tiebreak",
    "oracle_feasible",
    "oracle_optimum",
    "parse_trace",
    "serialize",
    "solve",
    "summarize",
    "sweep",
    "validate_instance",
    "verify_solution",
]
