"""Command-line driver: ``redistrib {validate,solve,oracle,sweep,synth}``.

Exit codes: 0 success, 1 data violation, 2 I/O failure, 3 usage error.
Every option can also come from a JSON file given with ``--config``; keys are
the option names with dashes replaced by underscores, and flags given on the
command line win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from .domain import ERROR, WARNING, FIXTURES, Instance
from .ingest import ParameterError, SynthParams, TraceParseError, filter_campaigns, generate_synthetic, parse_trace, serialize
from .model import NiceLevel, Ordering, Scheme, SchemeSpec
from .oracle import OracleSizeError, oracle_feasible, oracle_optimum
from .report import emit, summarize
from .simulate import DEFAULT_PERCENTAGES, DEFAULT_SAMPLES, Kind, ScenarioError, sweep
from .solver import DEFAULT_MAX_CHECKS, Solution, SolverRefusal, solve

EXIT_OK, EXIT_DATA, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Where the instance comes from and what to do with it."""

    campaigns: str | None = None
    donations: str | None = None
    synth: bool = False
    fixture: str | None = None
    snapshot_day: int | None = None
    seed: int = 1

    def __post_init__(self):
        sources = sum([self.campaigns is not None or self.donations is not None, self.synth, self.fixture is not None])
        if sources != 1:
            raise UsageError("give exactly one of --campaigns/--donations, --synth or --fixture")
        if self.campaigns is not None and self.donations is None or self.donations is not None and self.campaigns is None:
            raise UsageError("--campaigns and --donations go together")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(args).items() if k in names})

    def load(self) -> Instance:
        if self.synth:
            instance = generate_synthetic(SynthParams(seed=self.seed))
        elif self.fixture is not None:
            if self.fixture not in FIXTURES:
                raise UsageError(f"unknown fixture {self.fixture!r}; choose from {', '.join(FIXTURES)}")
            instance = FIXTURES[self.fixture]()
        else:
            instance, report = parse_trace(_read(self.campaigns), _read(self.donations), provenance=self.campaigns)
            if _blocking(report):
                raise DataError("\n".join(str(v) for v in _blocking(report)))
        if self.snapshot_day is not None:
            instance, _ = filter_campaigns(instance, self.snapshot_day)
        return instance


def _blocking(report):
    return [v for v in report if v.severity in (ERROR, WARNING)]


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _write(path: Path, data: bytes | str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data.encode() if isinstance(data, str) else data)


def _spec(args) -> SchemeSpec:
    return SchemeSpec(
        scheme=args.scheme,
        nice_level=args.nice_level,
        ordering=args.ordering,
        ladder=not args.no_ladder,
        tiebreak=not args.no_tiebreak,
    )


def _money(v) -> int | str:
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else str(v)


def solution_document(solution: Solution) -> dict:
    return {
        "scheme": solution.spec.label,
        "nice_level": solution.nice_level.value,
        "funded": sorted(solution.funded),
        "baseline": sorted(solution.baseline),
        "objective": solution.objective,
        "optimal": solution.optimal,
        "upper_bound": solution.upper_bound,
        "plan": [
            {"donor": i, "campaign": j, "amount": _money(v)}
            for (i, j), v in sorted(solution.plan.values.items())
            if v != 0
        ],
        "components": [
            {
                "campaigns": len(c.campaigns),
                "candidates": c.candidates,
                "funded": c.funded,
                "method": c.method,
                "level": c.level,
                "optimal": c.optimal,
                "upper_bound": c.upper_bound,
            }
            for c in solution.components
        ],
    }


# -- commands ------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        instance, report = parse_trace(_read(args.campaigns), _read(args.donations), provenance=args.campaigns)
    except TraceParseError as exc:
        print(f"invalid: {exc}")
        return EXIT_DATA
    for v in report:
        print(v)
    blocking = _blocking(report)
    print(f"{len(instance.campaigns)} campaigns, {len(instance.contributions)} contributions, {len(blocking)} violation(s)")
    return EXIT_DATA if blocking else EXIT_OK


def cmd_solve(args) -> int:
    instance = RunConfig.from_args(args).load()
    solution = solve(instance, _spec(args), max_checks=args.max_checks or None)
    out = Path(args.out_dir)
    bundle = summarize(instance, solution)
    _write(out / "solution.json", json.dumps(solution_document(solution), indent=2) + "\n")
    _write(out / "report.json", emit(bundle, "json"))
    _write(out / "report_campaigns.csv", emit(bundle, "csv", "campaigns"))
    _write(out / "report_groups.csv", emit(bundle, "csv", "groups"))
    status = "optimal" if solution.optimal else f"best found (upper bound {solution.upper_bound})"
    print(f"{solution.spec.label}: {solution.objective} funded of {len(instance.campaigns)} "
          f"(baseline {len(solution.baseline)}, level {solution.nice_level.value}, {status})")
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = RunConfig.from_args(args).load()
    spec = _spec(args)
    if args.success is not None:
        success = {s for s in args.success.split(",") if s}
        ok = oracle_feasible(instance, spec, success)
        print(f"{'feasible' if ok else 'infeasible'}: {','.join(sorted(success))}")
    else:
        print(f"optimum at {spec.nice_level.value}: {oracle_optimum(instance, spec)}")
    return EXIT_OK


def _percentages(text: str) -> list[Fraction]:
    try:
        return [Fraction(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad percentage list {text!r}") from None


def cmd_sweep(args) -> int:
    instance = RunConfig.from_args(args).load()
    spec = _spec(args)
    kinds = [Kind.DONOR, Kind.ORGANIZER] if args.kind == "both" else [Kind(args.kind)]
    out = Path(args.out_dir)
    for kind in kinds:
        curve = sweep(
            instance,
            spec,
            kind,
            _percentages(args.percentages),
            args.samples,
            args.seed,
            jobs=args.jobs,
            max_checks=args.max_checks or None,
        )
        _write(out / f"sweep_{kind.value}.csv", curve.to_csv())
        print(f"wrote {out / f'sweep_{kind.value}.csv'}")
    return EXIT_OK


def cmd_synth(args) -> int:
    overrides = {f.name: getattr(args, f.name) for f in fields(SynthParams) if getattr(args, f.name, None) is not None}
    params = SynthParams(**overrides)
    campaigns, donations = serialize(generate_synthetic(params))
    out = Path(args.out_dir)
    _write(out / "campaigns.csv", campaigns)
    _write(out / "donations.csv", donations)
    print(f"wrote {out / 'campaigns.csv'} and {out / 'donations.csv'}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def _source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--campaigns", help="campaigns CSV")
    p.add_argument("--donations", help="donations CSV")
    p.add_argument("--synth", action="store_true", help="use a synthetic trace with default parameters")
    p.add_argument("--fixture", help=f"built-in example instance ({', '.join(FIXTURES)})")
    p.add_argument("--snapshot-day", type=int, help="drop campaigns still active on this day")
    p.add_argument("--seed", type=int, default=1, help="seed for synthetic data and sampling")


def _scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.NAIVE.value,
                   help="redistribution scheme")
    p.add_argument("--nice-level", choices=[n.value for n in NiceLevel], default=NiceLevel.ALL.value,
                   help="most protective optional-constraint level to try")
    p.add_argument("--ordering", choices=[o.value for o in Ordering], default=Ordering.RELAXED.value,
                   help="preference-order rows for the ordered scheme")
    p.add_argument("--no-ladder", action="store_true", help="do not relax optional constraints")
    p.add_argument("--no-tiebreak", action="store_true", help="skip the money-movement tie-break")
    p.add_argument("--max-checks", type=int, default=DEFAULT_MAX_CHECKS,
                   help="feasibility-check budget per large component (0 = unlimited)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="redistrib", description="Redistribute crowdfunding donations to fund more campaigns.",
                     formatter_class=fmt)
    parser.add_argument("--config", help="JSON file with option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check trace files", formatter_class=fmt)
    p.add_argument("campaigns", help="campaigns CSV")
    p.add_argument("donations", help="donations CSV")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="maximize funded campaigns", formatter_class=fmt)
    _source_args(p)
    _scheme_args(p)
    p.add_argument("--out-dir", default="out", help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="reference answers for tiny instances", formatter_class=fmt)
    _source_args(p)
    _scheme_args(p)
    p.add_argument("--success", help="comma-separated success set to test (default: report the optimum)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="funded count versus acceptance rate", formatter_class=fmt)
    _source_args(p)
    _scheme_args(p)
    p.add_argument("--kind", choices=["donor", "organizer", "both"], default="both", help="who accepts redistribution")
    p.add_argument("--percentages", default=",".join(map(str, DEFAULT_PERCENTAGES)), help="comma-separated list")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per percentage")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out-dir", default="out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic trace", formatter_class=fmt)
    defaults = SynthParams()
    for f in fields(SynthParams):
        p.add_argument(f"--{f.name.replace('_', '-')}", type=type(getattr(defaults, f.name)),
                       default=getattr(defaults, f.name), help=f.name.replace("_", " "))
    p.add_argument("--out-dir", default="out", help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices[name]


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"redistrib: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"redistrib: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DataError, TraceParseError, ParameterError, ScenarioError, OracleSizeError, SolverRefusal) as exc:
        print(f"redistrib: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
