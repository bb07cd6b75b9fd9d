"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Criteria 2-8 run at full size here, so this module takes several minutes.
"""

from __future__ import annotations

import json
import random
import time
from itertools import combinations

import pytest

from redistrib.cli import solution_document
from redistrib.domain import FIXTURES, baseline
from redistrib.feasibility import check_feasible
from redistrib.ingest import SynthParams, generate_synthetic
from redistrib.model import ModelBuilder, NiceLevel, Scheme, SchemeSpec
from redistrib.oracle import oracle_feasible
from redistrib.report import emit, summarize
from redistrib.simulate import Kind, apply_scenario, nested_chain, sweep
from redistrib.solver import brute_force, solve, verify_solution
from tiny import random_instance

SCHEMES = [s.value for s in Scheme]
ORACLE_CASES = 10_000
DOMINANCE_CASES = 1_000
SWEEP_CASES = 20
DESK_SEED = 1
TEN_MINUTES = 600.0


def report(capsys, criterion: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\nCRITERION {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_2_oracle_equivalence(capsys):
    rng = random.Random(20_240_002)
    start = time.perf_counter()
    mismatches = []
    systems = 0
    for case in range(ORACLE_CASES):
        inst = random_instance(rng)
        cache: dict = {}
        base = baseline(inst).funded
        others = [c for c in inst.campaign_ids if c not in base]
        subsets = [base | set(extra) for k in range(len(others) + 1) for extra in combinations(others, k)]
        for scheme in SCHEMES:
            for level in NiceLevel:
                spec = SchemeSpec(scheme, nice_level=level)
                got = solve(inst, spec, cache=cache, tiebreak=False).objective
                want = brute_force(inst, spec, cache=cache, tiebreak=False).objective
                if got != want:
                    mismatches.append((case, scheme, level.value, "objective", got, want))
                builder = ModelBuilder(inst, spec)
                for S in subsets:
                    systems += 1
                    fast = check_feasible(builder.build(S), backend="exact", cache=cache).feasible
                    if fast != oracle_feasible(inst, spec, S):
                        mismatches.append((case, scheme, level.value, sorted(S)))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < TEN_MINUTES
    report(
        capsys,
        2,
        ok,
        f"{ORACLE_CASES} instances x {len(SCHEMES)} schemes x {len(NiceLevel)} levels, "
        f"{systems} systems vs oracle, {len(mismatches)} mismatches, {elapsed:.0f}s (limit {TEN_MINUTES:.0f}s)",
    )
    assert not mismatches, mismatches[:5]
    assert elapsed < TEN_MINUTES


def test_criterion_3_fixture_outcomes(capsys):
    expected = {
        "E1": {"naive": 2, "repurposing": 1, "unordered": 1, "ordered": 1},
        "E2": {"naive": 1, "repurposing": 1, "unordered": 0, "ordered": 0},
        "E3": {"naive": 2, "unordered": 2, "ordered": 1},
        "E4": {s: len(baseline(FIXTURES["E4"]()).funded) for s in SCHEMES},
    }
    start = time.perf_counter()
    got = {
        name: {scheme: solve(FIXTURES[name](), SchemeSpec(scheme)).objective for scheme in table}
        for name, table in expected.items()
    }
    elapsed = time.perf_counter() - start
    ok = got == expected and elapsed < 1.0
    report(capsys, 3, ok, f"{got} in {elapsed:.2f}s")
    assert got == expected
    assert elapsed < 1.0


def test_criterion_4_scheme_dominance(capsys):
    rng = random.Random(20_240_004)
    start = time.perf_counter()
    failures = []
    for case in range(DOMINANCE_CASES):
        inst = random_instance(rng)
        obj = {s: solve(inst, SchemeSpec(s), tiebreak=False).objective for s in SCHEMES}
        chain_ok = obj["naive"] >= obj["unordered"] >= obj["ordered"] >= len(baseline(inst).funded)
        if not (obj["naive"] >= obj["repurposing"] and chain_ok):
            failures.append((case, obj))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    report(capsys, 4, ok, f"{DOMINANCE_CASES} instances, {len(failures)} violations, {elapsed:.0f}s (limit 300s)")
    assert not failures, failures[:5]
    assert elapsed < 300


def test_criterion_5_identity_feasibility(capsys):
    rng = random.Random(20_240_005)
    failures = []
    checked = 0
    for case in range(DOMINANCE_CASES):
        inst = random_instance(rng)
        for scheme in SCHEMES:
            for level in NiceLevel:
                builder = ModelBuilder(inst, SchemeSpec(scheme, nice_level=level))
                cs = builder.build(builder.base.funded)
                checked += 1
                if not (cs.is_satisfied_by(list(cs.original)) and check_feasible(cs).feasible):
                    failures.append((case, scheme, level.value))
    report(capsys, 5, not failures, f"{checked} baseline systems, {len(failures)} without R = A feasible")
    assert not failures


def test_criterion_6_sweep_endpoints(capsys):
    rng = random.Random(20_240_006)
    instances = [FIXTURES["E1b"]()] + [random_instance(rng) for _ in range(SWEEP_CASES)]
    problems = []
    chains = 0
    for k, inst in enumerate(instances):
        spec = SchemeSpec("naive")
        optimum = solve(inst, spec, tiebreak=False).objective
        for kind in Kind:
            curve = sweep(inst, spec, kind, [0, 100], samples_per_point=5, seed=k)
            low, high = curve.points
            if (low.mean, low.stddev) != (len(baseline(inst).funded), 0.0):
                problems.append((k, kind.value, "p=0", low.mean, low.stddev))
            if (high.mean, high.stddev) != (optimum, 0.0):
                problems.append((k, kind.value, "p=100", high.mean, high.stddev))
            for chain in range(3):
                chains += 1
                scenarios = nested_chain(inst, kind, [0, 20, 40, 60, 80, 100], seed=k, chain=chain)
                values = [solve(inst, apply_scenario(inst, spec, sc), tiebreak=False).objective for sc in scenarios]
                if values != sorted(values):
                    problems.append((k, kind.value, "chain", values))
    report(capsys, 6, not problems, f"{len(instances)} instances, {chains} nested chains, {len(problems)} problems")
    assert not problems, problems[:5]


def _desk_outputs() -> tuple[dict[str, dict], dict[str, bytes], float]:
    inst = generate_synthetic(SynthParams(seed=DESK_SEED))
    results, files = {}, {}
    start = time.perf_counter()
    for scheme in SCHEMES:
        sol = solve(inst, SchemeSpec(scheme))
        assert verify_solution(inst, sol)
        doc = solution_document(sol)
        bundle = summarize(inst, sol)
        results[scheme] = doc
        files[f"{scheme}/solution.json"] = json.dumps(doc, indent=2).encode()
        files[f"{scheme}/report.json"] = emit(bundle, "json")
        files[f"{scheme}/report_campaigns.csv"] = emit(bundle, "csv", "campaigns")
        files[f"{scheme}/report_groups.csv"] = emit(bundle, "csv", "groups")
    return results, files, time.perf_counter() - start


@pytest.fixture(scope="module")
def desk_run():
    return _desk_outputs()


def test_criterion_7_desk_scale(desk_run, capsys):
    results, _, elapsed = desk_run
    obj = {s: results[s]["objective"] for s in SCHEMES}
    base = len(results["naive"]["baseline"])
    ordered_ok = obj["naive"] >= obj["repurposing"] and obj["naive"] >= obj["unordered"] >= obj["ordered"] >= base
    ok = ordered_ok and obj["naive"] > base and elapsed < TEN_MINUTES
    total = 228
    status = ", ".join(
        f"{s} {obj[s]} ({100 * obj[s] / total:.0f}%, {'optimal' if results[s]['optimal'] else 'bound ' + str(results[s]['upper_bound'])})"
        for s in SCHEMES
    )
    report(capsys, 7, ok, f"baseline {base} ({100 * base / total:.0f}%); {status}; {elapsed:.0f}s (limit {TEN_MINUTES:.0f}s)")
    assert ordered_ok
    assert obj["naive"] > base
    assert elapsed < TEN_MINUTES


def test_criterion_8_determinism(desk_run, capsys):
    _, first, _ = desk_run
    _, second, _ = _desk_outputs()
    differing = sorted(name for name in first if first[name] != second.get(name))
    report(capsys, 8, not differing, f"{len(first)} files compared, {len(differing)} differ {differing}")
    assert not differing
