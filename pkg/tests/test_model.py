import pytest

from redistrib.domain import FIXTURES, Instance
from redistrib.model import (
    GE,
    LE,
    ModelBuilder,
    ModelError,
    NiceLevel,
    SchemeSpec,
    build_constraints,
    describe_system,
    order_triggered,
    to_lp_format,
)


def rows_by_family(cs):
    out = {}
    for r in cs.rows:
        named = tuple(sorted((cs.variables[k], c) for k, c in r.terms))
        out.setdefault(r.family, set()).add((named, r.sense, r.rhs))
    return out


def test_e1_naive_rows():
    cs = build_constraints(FIXTURES["E1"](), SchemeSpec("naive"), {"A", "B"})
    fam = rows_by_family(cs)
    dA, dB = ("d", "A"), ("d", "B")
    assert ((((dA, 1), (dB, 1)), LE, 10_000)) in fam["All2"]
    assert (((dA, 1),), GE, 5_000) in fam["Goal"]
    assert (((dB, 1),), GE, 5_000) in fam["Goal"]
    assert fam["Nice1"] == {(((dA, 1),), LE, 10_000)}
    assert fam["Nice3"] == {(((dB, 1),), LE, 5_000)}


def test_e1_unordered_has_no_new_support():
    cs = build_constraints(FIXTURES["E1"](), SchemeSpec("unordered"), {"A", "B"})
    assert ("d", "B") not in cs.variables
    goal_b = [r for r in cs.rows if r.family == "Goal" and r.label.endswith("B")]
    assert goal_b[0].terms == ()


def test_e3_ordered_row():
    cs = build_constraints(FIXTURES["E3"](), SchemeSpec("ordered"), {"A", "B"})
    (row,) = cs.rows_of("Order")
    named = {cs.variables[k]: c for k, c in row.terms}
    assert named == {("d", "B"): 1, ("d", "A"): -1}
    assert (row.sense, row.rhs) == (GE, 0)
    assert describe_system(cs).count("Order") == 1


def test_relaxed_order_waits_for_both_winners():
    e3 = FIXTURES["E3"]()
    assert not build_constraints(e3, SchemeSpec("ordered"), {"B"}).rows_of("Order")
    assert build_constraints(e3, SchemeSpec("ordered", ordering="strict"), {"B"}).rows_of("Order")


def test_order_trigger_is_exact():
    assert order_triggered(4500, 1500, 1000, 10_000)
    assert not order_triggered(100, 100, 100, 100)
    assert not order_triggered(200, 1000, 100, 100)


def test_repurposing_freezes_winners():
    cs = build_constraints(FIXTURES["E2"](), SchemeSpec("repurposing"), set())
    assert not cs.rows_of("Rep")  # no baseline winners in E2
    cs = build_constraints(FIXTURES["E1"](), SchemeSpec("repurposing"), {"A"})
    assert {cs.variables[r.terms[0][0]] for r in cs.rows_of("Rep")} == {("d", "A")}


def test_nice_levels_control_rows():
    e1 = FIXTURES["E1"]()
    for level, fams in [
        (NiceLevel.ALL, {"Nice1", "Nice2", "Nice3"}),
        (NiceLevel.NICE12, {"Nice1", "Nice2"}),
        (NiceLevel.NICE1, {"Nice1"}),
        (NiceLevel.NONE, set()),
    ]:
        cs = build_constraints(e1, SchemeSpec("naive", nice_level=level), {"A"})
        assert cs.families & {"Nice1", "Nice2", "Nice3"} == fams


def test_pins():
    cs = build_constraints(FIXTURES["E1"](), SchemeSpec(frozen_donors={"d"}), {"A"})
    assert {cs.variables[r.terms[0][0]]: r.rhs for r in cs.rows_of("Pin")} == {("d", "A"): 10_000, ("d", "B"): 0}
    with pytest.raises(ModelError):
        ModelBuilder(FIXTURES["E1"](), SchemeSpec(frozen_donors={"nobody"}))


def test_success_set_must_keep_winners():
    with pytest.raises(ModelError):
        build_constraints(FIXTURES["E1"](), SchemeSpec(), {"B"})
    with pytest.raises(ModelError):
        build_constraints(FIXTURES["E1"](), SchemeSpec(), {"A", "Z"})


def test_listing_and_lp_text():
    cs = build_constraints(FIXTURES["E1"](), SchemeSpec(), {"A", "B"})
    assert any(line.startswith("All2") and "donor d" in line for line in describe_system(cs).splitlines())
    assert describe_system(build_constraints(Instance((), ()), SchemeSpec(), set())) == ""
    lp = to_lp_format(cs)
    assert lp.startswith("\\") and "Subject To" in lp and lp.rstrip().endswith("End")


def test_identity_satisfies_baseline_system():
    for make in FIXTURES.values():
        inst = make()
        for scheme in ("naive", "repurposing", "unordered", "ordered"):
            b = ModelBuilder(inst, SchemeSpec(scheme))
            cs = b.build(b.base.funded)
            assert cs.is_satisfied_by(list(cs.original))
