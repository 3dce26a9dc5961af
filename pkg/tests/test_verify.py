from fractions import Fraction

import pytest

from fraquad import verify
from fraquad.green import Interval

F = Fraction

CONFLICTS = {
    "sg.interior-triangle.indicators",
    "sg.replicated-triangle-1.uniform-discrepancy",
    "sg.replicated-triangle-2.uniform-discrepancy",
    "sg.replicated-triangle-3.uniform-discrepancy",
    "sg.energy.cell-matrix-2",
    "st.first-level.green-values",
    "st.v0.integral-of-green",
    "st.v0.delta1",
    "st.v0.weights",
    "st.level-set-1.uniform-discrepancy",
    "st.level-set-1.delta0_sq",
    "st.level-set-1.delta1",
    "st.level-set-2.uniform-discrepancy",
    "st.level-set-2.delta0_sq",
    "st.level-set-2.delta1",
    "st.level-set-3.uniform-discrepancy",
    "st.energy.cell-matrix-2",
    "sg3.first-level.solution-h0",
    "sg3.first-level.green-values",
    "sg3.v0.integral-of-green",
    "sg3.v0.delta1",
    "sg3.level-set-1.delta0_sq",
    "sg3.level-set-2.delta0_sq",
    "sg3.level-set-1.delta1",
    "sg3.energy.cell-matrix-0",
    "sg3.energy.cell-matrix-1",
    "sg3.energy.cell-matrix-2",
}


@pytest.fixture(scope="module")
def full():
    return verify.run("all")


def test_no_mismatch(full):
    assert full.ok
    assert full.counts == {"match": 131, "mismatch": 0, "paper-internal-conflict": 27, "conjecture": 3}


def test_conflict_set_is_documented(full):
    got = {it.identifier for it in full.items if it.status == "paper-internal-conflict"}
    assert got == CONFLICTS
    assert len(verify.conflict_report(full)) == len(CONFLICTS)


def test_identifiers_unique(full):
    ids = [it.identifier for it in full.items]
    assert len(ids) == len(set(ids))


def test_st_energy_tables_match(full):
    by_id = {it.identifier: it for it in full.items}
    for name in ("cell-matrix-0", "cell-matrix-1", "cell-matrix-3", "basic-integrals", "self-measure-integrals"):
        assert by_id[f"st.energy.{name}"].status == "match"


def test_sg3_ratio_seven_sixths(full):
    by_id = {it.identifier: it for it in full.items}
    for ident in ("sg3.first-level.green-values", "sg3.v0.integral-of-green"):
        assert "computed/printed = 7/6" in by_id[ident].note
        assert set(by_id[ident].computed) == {"green-identity", "f1k"}


def test_conjectures_certified(full):
    conj = {it.identifier: it for it in full.items if it.status == "conjecture"}
    assert set(conj) == {"sg.one-extra-point.delta1", "sg.two-extra-points.delta1", "sg.between-levels.mixed.delta1"}
    assert "equals the conjectured value" in conj["sg.one-extra-point.delta1"].note


def test_judge_rules():
    assert verify.judge(F(1), {"exact": F(1)})[0] == "match"
    assert verify.judge(F(1), {"a": F(1), "b": F(2)})[0] == "mismatch"
    assert verify.judge(F(1), {"exact": F(2)})[0] == "mismatch"
    ev = verify.Evidence("other data", value=F(2))
    status, note = verify.judge(F(1), {"exact": F(2)}, ev)
    assert status == "paper-internal-conflict" and note.endswith("computed/printed = 2")
    assert verify.judge(F(1), {"exact": F(3)}, ev)[0] == "mismatch"
    assert verify.judge(F(1, 3), {"exact": Interval(F(0), F(1))})[0] == "match"
    assert verify.judge(F(1, 3), {"exact": Interval(F(1, 3), F(1, 3))}, conjecture=True)[0] == "conjecture"


def test_common_ratio():
    assert verify.common_ratio({"a": F(1, 18), "b": F(0)}, {"a": F(7, 108), "b": F(0)}) == F(7, 6)
    assert verify.common_ratio({"a": F(1), "b": F(1)}, {"a": F(2), "b": F(3)}) is None


def test_unknown_scope():
    with pytest.raises(ValueError):
        verify.run("koch")


def test_report_is_deterministic():
    a = verify.run("SG3").as_dict()
    b = verify.run("SG3").as_dict()
    assert a == b
