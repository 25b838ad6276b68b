import pytest

from ivref import laws as lw


@pytest.mark.parametrize("law_id", ["refl", "trans", "chop-units", "chop-assoc", "omega-monotone", "soundness"])
def test_positive_laws_hold_on_small_budget(law_id):
    rep = lw.run_law(law_id, budget=30, seed=3)
    assert rep.status == "pass", rep.witnesses
    assert rep.checked == 30


@pytest.mark.parametrize(
    "law_id",
    ["seq-comp-no-joins", "always-implies-definitely", "possibly-implies-sometime", "ref-weaken", "ref-strengthen"],
)
def test_negative_controls_find_witness(law_id):
    rep = lw.run_law(law_id, budget=200, seed=0)
    assert rep.status == "pass"
    assert rep.failures >= 1 and rep.witnesses


def test_zero_budget_is_inconclusive():
    rep = lw.run_law("refl", budget=0)
    assert rep.status == "inconclusive" and rep.checked == 0


def test_unknown_law():
    with pytest.raises(lw.UnknownLaw):
        lw.run_law("no-such-law")
    with pytest.raises(lw.UnknownLaw):
        lw.run_all(1, laws=["refl", "nope"])


def test_runs_are_deterministic_per_seed():
    a = lw.run_law("weaken", budget=20, seed=5).to_json()
    b = lw.run_law("weaken", budget=20, seed=5).to_json()
    assert a == b


def test_limits_restored_after_override():
    before = (lw.LIMITS.horizon, lw.LIMITS.depth)
    lw.run_law("chop-units", budget=5, depth=1, horizon=2)
    assert (lw.LIMITS.horizon, lw.LIMITS.depth) == before


def test_catalog_report_json():
    report = lw.run_all(5, laws=["refl", "seq-comp-no-joins"])
    js = report.to_json()
    assert js["ok"] is True
    assert [r["law"] for r in js["laws"]] == ["refl", "seq-comp-no-joins"]
    assert all(r["seconds"] is None for r in js["laws"])


def test_parallel_matches_serial():
    ids = ["refl", "chop-units"]
    serial = lw.run_all(10, seed=2, laws=ids).to_json()
    parallel = lw.run_all(10, seed=2, laws=ids, jobs=2).to_json()
    assert serial == parallel
