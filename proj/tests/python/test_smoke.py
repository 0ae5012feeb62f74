import math

import pytest

import twostage_matching as tm


def test_eight_cycle_values():
    inst = tm.make_eight_cycle()
    assert inst.num_offline == 4
    lp = tm.solve_lp_on(inst)
    assert lp["backend"] == "exact"
    assert lp["objective_exact"] == "4"
    assert tm.opt_online(inst)["value_exact"] == "7/2"


def test_edge_gap_relaxation():
    lp = tm.solve_lp_on(tm.make_edge_gap_family(2))
    assert lp["backend"] == "float"
    assert lp["objective"] == pytest.approx((2 + math.sqrt(2)) * 2, abs=1e-9)


def test_json_round_trip():
    inst = tm.make_random_instance(seed=3, mode=tm.WeightMode.VERTEX)
    assert tm.Instance.from_json(inst.to_json()) == inst


def test_round_augment_is_deterministic():
    inst = tm.make_eight_cycle()
    a = tm.round_augment_ratio(inst, trials=500, seed=7)
    b = tm.round_augment_ratio(inst, trials=500, seed=7)
    assert a == b
    assert a["ratio_lp"] >= 0.875 - 1e-12


def test_crs_and_numerics():
    c = tm.EDGE_SCALE
    marg = tm.star_crs_marginals([0.5, 0.5], [1 - c / 2, 1 - c / 2])
    assert marg == pytest.approx([c / 2, c / 2], abs=1e-9)
    assert tm.star_bound_h(2) == pytest.approx(1.0, abs=1e-12)
    assert tm.sample_size_vertex(10, 0.1, 0.05) == 3511


def test_errors():
    with pytest.raises(ValueError):
        tm.make_edge_gap_family(0)
    with pytest.raises(RuntimeError):
        tm.opt_online(tm.make_edge_gap_family(11))


def test_cli_in_process():
    code, out, _ = tm.run_cli(["gap", "eight-cycle"])
    assert code == 0
    assert "7/8" in out
