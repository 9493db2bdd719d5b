import math

import numpy as np
import pytest

from restartopt.submodular import (
    CoverageInstance,
    SetFunctionOracle,
    brute_force_submax,
    greedy,
    marginal_gain,
    modular_oracle,
    random_coverage,
    read_coverage,
    threshold_eval_bound,
    threshold_greedy,
    verify_submodular,
    write_coverage,
)

# A = {1, 2}, B = {3, 4}, C = {1, 3}, shifted to 0-based items
TOY = CoverageInstance(({0, 1}, {2, 3}, {0, 2}), np.ones(4), labels=("A", "B", "C"))


def test_marginal_gain():
    single = CoverageInstance(({0, 1},), np.ones(2))
    assert marginal_gain(single.oracle(), set(), 0) == 2
    assert marginal_gain(TOY.oracle(), {0}, 2) == 1
    nested = CoverageInstance(({0, 1, 2}, {1}), np.ones(3))
    assert marginal_gain(nested.oracle(), {0}, 1) == 0
    with pytest.raises(ValueError):
        marginal_gain(TOY.oracle(), {0}, 0)


def test_marginal_gain_cached_base():
    o = TOY.oracle()
    assert marginal_gain(o, {0}, 1, base_value=2.0) == 2
    assert o.calls == 1


def test_greedy_toy():
    sel = greedy(TOY.oracle(), 2)
    assert sel.chosen == (0, 1) and sel.value == 4
    assert sel.evals_used == 6


def test_greedy_full_and_modular():
    sel = greedy(TOY.oracle(), 3)
    assert set(sel.chosen) == {0, 1, 2} and sel.value == 4
    sel = greedy(modular_oracle([3, 9, 1, 7]), 2)
    assert set(sel.chosen) == {1, 3} and sel.value == 16


def test_threshold_toy():
    sel = threshold_greedy(TOY.oracle(), 2, 0.25)
    assert sel.chosen == (0, 1) and sel.value == 4
    assert sel.evals_used == 5
    assert threshold_eval_bound(3, 0.25) == 33
    # both accepted during the first pass, while the threshold is still 2
    assert [r.phase for r in sel.trace] == [1, 1]


def test_threshold_modular_single():
    sel = threshold_greedy(modular_oracle([3, 9, 1, 7]), 1, 0.25)
    assert sel.chosen == (1,)


def test_threshold_zero_function():
    sel = threshold_greedy(SetFunctionOracle(4, lambda S: 0.0), 2, 0.1)
    assert sel.chosen == () and sel.value == 0


def test_threshold_rejects_bad_eps():
    for eps in (0, 1, -0.1, 1.5):
        with pytest.raises(ValueError):
            threshold_greedy(TOY.oracle(), 2, eps)
    with pytest.raises(ValueError):
        greedy(TOY.oracle(), 0)


def test_threshold_frozen_instance():
    inst = random_coverage(12, 30, 7)
    g = greedy(inst.oracle(), 3)
    t = threshold_greedy(inst.oracle(), 3, 0.1)
    b = brute_force_submax(inst.oracle(), 3)
    assert g.chosen == t.chosen == (10, 6, 3)
    assert b.chosen == (3, 6, 10)
    assert g.value == pytest.approx(10.535216677620854, rel=1e-12)
    assert (g.evals_used, t.evals_used, b.evals_used) == (34, 103, 299)


def test_brute_force():
    assert brute_force_submax(TOY.oracle(), 0).chosen == ()
    assert brute_force_submax(TOY.oracle(), 2).chosen == (0, 1)
    assert brute_force_submax(modular_oracle([3, 9, 1, 7]), 2).chosen == (1, 3)


def test_counter_counts_every_call():
    o = TOY.oracle()
    o({0})
    o.evaluate([1, 2])
    assert o.calls == 2
    assert o.fresh().calls == 0


def test_verify_submodular():
    assert verify_submodular(TOY.oracle())
    assert verify_submodular(SetFunctionOracle(3, lambda S: 0.0))
    assert not verify_submodular(SetFunctionOracle(3, lambda S: len(S) ** 2))
    assert verify_submodular(random_coverage(16, 40, 0).oracle())
    assert not verify_submodular(SetFunctionOracle(16, lambda S: len(S) ** 2))
    assert not verify_submodular(SetFunctionOracle(3, lambda S: -1.0 * len(S)))


def test_threshold_eval_bound_values():
    assert threshold_eval_bound(12, 0.1) == 576
    assert threshold_eval_bound(100, 0.1) == 6800
    passes = math.ceil(math.log(100 / 0.25) / math.log(1 / 0.75))
    assert threshold_eval_bound(100, 0.25) == 100 * (passes + 2)


def test_coverage_validation():
    with pytest.raises(ValueError):
        CoverageInstance(({0, 5},), np.ones(3))
    with pytest.raises(ValueError):
        CoverageInstance(({0},), -np.ones(3))
    with pytest.raises(ValueError):
        SetFunctionOracle(3, len, labels=("a", "a", "b"))


def test_coverage_round_trip(tmp_path):
    inst = random_coverage(6, 10, 4, density=0.3)
    inst = CoverageInstance(inst.subsets + (frozenset(),), inst.weights)
    path = tmp_path / "cov.txt"
    write_coverage(inst, path)
    back = read_coverage(path)
    assert back.subsets == inst.subsets
    np.testing.assert_array_equal(back.weights, inst.weights)


def test_read_coverage_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 3\n0 1\n1 1 1\n")
    with pytest.raises(ValueError):
        read_coverage(bad)
