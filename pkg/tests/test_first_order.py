import collections
import math

import numpy as np
import pytest

from restartopt.first_order import (
    certified_gap,
    gd_step,
    regularized_reduction,
    restarted_minimize,
    run_agd,
    run_gd,
    run_subgradient,
)
from restartopt.oracles import (
    DiagonalQuadratic,
    FunctionOracle,
    L1PlusQuadratic,
    LogSumExp,
    MaxAffine,
    RegularizedOracle,
    finite_difference_check,
    inequality_slacks,
)
from restartopt.schedule import NonFiniteError, PhaseFailure

Q10 = DiagonalQuadratic([1.0, 10.0])


def test_gd_step():
    assert gd_step(DiagonalQuadratic([1.0]), [1.0])[0] == 0.0
    np.testing.assert_allclose(gd_step(Q10, [1.0, 1.0]), [0.9, 0.0])
    np.testing.assert_array_equal(gd_step(Q10, [0.0, 0.0]), [0.0, 0.0])


def test_gd_step_non_finite():
    bad = FunctionOracle(lambda x: 0.0, lambda x: np.array([np.inf]), 1, 1.0)
    with pytest.raises(NonFiniteError):
        gd_step(bad, [1.0])


def test_run_gd():
    x, tr = run_gd(Q10, [1.0, 1.0], 0)
    assert tr == [] and list(x) == [1.0, 1.0]
    x, tr = run_gd(DiagonalQuadratic([1.0]), [1.0], 1)
    assert tr[-1].objective_value == 0.0
    x, tr = run_gd(Q10, [1.0, 1.0], 40)
    assert Q10.value(x) == pytest.approx(0.00010923725026419611, rel=1e-12)
    assert Q10.value(x) <= Q10.value([1, 1]) / 2


def test_run_agd():
    x, tr = run_agd(Q10, [1.0, 1.0], 0)
    assert tr == []
    x, _ = run_agd(DiagonalQuadratic([1.0]), [1.0], 1)
    assert x[0] == 0.0
    q = DiagonalQuadratic([1.0, 100.0])
    x, tr = run_agd(q, [1.0, 1.0], math.ceil(math.sqrt(4 * 2 * 100)))
    assert len(tr) == 29
    assert q.value(x) == pytest.approx(0.02156767171075276, rel=1e-12)
    assert q.value(x) <= q.value([1, 1]) / 2


def test_agd_first_step_is_gd_step():
    x, _ = run_agd(Q10, [1.0, 1.0], 1)
    np.testing.assert_array_equal(x, gd_step(Q10, [1.0, 1.0]))


def test_run_subgradient():
    f = L1PlusQuadratic()
    assert f.G == 2.0
    x, _ = run_subgradient(f, [0.0], 10, 1.0)
    assert x[0] == 0.0
    x, tr = run_subgradient(f, [1.0], 64, 1.0)
    assert f.value(x) <= 2 * 1 / 8
    assert f.value(x) == pytest.approx(0.01677499766786517, rel=1e-12)
    values = [r.objective_value for r in tr]
    assert values == sorted(values, reverse=True)  # best-so-far


def test_subgradient_max_affine():
    f = MaxAffine([[1.0], [-2.0]], x_star=[0.0], f_star=0.0)
    assert f.G == 2.0
    x, _ = run_subgradient(f, [1.0], 100, 1.0)
    assert f.value(x) <= 2 / 10


def test_restarted_gd_and_agd_on_two_d_quadratic():
    K = math.ceil(math.log2(Q10.value([1, 1]) / 1e-6))
    xg, tg = restarted_minimize("gd", Q10, [1.0, 1.0], 1e-6)
    xa, ta = restarted_minimize("agd", Q10, [1.0, 1.0], 1e-6)
    assert len(tg) == 80 and len(tg) <= 40 * K
    assert len(ta) == 36 and len(ta) <= 9 * K
    assert Q10.value(xg) == pytest.approx(2.3865553690565216e-08, rel=1e-9)
    assert Q10.value(xa) <= 1e-6


def test_gradient_certificate_is_upper_bound():
    hidden = Q10.with_constants(keep_minimizer=False)
    for x in ([1.0, 1.0], [0.3, -2.0], [5.0, 0.0]):
        assert certified_gap(hidden, x) >= Q10.value(x) - 1e-15
    with pytest.raises(ValueError):
        certified_gap(hidden, [1.0, 1.0], "minimizer")


def test_restarted_with_hidden_minimizer():
    hidden = Q10.with_constants(keep_minimizer=False)
    x, tr = restarted_minimize("gd", hidden, [1.0, 1.0], 1e-6)
    assert Q10.value(x) <= 1e-6
    assert all(r.gap_certificate is None for r in tr)


def test_restarted_subgradient():
    f = L1PlusQuadratic()
    x, tr = restarted_minimize("subgrad", f, [1.0], 0.1)
    assert len(tr) == 11
    assert f.value(x) == pytest.approx(0.0961202943199393, rel=1e-12)
    assert len(tr) <= 320


def test_restarted_rejects_mu_zero():
    with pytest.raises(ValueError, match="mu"):
        restarted_minimize("gd", DiagonalQuadratic([1.0, 0.0]), [1.0, 1.0], 1e-3)
    with pytest.raises(ValueError, match="variant"):
        restarted_minimize("bfgs", Q10, [1.0, 1.0], 1e-3)


def test_restarted_already_optimal():
    x, tr = restarted_minimize("gd", Q10, [0.0, 0.0], 1e-6)
    assert tr == []


def test_restarted_phase_failure():
    bad = FunctionOracle(lambda x: float(x @ x), lambda x: np.full_like(x, np.nan), 2, 1.0, 1.0)
    with pytest.raises(PhaseFailure):
        restarted_minimize("gd", bad, [1.0, 1.0], 1e-3, gap0=1.0, certificate="gradient")


def test_agd_doubles_c_when_halving_fails():
    # declared mu ten times too large: phases of 9 iterations stop halving
    q = DiagonalQuadratic.with_condition(100, 1, 20)
    x0 = np.random.default_rng(0).standard_normal(20)
    x, tr = restarted_minimize("agd", q.with_constants(mu=10.0), x0, 1e-6)
    lengths = list(collections.Counter(r.phase for r in tr).values())
    assert lengths == [9, 9, 9, 13, 18, 18, 18, 18, 18, 18, 18]
    # each length is ceil(sqrt(4 c L / mu)) for c = 2, 4, 8
    assert {math.ceil(math.sqrt(4 * c * 100 / 10)) for c in (2, 4, 8)} == set(lengths)


def test_regularized_constants():
    f = DiagonalQuadratic([1.0, 0.0])
    reg = RegularizedOracle(f, [1.0, 1.0], 0.2 / 1.0**2)
    assert reg.L == pytest.approx(1.2)
    assert reg.mu == pytest.approx(0.2)


def test_regularized_reduction_examples():
    x, tr = regularized_reduction(DiagonalQuadratic([1.0]), [0.0], 1.0, 1e-2)
    assert tr == [] and x[0] == 0.0
    lc = LogSumExp.log_cosh()
    assert lc.L == 1.0
    x, tr = regularized_reduction(lc.with_constants(keep_minimizer=False), [2.0], 2.0, 1e-2)
    assert lc.value(x) <= lc.value([0.0]) + 1e-2
    assert len(tr) == 57


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_regularized_flat_quadratic(eps):
    f = DiagonalQuadratic([1.0, 0.0])
    x, _ = regularized_reduction(f, [1.0, 1.0], 1.0, eps)
    assert f.value(x) <= eps


def test_regularized_rejects_bad_args():
    with pytest.raises(ValueError):
        regularized_reduction(Q10, [1.0, 1.0], 0.0, 1e-2)
    with pytest.raises(ValueError):
        regularized_reduction(Q10, [1.0, 1.0], 1.0, 0.0)


def test_finite_difference():
    assert finite_difference_check(DiagonalQuadratic([1.0]), [1.0]) <= 1e-8
    assert finite_difference_check(Q10, [1.0, 1.0]) <= 1e-6
    zero = FunctionOracle(lambda x: 0.0, lambda x: np.zeros_like(x), 3, 1.0)
    assert finite_difference_check(zero, np.ones(3)) == 0.0
    A = np.random.default_rng(0).standard_normal((5, 3))
    lse = LogSumExp(A)
    assert finite_difference_check(lse, np.array([0.1, -0.4, 0.3])) <= 1e-8


def test_inequality_slacks():
    rng = np.random.default_rng(1)
    slacks = inequality_slacks(DiagonalQuadratic.with_condition(10, 1, 5), rng)
    assert min(slacks.values()) >= -1e-10
    wrong = DiagonalQuadratic.with_condition(10, 1, 5).with_constants(L=5.0)
    assert inequality_slacks(wrong, rng)["smoothness"] < 0


def test_oracle_validation():
    with pytest.raises(ValueError):
        DiagonalQuadratic([-1.0])
    with pytest.raises(ValueError):
        DiagonalQuadratic([])
    with pytest.raises(ValueError):
        RegularizedOracle(Q10, [0, 0], 0.0)
    with pytest.raises(ValueError):
        run_subgradient(L1PlusQuadratic(), [1.0], 5, 0.0)
    with pytest.raises(ValueError):
        run_gd(Q10, [1.0, 1.0], -1)
