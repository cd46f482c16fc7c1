import math

import numpy as np
import pytest

from ginlab import duality, sampler


def ginue_charpoly_moment(n, z, w, tau):
    """E det(z - X) conj det(w - X) for X with i.i.d. entries of variance tau/n."""
    s = tau / n
    return sum(math.factorial(n) / math.factorial(k) * s ** (n - k) * (z * np.conj(w)) ** k for k in range(n + 1))


def test_scalar_case_matches_closed_form():
    z, w, x0, tau = 0.4 + 0.3j, -0.2 + 0.5j, 0.1 - 0.2j, 1.0
    case = duality.DualityCase(2, 1, (1, 1), np.diag([z, np.conj(w)]), x0=np.array([[x0]]),
                               budget=40_000, seed=1)
    rep = duality.verify_duality(case)
    want = (z - x0) * np.conj(w - x0) + tau
    assert rep.passed
    for est in (rep.lhs, rep.rhs):
        assert abs(est.mean.real - want.real) <= 4 * est.se_real + 1e-12
        assert abs(est.mean.imag - want.imag) <= 4 * est.se_imag + 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_charpoly_both_sides_match_exact_moment(n):
    z, w = 0.6 + 0.2j, 0.3 - 0.4j
    cp = duality.make_charpoly(2, n, [z], [w], budget=40_000, seed=n)
    rep = duality.verify_charpoly(cp)
    want = ginue_charpoly_moment(n, z, w, 1.0)
    assert rep.passed
    for est in (rep.lhs, rep.rhs):
        assert abs(est.mean - want) <= 4 * est.standard_error + 1e-12


@pytest.mark.parametrize("beta,k", [(1, 2), (4, 1)])
def test_small_duality_cases_pass(beta, k):
    rng = np.random.default_rng(beta)
    n = 2
    dim = 2 * n * k if beta == 4 else n * k
    a = np.diag(rng.uniform(-0.8, 0.8, dim) + (1j * rng.uniform(-0.5, 0.5, dim) if beta != 1 else 0))
    if beta == 4:
        d = np.diag(a)[: n * k]
        a = np.diag(np.concatenate([d, d.conj()]))
    case = duality.DualityCase(beta, n, k, a, budget=30_000, seed=5)
    assert duality.verify_duality(case).passed


def test_reports_are_deterministic():
    case = duality.DualityCase(2, 2, (1, 1), np.diag([0.3, 0.1, -0.2, 0.5]), budget=5000, seed=9)
    a = duality.verify_duality(case).to_dict()
    b = duality.verify_duality(case).to_dict()
    assert a == b


def test_wrong_observable_is_detected():
    # shifting the X-side mean breaks the identity; the check must notice
    case = duality.DualityCase(2, 1, (1, 1), np.diag([0.4, 0.2]), budget=20_000, seed=2)
    bad = duality.DualityCase(2, 1, (1, 1), np.diag([0.4, 0.2]), x0=np.array([[0.5]]), budget=20_000, seed=2)

    def left(c, tag):
        return duality._x_side(bad, tag, lambda x: duality.q_batch(bad, x, bad.y0))

    rep = duality._run(case, left, lambda c, tag: duality._y_side(c, tag), 3.0, False)
    assert not rep.passed


def test_dual_kind_per_beta():
    assert sampler.DUAL_KIND == {1: "antisymmetric", 2: "rectangular", 4: "symmetric"}


def test_case_validation():
    with pytest.raises(ValueError):
        duality.DualityCase(2, 2, (1, 1), np.eye(3))
    with pytest.raises(ValueError):
        duality.DualityCase(1, 2, 1, np.eye(2), x0=1j * np.eye(2))
    case = duality.DualityCase(2, 1, (1, 1), np.eye(2), budget=10)
    with pytest.raises(ValueError):
        duality.verify_duality(case)
