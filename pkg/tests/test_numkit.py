import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ginlab import _pykernels, numkit
from ginlab import _backend


def random_antisym(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a - a.T


def pf_by_matchings(a):
    """Sum over perfect matchings; exponential, only for tiny n."""
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for j in range(1, n):
        rest = [k for k in range(1, n) if k != j]
        sub = a[np.ix_(rest, rest)]
        total += (-1) ** (j + 1) * a[0, j] * pf_by_matchings(sub)
    return total


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_pfaffian_matches_matching_expansion(n):
    rng = np.random.default_rng(n)
    a = random_antisym(rng, n)
    got = numkit.pfaffian(a).value
    want = pf_by_matchings(a)
    assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_pfaffian_block_form_sign():
    # [[0, B], [-B^t, 0]] has Pf = (-1)^{n(n-1)/2} det B
    rng = np.random.default_rng(3)
    for n in range(1, 9):
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        m = np.block([[np.zeros((n, n)), b], [-b.T, np.zeros((n, n))]])
        want = (-1) ** (n * (n - 1) // 2) * np.linalg.det(b)
        assert abs(numkit.pfaffian(m).value - want) <= 1e-10 * max(1.0, abs(want))


def test_pfaffian_odd_is_zero_and_empty_is_one():
    a = random_antisym(np.random.default_rng(0), 5)
    assert numkit.pfaffian(a).value == 0
    assert numkit.pfaffian(np.zeros((0, 0))).value == 1


def test_pfaffian_rejects_non_antisymmetric_and_names_entry():
    a = random_antisym(np.random.default_rng(1), 4)
    a[2, 1] += 0.5
    with pytest.raises(numkit.LinalgError, match=r"A\[(1,2|2,1)\]"):
        numkit.pfaffian(a)


def test_pfaffian_survives_huge_scale():
    a = random_antisym(np.random.default_rng(2), 40) * 1e200
    r = numkit.pfaffian(a)
    assert np.isfinite(r.logscale) and r.logscale > 1000


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_pfaffian_squared_is_det(k, seed):
    rng = np.random.default_rng(seed)
    a = random_antisym(rng, 2 * k)
    pf = numkit.pfaffian(a)
    d = numkit.det(a)
    assert abs(2 * pf.logscale - d.logscale) <= 1e-9 * max(1.0, abs(d.logscale))
    assert abs(pf.mantissa ** 2 - d.mantissa) <= 1e-9


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_pfaffian_congruence(k, seed):
    rng = np.random.default_rng(seed)
    n = 2 * k
    a = random_antisym(rng, n)
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert numkit.pfaffian_congruence_check(b, a, rtol=1e-8)


def test_compiled_and_fallback_pfaffians_agree():
    rng = np.random.default_rng(7)
    stack = np.stack([random_antisym(rng, 12) for _ in range(20)])
    m1, l1 = _backend.pfaffian_batch(stack)
    m2, l2 = _pykernels.pfaffian_batch(stack)
    v1 = m1 * np.exp(l1)
    v2 = m2 * np.exp(l2)
    assert np.allclose(v1, v2, rtol=1e-11, atol=0)


def test_pair_conjugates_backends_agree():
    rng = np.random.default_rng(8)
    top = rng.standard_normal(30) + 1j * np.abs(rng.standard_normal(30)) + 0.01j
    ev = rng.permutation(np.concatenate([top, top.conj()]))
    p1, ok1 = _backend.pair_conjugates(ev, 1e-9)
    p2, ok2 = _pykernels.pair_conjugates(ev, 1e-9)
    assert ok1 and ok2
    assert np.allclose(ev[p1], ev.conj()) and np.allclose(ev[p2], ev.conj())


def test_det_logscaled_and_singular():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    assert abs(numkit.det(a).value - np.linalg.det(a)) <= 1e-10 * abs(np.linalg.det(a))
    assert numkit.det(np.zeros((3, 3))).value == 0


@pytest.mark.parametrize("p,q,m,n", [(2, 3, 4, 1), (3, 3, 2, 2), (1, 2, 3, 4)])
def test_tensor_swap_permutation(p, q, m, n):
    rng = np.random.default_rng(p * 100 + m)
    a = rng.standard_normal((p, q))
    b = rng.standard_normal((m, n))
    ab = numkit.kron(a, b)
    perm_r = numkit.tensor_swap_permutation(p, m)
    perm_c = numkit.tensor_swap_permutation(q, n)
    assert np.array_equal(ab[perm_r][:, perm_c], numkit.kron(b, a))
    inv = numkit.tensor_swap_permutation(m, p)
    assert np.array_equal(perm_r[inv], np.arange(p * m))


def test_eigenvalues_of_triangular_matrix():
    t = np.triu(np.arange(1, 26).reshape(5, 5)).astype(complex)
    assert np.allclose(np.sort_complex(numkit.eigenvalues(t)), np.arange(1, 26, 6))


def test_hermitian_sqrt_and_indefinite():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    h = g @ g.conj().T
    s = numkit.hermitian_sqrt(h)
    assert np.allclose(s @ s, h, atol=1e-10)
    with pytest.raises(numkit.LinalgError):
        numkit.hermitian_sqrt(np.diag([1.0, -1.0]))


def test_quaternion_form():
    rng = np.random.default_rng(6)
    x1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x2 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    q = numkit.quaternion_from_blocks(x1, x2)
    assert numkit.is_quaternion(q)
    assert not numkit.is_quaternion(q + np.eye(6) * 1j)
    # eigenvalues of a quaternion matrix come in conjugate pairs
    ev = numkit.eigenvalues(q)
    gap = np.abs(ev[:, None] - ev.conj()[None, :]).min(axis=1)
    assert gap.max() <= 1e-9
    j = numkit.quaternion_j(3)
    assert np.allclose(j @ j, -np.eye(6))


def test_logscaled_mean_matches_plain_mean():
    rng = np.random.default_rng(9)
    vals = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    mant = vals / np.abs(vals)
    logs = np.log(np.abs(vals)) + 700.0
    mean, _, _, shift = numkit.logscaled_mean(mant, logs)
    got = mean * math.exp(shift - 700.0)
    assert abs(got - vals.mean()) <= 1e-12 * max(1.0, abs(vals.mean()))


@pytest.mark.parametrize("n", [2, 4, 6, 10])
def test_pfaffian_of_upper_ones_is_one(n):
    a = np.triu(np.ones((n, n)), 1)
    a = a - a.T
    assert numkit.pfaffian(a).value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("flag,compiled", [("1", False), ("0", None)])
def test_backend_selection_from_environment(flag, compiled):
    env = dict(os.environ, GINLAB_PURE_PYTHON=flag)
    code = "import ginlab, ginlab._backend as b; print(ginlab.COMPILED, b.kernels.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    if compiled is False:
        assert out == ["False", "ginlab._pykernels"]
    else:
        assert out[1] == ("ginlab._ckernels" if out[0] == "True" else "ginlab._pykernels")
