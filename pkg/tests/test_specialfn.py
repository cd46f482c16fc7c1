import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from _oracles import F, IE
from ginlab import specialfn as sf


@pytest.mark.parametrize("key", sorted(IE, key=repr))
def test_ie_against_mpmath(key):
    n, z = key
    want = IE[key]
    assert abs(sf.ie(n, z) - want) <= 1e-10 * max(1.0, abs(want))


@pytest.mark.parametrize("n", [-1, 0, 1, 2, 3, 4, 5])
def test_series_and_quadrature_agree_on_annulus(n):
    rng = np.random.default_rng(n + 10)
    r = rng.uniform(2.0, 4.0, 40)
    z = r * np.exp(1j * rng.uniform(0, 2 * np.pi, 40))
    a = sf.ie(n, z, method="series")
    b = sf.ie(n, z, method="quad")
    assert np.all(np.abs(a - b) <= 1e-9 * np.maximum(1.0, np.abs(a)))


def test_ie0_at_zero_is_half():
    assert abs(sf.ie(0, 0.0) - 0.5) <= 1e-12


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_ie_matches_repeated_erfc_on_real_axis(n):
    # IE_n(x) = 2^{n/2 - 1} i^n erfc(x / sqrt 2); i^n erfc via its recurrence
    # 2n i^n erfc(y) = i^{n-2} erfc(y) - 2y i^{n-1} erfc(y)
    x = np.linspace(-3, 5, 17)
    y = x / math.sqrt(2)
    prev, cur = 2 / math.sqrt(math.pi) * np.exp(-y * y), special.erfc(y)
    for k in range(1, n + 1):
        prev, cur = cur, (prev - 2 * y * cur) / (2 * k)
    want = 2 ** (n / 2 - 1) * cur
    got = sf.ie(n, x + 0j).real
    assert np.all(np.abs(got - want) <= 1e-10 * np.maximum(1.0, np.abs(want)))


@pytest.mark.parametrize("n,z", [(1, 0.3), (2, -1.5 + 0.4j), (3, 2.2 - 1j), (5, 0.0)])
def test_order_raising_recursion(n, z):
    assert sf.ie_recursion_check(n, z) <= 1e-7


def test_fractional_order_against_gamma_integral():
    # int_0^inf v^{1/2} e^{-v^2/2} dv = 2^{-1/4} Gamma(3/4)
    want = 2 ** (0.75 - 1) * special.gamma(0.75) / (math.sqrt(2 * math.pi) * special.gamma(1.5))
    assert abs(sf.ie(0.5, 0.0) - want) <= 1e-10


def test_domain_errors():
    with pytest.raises(sf.DomainError):
        sf.ie(-2, 0.0)
    with pytest.raises(sf.DomainError):
        sf.ie(-1.5, 0.0)
    with pytest.raises(sf.DomainError):
        sf.ie(1, 40.0)
    with pytest.raises(sf.DomainError):
        sf.f_kernel(1, 9.0, 0.0)


@given(st.integers(0, 4), st.floats(-4, 4), st.floats(-4, 4))
def test_scaled_form_is_consistent(n, x, y):
    z = complex(x, y)
    assert abs(sf.ie_scaled(n, z) - np.exp(0.5 * z * z) * sf.ie(n, z)) <= 1e-9 * max(
        1.0, abs(sf.ie_scaled(n, z))
    )


@pytest.mark.parametrize("key", sorted(F, key=repr))
def test_f_kernel_against_mpmath(key):
    n, z, w = key
    want = F[key]
    assert abs(sf.f_kernel(n, z, w) - want) <= 1e-9 * max(1e-3, abs(want))


@given(
    st.integers(0, 3),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
)
def test_f_kernel_is_antisymmetric(n, z, w):
    a = sf.f_kernel(n, z, w)
    b = sf.f_kernel(n, w, z)
    assert abs(a + b) <= 1e-9 * max(1.0, abs(a))


def test_f0_against_brute_force_grid_sum():
    # midpoint sum of the defining double integral on a fine (u, v) grid
    z, w = 0.4 + 0.9j, -0.2 + 0.3j
    s, d = z + w, z - w
    h = 0.004
    v = (np.arange(int(9 / h)) + 0.5) * h
    u = (np.arange(int(14 / h)) + 0.5) * h - 5
    total = 0j
    for vk in v:
        uu = u[u >= vk / math.sqrt(2)]
        inner = np.exp(-0.5 * (uu + s) ** 2).sum() * h
        # half cell at the lower limit
        lo = vk / math.sqrt(2)
        first = uu[0] - 0.5 * h if uu.size else lo
        inner += (first - lo) * np.exp(-0.5 * (lo + s) ** 2)
        total += np.exp(-0.5 * vk * vk) * np.sinh(vk * d) * inner * h
    brute = np.exp(0.5 * s * s) * total / (2 * math.pi)
    assert abs(sf.f_kernel(0, z, w) - brute) <= 1e-5
