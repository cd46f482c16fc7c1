"""Repeated erfc integrals and the double-integral kernel ingredient.

``ie(n, z)`` is the normalized repeated integral of the complementary error
function,

    IE_n(z) = 1 / (sqrt(2 pi) Gamma(n+1)) * int_0^inf v^n exp(-(v+z)^2/2) dv,

with IE_{-1}(z) = exp(-z^2/2)/sqrt(2 pi). For integer n, IE_n(z) equals
2^{n/2-1} i^n erfc(z/sqrt 2).

``ie_scaled(n, z) = exp(z^2/2) IE_n(z)`` is the numerically convenient
form used by the kernels; it is bounded for Re z >= 0.
"""

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

RE_MAX = 30.0
IM_MAX = 10.0
SERIES_RADIUS = 4.0


class DomainError(ValueError):
    """Argument outside the validated domain."""


@lru_cache(maxsize=64)
def _leggauss01(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _check_order(n):
    if n < -1:
        raise DomainError(f"order n = {n} < -1")
    if n != -1 and n <= -1:
        raise DomainError(f"order n = {n} must be > -1 or exactly -1")


def _is_int(n):
    return float(n).is_integer()


def check_domain(z):
    z = np.asarray(z, dtype=np.complex128)
    bad = (np.abs(z.real) > RE_MAX) | (np.abs(z.imag) > IM_MAX)
    if bad.any():
        zz = z[bad].ravel()[0] if z.ndim else complex(z)
        raise DomainError(
            f"z = {zz} outside the validated domain |Re z| <= {RE_MAX}, |Im z| <= {IM_MAX}"
        )


# --- series -----------------------------------------------------------------

@lru_cache(maxsize=64)
def _series_coeffs(n, kmax):
    # c_k = 2^{-1-n/2} (-sqrt 2)^k / (k! Gamma(1 + (n-k)/2))
    k = np.arange(kmax + 1)
    rg = special.rgamma(1.0 + 0.5 * (n - k))
    logmag = k * math.log(SQRT2) - special.gammaln(k + 1) - (1.0 + 0.5 * n) * math.log(2.0)
    return np.exp(logmag) * np.where(k % 2, -1.0, 1.0) * rg


def ie_series(n, z, kmax=220):
    """Power series in z; accurate for |z| <= 4 (usable to |z| ~ 6)."""
    _check_order(n)
    z = np.asarray(z, dtype=np.complex128)
    if n == -1:
        return np.exp(-0.5 * z * z) / SQRT2PI
    c = _series_coeffs(float(n), kmax)
    flat = z.ravel()
    powers = flat[:, None] ** np.arange(kmax + 1)[None, :]
    return (powers * c[None, :]).sum(axis=1).reshape(z.shape)


# --- quadrature -------------------------------------------------------------

def _hermite_poly(k, z):
    """P_k(z) = E[(G - z)^k] / k! for G standard normal (integer k >= 0)."""
    out = np.zeros_like(z, dtype=np.complex128)
    for j in range(0, k + 1, 2):
        mom = special.factorial2(j - 1, exact=True) if j else 1
        out += math.comb(k, j) * mom * (-z) ** (k - j)
    return out / math.factorial(k)


def _scaled_quad_right(kmax, z):
    """E_k(z) = exp(z^2/2) IE_k(z) for k = 0..kmax and Re z >= 0.

    Gauss-Legendre along the ray r = rho e^{i alpha}, rotated against
    arg z (|alpha| <= 0.7 keeps the Gaussian factor decaying) so the
    integrand of r^k exp(-r^2/2 - r z) / (sqrt(2 pi) k!) does not
    oscillate much when Im z is large.
    """
    z = np.asarray(z, dtype=np.complex128).ravel()
    arg = np.angle(z)
    alpha = -np.clip(arg, -0.7, 0.7)
    rot = np.exp(1j * alpha)
    c2 = np.cos(2 * alpha)
    lin = np.abs(z) * np.cos(alpha + arg)
    target = 46.0 + 3.0 * kmax
    length = (-lin + np.sqrt(lin * lin + 2.0 * c2 * target)) / c2
    phase = 0.5 * length**2 * np.abs(np.sin(2 * alpha)) + length * np.abs(z) * np.abs(np.sin(alpha + arg))
    m = int(min(1200, 64 + 2 * math.ceil(float(phase.max(initial=0.0)))))
    x, w = _leggauss01(m)
    r = (length * rot)[:, None] * x[None, :]
    base = np.exp(-0.5 * r * r - r * z[:, None]) * (w[None, :] * (length * rot)[:, None])
    out = np.empty((z.size, kmax + 1), dtype=np.complex128)
    pw = np.ones_like(r)
    for k in range(kmax + 1):
        out[:, k] = (base * pw).sum(axis=1) / (SQRT2PI * math.factorial(k))
        pw = pw * r
    return out


def ie_scaled_all(kmax, z):
    """E_k(z) = exp(z^2/2) IE_k(z) for integer k = -1..kmax.

    Returns an array of shape ``z.shape + (kmax + 2,)``; slot 0 is k = -1.
    Re z < 0 goes through the reflection
    E_k(z) = exp(z^2/2) P_k(z) - (-1)^k E_k(-z).
    """
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    out = np.empty((flat.size, kmax + 2), dtype=np.complex128)
    out[:, 0] = 1.0 / SQRT2PI
    if kmax >= 0:
        right = flat.real >= 0
        if right.any():
            out[right, 1:] = _scaled_quad_right(kmax, flat[right])
        left = ~right
        if left.any():
            zl = flat[left]
            refl = _scaled_quad_right(kmax, -zl)
            g = np.exp(0.5 * zl * zl)
            for k in range(kmax + 1):
                sign = -1.0 if k % 2 else 1.0
                out[left, k + 1] = g * _hermite_poly(k, zl) - sign * refl[:, k]
    return out.reshape(z.shape + (kmax + 2,))


def ie_scaled(n, z):
    """exp(z^2/2) IE_n(z) for integer n >= -1."""
    _check_order(n)
    if not _is_int(n):
        z = np.asarray(z, dtype=np.complex128)
        return np.exp(0.5 * z * z) * ie(n, z)
    n = int(n)
    return ie_scaled_all(n, z)[..., n + 1]


def _ie_quad_integer(n, z):
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    out = np.empty(flat.size, dtype=np.complex128)
    right = flat.real >= 0
    if right.any():
        zr = flat[right]
        out[right] = np.exp(-0.5 * zr * zr) * _scaled_quad_right(n, zr)[:, n]
    left = ~right
    if left.any():
        zl = flat[left]
        sign = -1.0 if n % 2 else 1.0
        tail = np.exp(-0.5 * zl * zl) * _scaled_quad_right(n, -zl)[:, n]
        out[left] = _hermite_poly(n, zl) - sign * tail
    return out.reshape(z.shape)


def _ie_quad_general(n, z):
    """Adaptive quadrature for real n > -1 along a contour avoiding cancellation.

    The path runs from z vertically to Re z, then along the real axis; the
    v^n endpoint singularity is handled by the algebraic weight.
    """
    z = complex(z)
    x, y = z.real, z.imag
    norm = SQRT2PI * math.gamma(n + 1.0)

    def quad_c(f, lo, hi, **kw):
        re = integrate.quad(lambda s: f(s).real, lo, hi, limit=400, epsabs=0, epsrel=1e-13, **kw)[0]
        im = integrate.quad(lambda s: f(s).imag, lo, hi, limit=400, epsabs=0, epsrel=1e-13, **kw)[0]
        return complex(re, im)

    hi = max(-x, 0.0) + 40.0
    if y == 0:
        val = quad_c(lambda v: np.exp(-0.5 * (v + x) ** 2) + 0j, 0.0, hi, weight="alg", wvar=(n, 0.0))
        return val / norm
    # horizontal leg: int_0^inf (v - i y)^n exp(-(v + x)^2 / 2) dv
    horiz = quad_c(lambda v: (v - 1j * y) ** n * np.exp(-0.5 * (v + x) ** 2), 0.0, hi)
    # vertical leg from u = z down to u = x, with u - z = i (s - y)
    vert = quad_c(
        lambda s: (-1j * np.sign(y)) ** n * np.exp(-0.5 * (x + 1j * s) ** 2),
        min(0.0, y), max(0.0, y),
        weight="alg", wvar=(0.0, n) if y > 0 else (n, 0.0),
    )
    vert *= -1j if y > 0 else 1j
    return (horiz + vert) / norm


def ie(n, z, method="auto"):
    """IE_n(z) for real n >= -1 and complex z.

    ``method`` is ``"auto"`` (series for |z| <= 4, quadrature elsewhere),
    ``"series"`` or ``"quad"``. Accuracy on the validated domain is
    1e-10 * max(1, |IE_n(z)|).
    """
    _check_order(n)
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=np.complex128)
    check_domain(z)
    if n == -1:
        out = np.exp(-0.5 * z * z) / SQRT2PI
        return complex(out) if scalar else out
    if method not in ("auto", "series", "quad"):
        raise ValueError(f"unknown method {method!r}")
    out = np.empty(z.shape, dtype=np.complex128)
    if method == "series":
        use_series = np.ones(z.shape, dtype=bool)
    elif method == "quad":
        use_series = np.zeros(z.shape, dtype=bool)
    else:
        use_series = np.abs(z) <= SERIES_RADIUS
    if use_series.any():
        out[use_series] = ie_series(n, z[use_series])
    rest = ~use_series
    if rest.any():
        if _is_int(n):
            out[rest] = _ie_quad_integer(int(n), z[rest])
        else:
            out[rest] = [_ie_quad_general(float(n), zz) for zz in z[rest]]
    return complex(out) if scalar else out


def ie_recursion_check(n, z):
    """|IE_n(z) - int_0^inf IE_{n-1}(z + v) dv| with the integral by quadrature."""
    if n < 0:
        raise DomainError("the order-raising recursion needs n >= 0")
    z = complex(z)

    def part(fn):
        hi = max(0.0, -z.real) + 40.0
        return integrate.quad(
            lambda v: fn(ie(n - 1, min(z + v, complex(RE_MAX, z.imag), key=lambda c: c.real))),
            0.0, hi, limit=400, epsabs=1e-14, epsrel=1e-12,
        )[0]

    lhs = ie(n, z)
    rhs = complex(part(lambda c: c.real), part(lambda c: c.imag))
    return abs(lhs - rhs)


# --- f_n ----------------------------------------------------------------------

def _poly_in_r(n, v):
    """Coefficients a_k(v) of (r^2 + sqrt2 v r - v^2/2)^n in powers of r.

    Returns shape (len(v), 2n+1).
    """
    v = np.asarray(v, dtype=float)
    base = np.stack([-0.5 * v * v, SQRT2 * v, np.ones_like(v)], axis=1)
    out = np.zeros((v.size, 2 * n + 1))
    out[:, 0] = 1.0
    deg = 0
    for _ in range(n):
        new = np.zeros_like(out)
        for j in range(3):
            new[:, j:deg + j + 1] += out[:, :deg + 1] * base[:, j:j + 1]
        out = new
        deg += 2
    return out


def f_kernel(n, z, w, check=True):
    """f_n(z, w), the double integral

        (1/2pi) e^{(z+w)^2/2} int_0^inf e^{-v^2/2} sinh(v(z-w))
            int_{v/sqrt2}^inf (u^2-v^2)^n e^{-(u+z+w)^2/2} du dv.

    The inner integral is reduced exactly to a finite sum of IE_k at
    v/sqrt2 + z + w; the outer one uses Gauss-Legendre on a truncated
    range sized to the integrand's Gaussian decay.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"f_n needs a nonnegative integer order, got {n}")
    n = int(n)
    scalar = np.ndim(z) == 0 and np.ndim(w) == 0
    z, w = np.broadcast_arrays(np.asarray(z, dtype=np.complex128), np.asarray(w, dtype=np.complex128))
    if check and (np.abs(z).max(initial=0) > 8 or np.abs(w).max(initial=0) > 8):
        raise DomainError("f_kernel requires |z|, |w| <= 8")
    zf, wf = z.ravel(), w.ravel()
    s = zf + wf
    d = zf - wf
    growth = np.maximum(0.0, np.abs(d.real) - s.real / SQRT2)
    vmax = float(np.maximum(14.0, 2.0 * growth / 3.0 + 12.0).max(initial=14.0))
    osc = float((np.abs(d.imag) + np.abs(s.imag)).max(initial=0.0))
    m = int(min(1200, 160 + 2 * math.ceil(osc * vmax / math.pi)))
    x, wt = _leggauss01(m)
    v = vmax * x
    wt = vmax * wt
    c = v / SQRT2
    coeff = _poly_in_r(n, v)  # (m, 2n+1)
    fact = np.array([math.factorial(k) for k in range(2 * n + 1)], dtype=float)
    zeta = c[None, :] + s[:, None]  # (P, m)
    e_all = ie_scaled_all(2 * n, zeta)[..., 1:]  # (P, m, 2n+1), orders 0..2n
    inner = SQRT2PI * (e_all * (coeff * fact)[None, :, :]).sum(axis=2)
    inner *= np.exp(-0.25 * v * v)[None, :] * np.exp(-c[None, :] * s[:, None])
    outer = np.exp(-0.5 * v * v)[None, :] * np.sinh(v[None, :] * d[:, None]) * inner
    val = (outer * wt[None, :]).sum(axis=1) / (2.0 * math.pi)
    val = np.where(d == 0, 0.0, val)
    return complex(val[0]) if scalar else val.reshape(z.shape)
