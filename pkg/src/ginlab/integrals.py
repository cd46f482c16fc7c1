"""Limiting matrix integral I^(2) and the finite-N one-point identity.

``eval_I2_mc`` integrates over n x n complex Y by importance sampling and
``eval_I2_closed`` evaluates the determinant reduction of the same integral.
``verify_prop13_scalar`` checks the integral representation of the GinUE
one-point function for a rank-one mean against direct sampling.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import sampler, specialfn
from .duality import CHUNK, MCEstimate


class EffectiveSampleWarning(RuntimeWarning):
    pass


class QuadratureError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(f"{message}; refinement trace: {trace}")
        self.trace = trace


# Integrals carried as documentation only. Each entry records the integration
# space and integrand shape; none is evaluated by this package.
DOCUMENTED_ONLY = {
    "I4": "K1 x K1 complex symmetric Y; quaternion analogue of I2 with a Pfaffian-type weight",
    "I4_real": "real-edge quaternion analogue of I4 with the extra real-axis factor",
    "I2_outlier": "supercritical integral with det^alpha(Y*Y) exp(-a Tr YY*) and products of 2x2 block dets",
    "I2_tilde": "row-wise radial integral over n x t matrices Q, reduces to IE_{t-1}",
    "I4_tilde_real": "real-edge quaternion row-wise integral",
}


@dataclass(frozen=True)
class MatrixIntegralSpec:
    """Points ``zhat`` (length n), Jordan count ``t``, edge point ``z0``.

    Only the case with all phases zero and P = identity is evaluated.
    """

    n: int
    t: int
    points: tuple
    z0: complex = 1.0
    budget: int = 1_000_000
    seed: int = 0
    phi: tuple = None
    width: float = None

    def __post_init__(self):
        pts = tuple(complex(p) for p in np.atleast_1d(self.points))
        object.__setattr__(self, "points", pts)
        if len(pts) != self.n:
            raise ValueError(f"expected {self.n} points, got {len(pts)}")
        if not 1 <= self.n <= 3 or not 0 <= self.t <= 3:
            raise ValueError("desk-scale caps are n <= 3 and 0 <= t <= 3")
        if self.phi is not None and any(p != 0 for p in self.phi):
            raise ValueError("only zero phases are supported")
        if abs(abs(complex(self.z0)) - 1) > 1e-12:
            raise ValueError("z0 must lie on the unit circle")

    @property
    def rotated(self):
        return np.asarray(self.points) / complex(self.z0)


def _proposal_width(spec):
    x = float(np.min(spec.rotated.real))
    peak = (-2 * x + math.sqrt(4 * x * x + 4 * spec.t)) / 2
    return math.sqrt(max(1.0, peak + 1.0))


def _log_integrand(y, zr, t):
    """log of det(Y*Y)^t exp(-Tr(YY*)^2/2 - Tr(Z Y*Y) - Tr(Z* YY*))."""
    yh = np.swapaxes(y.conj(), 1, 2)
    outer = y @ yh
    inner = yh @ y
    quart = np.einsum("mij,mij->m", outer, outer.conj()).real
    lin = np.einsum("i,mii->m", zr, inner) + np.einsum("i,mii->m", zr.conj(), outer)
    out = -0.5 * quart - lin
    if t:
        _, logdet = np.linalg.slogdet(y)
        out = out + 2 * t * logdet
    return out


def eval_I2_mc(spec):
    """Importance-sampled estimate of I^(2) with a complex Gaussian proposal.

    The integral is real; Y and Y* contribute conjugate integrands with the
    same proposal weight, so the real part of each weight is kept.
    """
    n = spec.n
    zr = spec.rotated
    s = spec.width or _proposal_width(spec)
    norm = n * n * math.log(math.pi * s * s)
    weights = []
    done = c = 0
    while done < spec.budget:
        m = min(CHUNK * 10, spec.budget - done)
        rng = sampler.stream(spec.seed, "i2", c)
        y = s * sampler.complex_normal(rng, (m, n, n))
        logq = -norm - np.sum(np.abs(y) ** 2, axis=(1, 2)) / (s * s)
        weights.append(np.exp(_log_integrand(y, zr, spec.t) - logq).real)
        done += m
        c += 1
    w = np.concatenate(weights)
    ess = w.sum() ** 2 / np.sum(w * w) if np.any(w) else 0.0
    if ess < w.size / 100:
        warnings.warn(
            f"effective sample size {ess:.0f} of {w.size}; try a proposal width other than {s:.3g}",
            EffectiveSampleWarning,
        )
    return MCEstimate(complex(w.mean()), float(w.std(ddof=1) / math.sqrt(w.size)), 0.0, int(w.size))


def eval_I2_closed(spec):
    """Determinant reduction of I^(2) at coincident Z and W."""
    z = spec.rotated
    n, t = spec.n, spec.t
    for i in range(n):
        for j in range(i):
            if abs(z[i] - z[j]) < 1e-8:
                raise ValueError(f"points {j} and {i} coincide; the reduction is singular there")
    s = z[:, None] + z.conj()[None, :]
    gram = (
        math.factorial(t)
        * np.exp(-0.5 * (np.abs(z[:, None]) ** 2 + np.abs(z[None, :]) ** 2) + z[:, None] * z.conj()[None, :])
        * specialfn.ie(t, s)
    )
    det = np.linalg.det(np.atleast_2d(gram)).real
    vdm = 1.0
    for i in range(n):
        for j in range(i):
            vdm *= abs(z[i] - z[j]) ** 2
    pref = (2 * math.pi) ** (n / 2) * math.pi ** (n * n) * math.exp(0.5 * float(np.sum((2 * z.real) ** 2)))
    return pref * det / vdm


# --- one-point identity for a rank-one mean --------------------------------------

def _c_const(n_size):
    """C_N at n = r = 1."""
    return (
        math.pi ** 2
        / n_size
        * math.exp(-(n_size - 1) * math.log(n_size - 1) + math.lgamma(n_size - 1))
    )


def ginue_density(z, n_size):
    """Undeformed GinUE one-point function (N/pi) e^{-N|z|^2} sum_{k<N} (N|z|^2)^k / k!."""
    x = n_size * abs(z) ** 2
    return n_size / math.pi * math.exp(-x) * sum(x ** k / math.factorial(k) for k in range(n_size))


def _disk_rule(radius, n_rad=4, n_ang=8):
    """Area-uniform cubature on a disk: Gauss-Legendre in r^2, trapezoid in angle."""
    x, w = np.polynomial.legendre.leggauss(n_rad)
    r = radius * np.sqrt(0.5 * (x + 1))
    th = 2 * math.pi * np.arange(n_ang) / n_ang
    pts = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    wts = np.repeat(0.5 * w / n_ang, n_ang)
    return pts, wts


def _radial_nodes(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1), 0.5 * w


def _rhs_at(z, a, n_size, spectra, nodes_start=32, tol=1e-3, max_nodes=1024):
    """Radial quadrature of the one-point integrand with shared inner draws.

    ``spectra`` holds the eigenvalues of each inner draw G and of its
    trailing minor, so det(w - A - G) = det(w - G) - a det((w - G)[1:, 1:])
    is a pair of products. Returns per-sample quadrature sums: their mean
    estimates the one-point function and their spread its standard error.
    """
    m = n_size - 1
    w = math.sqrt(n_size / m) * z
    full, minor = spectra
    d0 = np.prod(w - full, axis=1)
    d1 = np.prod(w - minor, axis=1)
    pref = math.pi / _c_const(n_size) * math.exp(-n_size * abs(z) ** 2)
    slope = 2 * (np.conj(z) * a).real - abs(a) ** 2
    trace = []
    prev = None
    k = nodes_start
    while k <= max_nodes:
        u, wu = _radial_nodes(k)
        atil = math.sqrt(n_size / m) * (1 - u) * a
        base = wu * (1 - u) ** (n_size - 2) * np.exp(n_size * slope * u)
        vals = np.abs(d0[:, None] - atil[None, :] * d1[:, None]) ** 2
        per = pref * (vals @ base)
        est = float(per.mean())
        trace.append((k, est))
        if prev is not None and abs(est - prev) <= tol * abs(est):
            return per, trace
        prev = est
        k *= 2
    raise QuadratureError("radial quadrature did not settle", trace)


@dataclass
class Prop13Report:
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    rhs_point: float
    zscore: float
    passed: bool
    disk_radius: float
    trace: list = field(default_factory=list)

    def to_dict(self):
        return {
            "lhs": self.lhs, "lhs_se": self.lhs_se, "rhs": self.rhs, "rhs_se": self.rhs_se,
            "rhs_point": self.rhs_point, "zscore": self.zscore, "pass": self.passed,
            "disk_radius": self.disk_radius, "refinement": self.trace,
        }


def verify_prop13_scalar(a, z, n_size, budget=100_000, seed=0, disk_radius=0.15, threshold=3.0):
    """Direct-sampling density of GinUE_N(diag(a, 0)) near ``z`` against the
    integral representation with an inner GinUE_{N-1} expectation.

    The direct route counts eigenvalues in a disk of ``disk_radius`` around
    ``z``; the integral route is averaged over the same disk so neither side
    carries a smoothing bias.
    """
    a = complex(a)
    z = complex(z)
    if not 6 <= n_size <= 12:
        raise ValueError("N must lie between 6 and 12")
    if abs(a) > 2:
        raise ValueError("|a| must be at most 2")
    if budget < 1000:
        raise ValueError("sample budget must be at least 1000")

    m = n_size - 1
    noise = np.concatenate([
        math.sqrt(1.0 / m) * sampler.noise_batch(2, m, sampler.stream(seed, "prop13-inner", c), min(CHUNK, budget - c * CHUNK))
        for c in range(math.ceil(budget / CHUNK))
    ])
    spectra = (np.linalg.eigvals(noise), np.linalg.eigvals(noise[:, 1:, 1:]))
    pts, wts = _disk_rule(disk_radius)
    per = np.zeros(budget)
    trace = []
    for p, wt in zip(pts, wts):
        vals, tr = _rhs_at(z + p, a, n_size, spectra)
        per += wt * vals
        trace.append(tr[-1][0])
    point, _ = _rhs_at(z, a, n_size, spectra)
    rhs = float(per.mean())
    rhs_se = float(per.std(ddof=1) / math.sqrt(budget))

    x0 = np.zeros((n_size, n_size), dtype=np.complex128)
    x0[0, 0] = a
    counts = []
    done = c = 0
    while done < budget:
        k = min(CHUNK, budget - done)
        x = sampler.deformed_batch(2, n_size, 1.0, x0, None, None, sampler.stream(seed, "prop13-direct", c), k)
        ev = np.linalg.eigvals(x)
        counts.append(np.sum(np.abs(ev - z) < disk_radius, axis=1))
        done += k
        c += 1
    counts = np.concatenate(counts).astype(float)
    area = math.pi * disk_radius ** 2
    lhs = float(counts.mean() / area)
    lhs_se = float(counts.std(ddof=1) / math.sqrt(budget) / area)
    zs = abs(lhs - rhs) / math.hypot(lhs_se, rhs_se)
    return Prop13Report(lhs, lhs_se, rhs, rhs_se, float(point.mean()), zs, zs <= threshold, disk_radius, trace)
