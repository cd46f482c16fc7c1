"""Edge limit kernels and the predicted scaled correlation functions.

Two kernels appear at the spectral edge of the deformed Ginibre ensembles:

* ``k_edge(t, z, w)``, the determinantal kernel of the complex and
  quaternion ensembles at a non-real edge point, and
* ``k_edge_real(t, z, w)``, the antisymmetric kernel entering the Pfaffian
  at the real edge points +-1 of the quaternion ensemble.

``t`` is the number of Jordan blocks of the perturbation sitting exactly at
the edge point. All kernel functions broadcast over array arguments.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import numkit, specialfn

_AMP = math.sqrt(2.0 / math.pi)


class ConsistencyError(RuntimeError):
    """An assembled kernel matrix lost a structural property it must have."""


@dataclass(frozen=True)
class EdgeFrame:
    """Zoom frame at an edge point ``z0`` (|z0| = 1).

    ``zhat = scale * (lam - z0) / z0`` with ``scale = sqrt(N)`` for beta = 2
    and ``sqrt(2N)`` for beta = 4.
    """

    z0: complex
    beta: int
    t: int

    def __post_init__(self):
        object.__setattr__(self, "z0", complex(self.z0))
        if abs(abs(self.z0) - 1.0) > 1e-12:
            raise ValueError(f"edge point must lie on the unit circle, |z0| = {abs(self.z0):.15g}")
        if self.beta not in (2, 4):
            raise ValueError(f"edge kernels exist for beta = 2 or 4, got {self.beta}")
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")

    @property
    def real_edge(self):
        return self.beta == 4 and abs(self.z0.imag) < 1e-12

    def scale(self, n):
        return math.sqrt(2.0 * n if self.beta == 4 else float(n))

    def to_zhat(self, lam, n):
        return self.scale(n) * (np.asarray(lam) - self.z0) / self.z0

    def from_zhat(self, zhat, n):
        return self.z0 + self.z0 * np.asarray(zhat) / self.scale(n)


def _as_c(x):
    return np.asarray(x, dtype=np.complex128)


def k_edge(t, z, w):
    """K_t(z, w) for integer t >= 0; Hermitian, K_t(z, w) = conj K_t(w, z)."""
    t = int(t)
    if t < 0:
        raise specialfn.DomainError(f"t must be nonnegative, got {t}")
    scalar = np.ndim(z) == 0 and np.ndim(w) == 0
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    s1 = -2.0 * z.real
    s2 = -2.0 * w.real
    zeta = z + w.conj()
    specialfn.check_domain(np.stack([s1 + 0j, s2 + 0j, zeta]))
    # sqrt(IE(s1) IE(s2)) exp(zeta^2/2) IE(zeta) written with scaled E = exp(x^2/2) IE
    e1 = specialfn.ie_scaled_all(t, s1 + 0j)[..., t].real
    e2 = specialfn.ie_scaled_all(t, s2 + 0j)[..., t].real
    et = specialfn.ie_scaled_all(t, zeta)[..., t + 1]
    out = _AMP * math.factorial(t) * np.exp(-0.25 * (s1 * s1 + s2 * s2)) * np.sqrt(e1 * e2) * et
    return complex(out) if scalar else out


def k_diagonal(t, z):
    """K_t(z, z), real and depending on Re z only."""
    x = np.asarray(z, dtype=np.complex128).real
    scalar = np.ndim(z) == 0
    s = -2.0 * x
    specialfn.check_domain(s + 0j)
    e_lo = specialfn.ie_scaled_all(t, s + 0j)[..., t].real
    e_hi = specialfn.ie_scaled_all(t, -s + 0j)[..., t + 1].real
    out = _AMP * math.factorial(t) * np.exp(-0.5 * s * s) * e_lo * e_hi
    return float(out) if scalar else out


def k_edge_real(t, z, w):
    """K^(re)_t(z, w): amplitude sqrt(IE_{2t-1}(-2 Re z) IE_{2t-1}(-2 Re w)) times f_t(z, w)."""
    t = int(t)
    if t < 0:
        raise specialfn.DomainError(f"t must be nonnegative, got {t}")
    scalar = np.ndim(z) == 0 and np.ndim(w) == 0
    z, w = np.broadcast_arrays(_as_c(z), _as_c(w))
    a1 = specialfn.ie(2 * t - 1, -2.0 * z.real + 0j).real
    a2 = specialfn.ie(2 * t - 1, -2.0 * w.real + 0j).real
    out = np.sqrt(a1 * a2) * specialfn.f_kernel(t, z, w)
    return complex(out) if scalar else out


def ue_gram(t, points):
    """Gram matrix [K_t(z_i, z_j)]."""
    p = _as_c(points).ravel()
    return k_edge(t, p[:, None], p[None, :])


def _det_real(g):
    d = numkit.det(g).value
    scale = max(1.0, float(np.abs(np.diag(g)).prod()))
    if abs(d.imag) > 1e-9 * scale:
        raise ConsistencyError(f"Gram determinant has imaginary part {d.imag:.3e}")
    return d.real


def predict_correlation_ue(frame, points):
    """det[K_t(z_i / z0, z_j / z0)], the scaled n-point function."""
    p = _as_c(points).ravel() / frame.z0
    if p.size == 0:
        return 1.0
    return _det_real(ue_gram(frame.t, p))


def se_block_matrix(t, points):
    """2n x 2n antisymmetric matrix with 2x2 blocks
    [[K(z_i, z_j), K(z_i, conj z_j)], [K(conj z_i, z_j), K(conj z_i, conj z_j)]].
    """
    p = _as_c(points).ravel()
    n = p.size
    both = np.empty(2 * n, dtype=np.complex128)
    both[0::2] = p
    both[1::2] = p.conj()
    return k_edge_real(t, both[:, None], both[None, :])


def predict_correlation_se(frame, points):
    """Scaled n-point function of the quaternion ensemble.

    At the real edges z0 = +-1 it is prod_k (conj z_k - z_k)/z0 times the
    Pfaffian of ``se_block_matrix``; at an edge point with Im z0 > 0 it is
    the same determinant as the complex ensemble.
    """
    if frame.beta != 4:
        raise ValueError("predict_correlation_se needs a beta = 4 frame")
    p = _as_c(points).ravel() / frame.z0
    if p.size == 0:
        return 1.0
    if not frame.real_edge:
        if frame.z0.imag <= 0:
            raise ValueError("complex-edge mode needs Im z0 > 0")
        return _det_real(ue_gram(frame.t, p))
    m = se_block_matrix(frame.t, p)
    try:
        numkit.check_antisymmetric(m, rtol=1e-8)
    except numkit.LinalgError as exc:
        raise ConsistencyError(str(exc)) from exc
    pf = numkit.pfaffian(m, rtol=1e-8).value
    val = np.prod(p.conj() - p) * pf
    return float(val.real)


def density(frame, zhat):
    """Vectorized one-point prediction at scaled points ``zhat``."""
    z = _as_c(zhat) / frame.z0
    if frame.beta == 2 or not frame.real_edge:
        return k_diagonal(frame.t, z)
    t = frame.t
    amp = specialfn.ie(2 * t - 1, -2.0 * z.real + 0j).real
    f = specialfn.f_kernel(t, z, z.conj())
    return np.real((z.conj() - z) * amp * f)


def clamp(values, tol=1e-9):
    """Zero out tiny negative round-off, for display only."""
    v = np.asarray(values, dtype=float)
    return np.where((v < 0) & (v > -tol), 0.0, v)


def write_grid_csv(path, frame, re_values, im_values=(0.0,)):
    """Write ``re_zhat, im_zhat, prediction`` on the tensor grid."""
    re_values = np.asarray(re_values, dtype=float)
    im_values = np.asarray(im_values, dtype=float)
    rr, ii = np.meshgrid(re_values, im_values, indexing="ij")
    pred = clamp(density(frame, rr + 1j * ii))
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re_zhat", "im_zhat", "prediction"])
        for a, b, c in zip(rr.ravel(), ii.ravel(), pred.ravel()):
            wr.writerow([f"{a:.10g}", f"{b:.10g}", f"{c:.17g}"])
    return pred
