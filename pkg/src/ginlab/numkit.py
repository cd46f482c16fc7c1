"""Dense complex linear algebra: determinants, Pfaffians, Kronecker products,
Hermitian square roots and the eigenvalue contract.

Determinants and Pfaffians are returned log-scaled, ``value = mantissa *
exp(logscale)``, because the duality observables can leave double range.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend


class LinalgError(ValueError):
    """Raised when an input violates a numerical precondition."""


class EigenConvergenceError(RuntimeError):
    """Eigensolver failed; ``partial`` holds whatever was recovered."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial if partial is not None else np.empty(0, complex)


@dataclass(frozen=True)
class LogScaled:
    """A complex number stored as ``mantissa * exp(logscale)``."""

    mantissa: complex
    logscale: float

    @property
    def value(self):
        if self.mantissa == 0:
            return 0j
        return complex(self.mantissa * np.exp(self.logscale))


# Pfaffian results share the representation.
PfaffianResult = LogScaled


def as_matrix(m, name="matrix"):
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise LinalgError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError(f"{name} has non-finite entries")
    return a


def _square(a, name="matrix"):
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise LinalgError(f"{name} must be square, got shape {a.shape}")
    return a


def det(m):
    """Log-scaled determinant via pivoted LU (LAPACK ``getrf``)."""
    a = _square(m)
    if a.shape[0] == 0:
        return LogScaled(1.0 + 0j, 0.0)
    sign, logabs = np.linalg.slogdet(a)
    if sign == 0:
        return LogScaled(0j, 0.0)
    return LogScaled(complex(sign), float(logabs))


def det_batch(m):
    """Vectorized ``det`` over a stack; returns ``(mantissa, logscale)`` arrays."""
    a = np.asarray(m, dtype=np.complex128)
    sign, logabs = np.linalg.slogdet(a)
    logabs = np.where(sign == 0, 0.0, logabs)
    return sign.astype(np.complex128), logabs


def check_antisymmetric(a, rtol=1e-10):
    """Raise naming the worst entry pair if ``a`` is not antisymmetric (A = -A^t)."""
    scale = np.abs(a).max() if a.size else 0.0
    resid = np.abs(a + a.T)
    worst = resid.max() if a.size else 0.0
    if worst > rtol * max(scale, np.finfo(float).tiny):
        i, j = np.unravel_index(np.argmax(resid), resid.shape)
        raise LinalgError(
            f"matrix is not antisymmetric: |A[{i},{j}] + A[{j},{i}]| = {worst:.3e} "
            f"exceeds {rtol:g} * max|A| = {rtol * scale:.3e}"
        )


def pfaffian(m, rtol=1e-10):
    """Pfaffian of an antisymmetric matrix (transpose, not conjugate transpose).

    Skew Parlett-Reid elimination with partial pivoting, O(n^3). Odd
    dimension gives exactly zero.
    """
    a = _square(m)
    if a.shape[0] % 2 == 1:
        return LogScaled(0j, 0.0)
    check_antisymmetric(a, rtol)
    mant, logs = _scaled_pfaffians(a[None])
    return LogScaled(complex(mant[0]), float(logs[0]))


def _scaled_pfaffians(a):
    # Pf(cA) = c^{n/2} Pf(A): normalize so elimination products cannot overflow
    n = a.shape[1]
    scale = np.abs(a).max(axis=(1, 2)) if n else np.ones(a.shape[0])
    scale = np.where(scale > 0, scale, 1.0)
    mant, logs = _backend.pfaffian_batch(np.ascontiguousarray(a / scale[:, None, None]))
    logs = np.where(mant != 0, logs + 0.5 * n * np.log(scale), logs)
    return mant, logs


def pfaffian_batch(m, rtol=1e-10, check=True):
    """Pfaffians of a stack ``(B, n, n)``; returns ``(mantissa, logscale)``."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise LinalgError(f"expected a stack of square matrices, got shape {a.shape}")
    if check and a.shape[0]:
        resid = np.abs(a + np.swapaxes(a, 1, 2)).max(axis=(1, 2))
        scale = np.abs(a).max(axis=(1, 2))
        bad = resid > rtol * np.maximum(scale, np.finfo(float).tiny)
        if bad.any():
            b = int(np.flatnonzero(bad)[0])
            check_antisymmetric(a[b], rtol)
    return _scaled_pfaffians(a)


def pfaffian_congruence_check(b, a, rtol=1e-8):
    """Whether Pf(B A B^t) == det(B) Pf(A) to relative tolerance ``rtol``."""
    b = _square(b, "B")
    a = _square(a, "A")
    lhs = pfaffian(b @ a @ b.T, rtol=1e-9).value
    rhs = det(b).value * pfaffian(a).value
    scale = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
    return abs(lhs - rhs) <= rtol * scale


def kron(a, b):
    """Kronecker product ``a ⊗ b``."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def tensor_swap_permutation(p, m):
    """Perfect shuffle ``perm`` with ``kron(A, B)[perm][:, perm2] == kron(B, A)``.

    For ``A`` of shape (p, q) and ``B`` of shape (m, n), row index ``i*m + k``
    of ``A ⊗ B`` corresponds to row ``k*p + i`` of ``B ⊗ A``. The returned
    sequence satisfies ``kron(B, A) == kron(A, B)[perm(p, m)][:, perm(q, n)]``,
    and ``perm(m, p)`` is its inverse.
    """
    if p < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    k, i = np.meshgrid(np.arange(m), np.arange(p), indexing="ij")
    return (i * m + k).ravel()


def eigenvalues(m):
    """All eigenvalues of a general complex matrix (LAPACK ``geev`` path)."""
    a = _square(m)
    if a.shape[0] > 4096:
        raise LinalgError(f"dimension {a.shape[0]} exceeds the supported 4096")
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigensolver did not converge: {exc}") from exc


def hermitian_sqrt(m, tol=1e-10):
    """Positive semidefinite square root of a Hermitian PSD matrix."""
    a = _square(m)
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    lo = w.min() if w.size else 0.0
    if lo < -tol:
        raise LinalgError(f"matrix is indefinite: min eigenvalue {lo:.3e}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def quaternion_j(n):
    """The 2n x 2n matrix [[0, I], [-I, 0]]."""
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


def is_quaternion(x, atol=1e-12):
    """Whether ``x J = J conj(x)`` holds entrywise."""
    x = np.asarray(x)
    n2 = x.shape[0]
    if n2 % 2 or x.shape[1] != n2:
        return False
    j = quaternion_j(n2 // 2)
    scale = max(1.0, np.abs(x).max())
    return bool(np.abs(x @ j - j @ x.conj()).max() <= atol * scale)


def quaternion_from_blocks(x1, x2):
    """Complex representation [[X1, X2], [-conj X2, conj X1]]."""
    x1 = np.asarray(x1, dtype=np.complex128)
    x2 = np.asarray(x2, dtype=np.complex128)
    return np.block([[x1, x2], [-x2.conj(), x1.conj()]])


def logscaled_mean(mant, logs):
    """Mean and standard error of ``mant * exp(logs)`` without overflow.

    Returns ``(mean, se_real, se_imag, shift)`` where the true mean is
    ``mean * exp(shift)`` and the errors are on the same scale.
    """
    mant = np.asarray(mant, dtype=np.complex128)
    logs = np.asarray(logs, dtype=float)
    n = mant.size
    live = mant != 0
    shift = float(logs[live].max()) if live.any() else 0.0
    if shift < 600.0:
        shift = 0.0
    vals = np.where(live, mant * np.exp(np.where(live, logs - shift, 0.0)), 0.0)
    mean = vals.mean()
    if n > 1:
        se_r = vals.real.std(ddof=1) / np.sqrt(n)
        se_i = vals.imag.std(ddof=1) / np.sqrt(n)
    else:
        se_r = se_i = np.inf
    return complex(mean), float(se_r), float(se_i), shift
