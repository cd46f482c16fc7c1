"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one-to-one and are used when the compiled
extension is unavailable or ``GINLAB_PURE_PYTHON=1`` is set.
"""

import numpy as np


def pfaffian_batch(a):
    """Log-scaled Pfaffians of a stack of antisymmetric matrices.

    Parlett-Reid skew elimination with partial pivoting, vectorized over the
    leading axis.

    Parameters
    ----------
    a : ndarray, shape (B, n, n), complex
        Antisymmetric matrices. Not modified.

    Returns
    -------
    mantissa : ndarray, shape (B,), complex
        Unit-modulus phase, or 0 when the Pfaffian vanishes.
    logscale : ndarray, shape (B,), float
        ``log|Pf|`` (0 where the mantissa is 0).
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    nb, n, _ = a.shape
    mant = np.ones(nb, dtype=np.complex128)
    logs = np.zeros(nb)
    if n % 2 == 1:
        return np.zeros(nb, dtype=np.complex128), logs
    if n == 0:
        return mant, logs
    idx = np.arange(nb)
    for k in range(0, n - 1, 2):
        kp = k + 1 + np.argmax(np.abs(a[:, k + 1:, k]), axis=1)
        swap = kp != k + 1
        if swap.any():
            s = idx[swap]
            p = kp[swap]
            rows_a = a[s, k + 1, :].copy()
            a[s, k + 1, :] = a[s, p, :]
            a[s, p, :] = rows_a
            cols_a = a[s, :, k + 1].copy()
            a[s, :, k + 1] = a[s, :, p]
            a[s, :, p] = cols_a
            mant[swap] = -mant[swap]
        piv = a[:, k, k + 1]
        zero = piv == 0
        mag = np.abs(piv)
        safe = np.where(zero, 1.0, mag)
        mant *= np.where(zero, 0.0, piv / safe)
        logs += np.log(safe)
        if k + 2 < n:
            denom = np.where(zero, 1.0, piv)
            tau = a[:, k, k + 2:] / denom[:, None]
            col = a[:, k + 2:, k + 1]
            upd = tau[:, :, None] * col[:, None, :] - col[:, :, None] * tau[:, None, :]
            upd[zero] = 0.0
            a[:, k + 2:, k + 2:] += upd
    logs[mant == 0] = 0.0
    return mant, logs


def band_lu_factor(a, bw):
    """In-place LU with partial pivoting of a matrix with lower bandwidth ``bw``.

    Row interchanges are confined to the band and touch only the active
    columns (multipliers stay in place, as in LAPACK ``gbtrf``), so
    elimination costs O(n^2 bw). Returns the pivot rows as an int array;
    ``a`` holds U in its upper triangle and the multipliers in the band below
    the diagonal.
    """
    n = a.shape[0]
    piv = np.arange(n)
    for j in range(n - 1):
        last = min(n, j + bw + 1)
        p = j + int(np.argmax(np.abs(a[j:last, j])))
        piv[j] = p
        if p != j:
            tmp = a[j, j:].copy()
            a[j, j:] = a[p, j:]
            a[p, j:] = tmp
        d = a[j, j]
        if d == 0:
            continue
        a[j + 1:last, j] /= d
        a[j + 1:last, j + 1:] -= np.outer(a[j + 1:last, j], a[j, j + 1:])
    return piv


def band_lu_forward(lu, piv, bw, b):
    """Apply the row interchanges and unit lower factor to ``b`` in place."""
    n = lu.shape[0]
    for j in range(n - 1):
        p = piv[j]
        if p != j:
            b[j], b[p] = b[p], b[j]
        last = min(n, j + bw + 1)
        b[j + 1:last] -= lu[j + 1:last, j] * b[j]
    return b


def pair_conjugates(ev, tol):
    """Greedy nearest-conjugate matching.

    Each unmatched eigenvalue is paired with the unmatched eigenvalue closest
    to its conjugate. Returns ``(partner, ok)`` where ``partner[i]`` is the
    matched index and ``ok`` is False when some distance exceeds ``tol``.
    """
    ev = np.asarray(ev, dtype=np.complex128)
    n = ev.size
    partner = np.full(n, -1, dtype=np.intp)
    order = np.argsort(-np.abs(ev.imag), kind="stable")
    free = np.ones(n, dtype=bool)
    ok = True
    for i in order:
        if not free[i]:
            continue
        free[i] = False
        d = np.abs(ev - np.conj(ev[i]))
        d[~free] = np.inf
        j = int(np.argmin(d)) if free.any() else -1
        if j < 0:
            ok = False
            break
        if d[j] > tol:
            ok = False
        free[j] = False
        partner[i] = j
        partner[j] = i
    return partner, ok
