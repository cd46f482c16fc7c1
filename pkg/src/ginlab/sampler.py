"""Replica generation for the deformed Ginibre ensembles and their duals.

Every replica draws from its own ``PCG64`` stream, derived from
``(master seed, purpose tag, replica index)``, so results do not depend on
thread count or on the order in which replicas run.

Two samplers produce the same eigenvalue law:

``sample_deformed``
    The dense matrix ``X = X0 + sqrt(tau/N) Sigma^{1/2} W Gamma^{1/2}``.

``sample_band``
    For ``Sigma = Gamma = I`` and a mean supported on the leading r x r
    (quaternion: r x r quaternion) block, a unitarily equivalent matrix with
    lower bandwidth ``b = max(r, 1)``. Householder steps that act only on
    indices beyond the mean's support push each column onto the band and
    leave a chi-distributed corner entry; the untouched entries stay i.i.d.
    Eigenvalues near a point then come from shift-invert Arnoldi on a banded
    LU factorization at O(N^2 b) cost instead of a dense O(N^3) solve.
"""

import csv
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.sparse import linalg as spla

from . import _backend, numkit
from .model import EnsembleConfig, SpecError

from . import __version__

PAIR_RTOL = 1e-6


def stream(seed, tag, replica):
    """Independent generator for ``(seed, tag, replica)``."""
    key = (zlib.crc32(tag.encode()), int(replica))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def thread_count(threads=None):
    if threads:
        return max(1, int(threads))
    env = os.environ.get("GINLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def replica_map(fn, replicas, threads=None):
    """``[fn(r) for r in replicas]`` on a thread pool; order preserved."""
    replicas = list(replicas)
    n = thread_count(threads)
    if n == 1 or len(replicas) < 2:
        return [fn(r) for r in replicas]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, replicas))


def complex_normal(rng, shape):
    """i.i.d. complex Gaussians with E|w|^2 = 1."""
    w = rng.standard_normal(shape + (2,))
    return (w[..., 0] + 1j * w[..., 1]) * math.sqrt(0.5)


# --- dense sampler ------------------------------------------------------------

def noise(config, rng):
    """The standard matrix W: E w^2 = 1/2 (beta=1), E|w|^2 = 1 (beta=2) and
    two complex blocks with E|w|^2 = 1 in quaternion form (beta=4)."""
    n = config.n
    if config.beta == 1:
        return rng.standard_normal((n, n)) * math.sqrt(0.5) + 0j
    if config.beta == 2:
        return complex_normal(rng, (n, n))
    w1 = complex_normal(rng, (n, n))
    w2 = complex_normal(rng, (n, n))
    return numkit.quaternion_from_blocks(w1, w2)


def sample_deformed(config, replica, tag="deformed"):
    """One dense replica of the deformed ensemble."""
    rng = stream(config.seed, tag, replica)
    w = noise(config, rng)
    if config.sigma is not None:
        w = numkit.hermitian_sqrt(config.sigma) @ w
    if config.gamma is not None:
        w = w @ numkit.hermitian_sqrt(config.gamma)
    x = config.mean_matrix() + math.sqrt(config.tau / config.n) * w
    if config.beta == 1:
        x = x.real.astype(np.complex128)
    return x


def noise_batch(beta, n, rng, count):
    """``count`` independent standard matrices W, shape (count, dim, dim)."""
    if beta == 1:
        return rng.standard_normal((count, n, n)) * math.sqrt(0.5) + 0j
    if beta == 2:
        return complex_normal(rng, (count, n, n))
    w1 = complex_normal(rng, (count, n, n))
    w2 = complex_normal(rng, (count, n, n))
    top = np.concatenate([w1, w2], axis=2)
    bot = np.concatenate([-w2.conj(), w1.conj()], axis=2)
    return np.concatenate([top, bot], axis=1)


def deformed_batch(beta, n, tau, x0, sigma, gamma, rng, count):
    """Batch of deformed-ensemble matrices with explicit mean and covariances."""
    w = noise_batch(beta, n, rng, count)
    if sigma is not None:
        w = numkit.hermitian_sqrt(sigma)[None] @ w
    if gamma is not None:
        w = w @ numkit.hermitian_sqrt(gamma)[None]
    x = np.asarray(x0, dtype=np.complex128)[None] + math.sqrt(tau / n) * w
    if beta == 1:
        x = x.real + 0j
    return x


# --- banded sampler -----------------------------------------------------------

def _support_rank(config):
    """Size of the mean's leading block (quaternion units for beta = 4)."""
    x0 = config.mean_matrix()
    n = config.n
    if config.beta == 4:
        blocks = np.abs(x0[:n, :n]) + np.abs(x0[:n, n:])
    else:
        blocks = np.abs(x0)
    nz = np.flatnonzero((blocks != 0).any(axis=0) | (blocks != 0).any(axis=1))
    return int(nz.max()) + 1 if nz.size else 0


def band_supported(config):
    return config.sigma is None and config.gamma is None and config.beta in (2, 4)


@dataclass
class BandMatrix:
    matrix: np.ndarray
    bandwidth: int


def sample_band(config, replica, tag="band", size=None):
    """Banded matrix with the eigenvalue law of the deformed ensemble.

    ``size`` keeps only the leading ``size`` x ``size`` (quaternion) rows
    and columns; the chi corners are still those of the full dimension N.
    """
    if not band_supported(config):
        raise SpecError("banded sampling needs Sigma = Gamma = I and beta in (2, 4)")
    n = config.n
    r = _support_rank(config)
    b = max(r, 1)
    m = n if size is None else min(int(size), n)
    rng = stream(config.seed, tag, replica)
    sig2 = config.tau / n
    rows = np.arange(m)[:, None]
    cols = np.arange(m)[None, :]
    # 0-indexed row i holds the chi corner at column i - b; it is the norm of
    # the N - i entries of that column still below the band
    dof = n - np.arange(b, m)
    x0 = config.mean_matrix()
    if config.beta == 2:
        h = complex_normal(rng, (m, m))
        h[rows - cols > b] = 0.0
        i = np.arange(b, m)
        h[i, i - b] = np.sqrt(rng.gamma(dof))
        h *= math.sqrt(sig2)
        h[:r, :r] += x0[:r, :r]
        return BandMatrix(h, b)
    # quaternion: blocks [[a, c], [-conj c, conj a]], interleaved (2i, 2i+1)
    a = complex_normal(rng, (m, m))
    c = complex_normal(rng, (m, m))
    mask = rows - cols > b
    a[mask] = 0.0
    c[mask] = 0.0
    i = np.arange(b, m)
    # quaternion column norm^2 over 4(N-i) real components of variance 1/2
    a[i, i - b] = np.sqrt(0.5 * rng.chisquare(4 * dof))
    c[i, i - b] = 0.0
    h = np.empty((2 * m, 2 * m), dtype=np.complex128)
    h[0::2, 0::2] = a
    h[0::2, 1::2] = c
    h[1::2, 0::2] = -c.conj()
    h[1::2, 1::2] = a.conj()
    h *= math.sqrt(sig2)
    if r:
        h[: 2 * r, : 2 * r] += interleave(x0, n)[: 2 * r, : 2 * r]
    return BandMatrix(h, 2 * b)


def interleave(x, n):
    """Reorder a 2n x 2n matrix from (1..n, n+1..2n) to (1, n+1, 2, n+2, ...)."""
    perm = np.empty(2 * n, dtype=np.intp)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n, 2 * n)
    return x[np.ix_(perm, perm)]


# --- eigenvalues near a point ----------------------------------------------------

def _band_shift_invert(h, bw, sigma):
    a = np.array(h, dtype=np.complex128, order="C", copy=True)
    a[np.diag_indices_from(a)] -= sigma
    piv = _backend.band_lu_factor(a, bw)
    if np.any(np.diag(a) == 0):
        raise numkit.LinalgError("shift coincides with an eigenvalue")
    u = np.triu(a)

    def solve(v):
        y = np.array(v, dtype=np.complex128, copy=True).ravel()
        _backend.band_lu_forward(a, piv, bw, y)
        return sla.solve_triangular(u, y, lower=False, check_finite=False)

    return solve


def eigenvalues_near(h, bw, center, radius, k0=None, max_k=None):
    """All eigenvalues of ``h`` within ``radius`` of ``center``.

    Shift-invert Arnoldi returns the k eigenvalues closest to the shift; k
    grows until the farthest of them lies outside the disk.
    """
    n = h.shape[0]
    max_k = max_k or n - 2
    # nudge the shift off any symmetry line of the spectrum
    sigma = complex(center) + 1e-7 * (1 + 1j) * max(radius, 1e-3)
    solve = _band_shift_invert(h, bw, sigma)
    op = spla.LinearOperator((n, n), matvec=solve, dtype=np.complex128)
    k = min(k0 or 16, max_k)
    while True:
        if k >= n - 1:
            return numkit.eigenvalues(h)[np.abs(numkit.eigenvalues(h) - center) <= radius]
        ncv = min(n, max(2 * k + 1, k + 20))
        try:
            nu = spla.eigs(op, k=k, which="LM", ncv=ncv, tol=1e-12, maxiter=20 * n,
                           return_eigenvectors=False)
        except spla.ArpackNoConvergence as exc:
            nu = exc.eigenvalues
            if len(nu) < k:
                raise numkit.EigenConvergenceError(
                    "shift-invert Arnoldi did not converge", partial=sigma + 1.0 / nu
                ) from exc
        lam = sigma + 1.0 / nu
        dist = np.abs(lam - center)
        if dist.max() > radius or k >= max_k:
            return lam[dist <= radius]
        k = min(int(k * 1.6) + 4, max_k)


# --- samples ----------------------------------------------------------------------

@dataclass
class SpectrumSample:
    eigenvalues: np.ndarray
    fingerprint: str
    replica: int
    seed: int
    discarded: bool = False
    note: str = ""
    seconds: float = 0.0
    meta: dict = field(default_factory=dict)


def symmetrize_pairs(ev, scale):
    """Replace each conjugate pair by (l, conj l) with Im l >= 0.

    Returns ``(eigenvalues, ok, note)``; ``ok`` is False when some eigenvalue
    has no partner within ``PAIR_RTOL * scale`` or sits on the real axis.
    """
    ev = np.asarray(ev, dtype=np.complex128)
    if ev.size % 2:
        return ev, False, "odd number of eigenvalues"
    partner, ok = _backend.pair_conjugates(ev, PAIR_RTOL * scale)
    if not ok:
        return ev, False, "unmatched conjugate pair"
    if np.any(np.abs(ev.imag) < 1e-12):
        return ev, False, "eigenvalue on the real axis"
    i = np.arange(ev.size)
    first = i < partner
    top = np.where(ev[first].imag >= 0, ev[first], ev[partner[first]])
    out = np.concatenate([top, top.conj()])
    return out, True, ""


def spectrum(config, replica, tag="deformed"):
    """All eigenvalues of one dense replica."""
    t0 = time.perf_counter()
    x = sample_deformed(config, replica, tag)
    try:
        ev = numkit.eigenvalues(x)
    except numkit.EigenConvergenceError as exc:
        raise numkit.EigenConvergenceError(f"replica {replica}: {exc}", exc.partial) from exc
    ok, note = True, ""
    if config.beta == 4:
        ev, ok, note = symmetrize_pairs(ev, max(1.0, np.abs(x).max()))
    return SpectrumSample(
        ev, config.fingerprint(), int(replica), int(config.seed),
        discarded=not ok, note=note, seconds=time.perf_counter() - t0,
    )


def window_spectrum(config, replica, center, radius, method="auto", tag="band"):
    """Eigenvalues within ``radius`` of ``center`` for one replica.

    ``method`` is ``"band"`` (shift-invert on the banded model), ``"dense"``
    or ``"auto"`` (band when supported). For beta = 4 and a real center the
    window is closed under conjugation and pairs are symmetrized.
    """
    t0 = time.perf_counter()
    center = complex(center)
    if method == "auto":
        method = "band" if band_supported(config) else "dense"
    if method == "band":
        bm = sample_band(config, replica, tag)
        n_exp = config.matrix_dim * radius * radius
        ev = eigenvalues_near(bm.matrix, bm.bandwidth, center, radius, k0=int(0.6 * n_exp) + 12)
        scale = max(1.0, np.abs(bm.matrix).max())
    elif method == "dense":
        x = sample_deformed(config, replica, tag)
        ev = numkit.eigenvalues(x)
        ev = ev[np.abs(ev - center) <= radius]
        scale = max(1.0, np.abs(x).max())
    else:
        raise ValueError(f"unknown method {method!r}")
    ok, note = True, ""
    if config.beta == 4 and abs(center.imag) < 1e-15:
        ev, ok, note = symmetrize_pairs(ev, scale)
    return SpectrumSample(
        ev, config.fingerprint(), int(replica), int(config.seed),
        discarded=not ok, note=note, seconds=time.perf_counter() - t0,
        meta={"method": method, "center": [center.real, center.imag], "radius": radius},
    )


def outlier_spectrum(config, replica, center, count, truncation=200, tag="band"):
    """The ``count`` eigenvalues nearest ``center`` (|center| > 1).

    Uses the leading ``truncation`` rows and columns of the banded model:
    eigenvectors of eigenvalues outside the unit disk decay geometrically
    along the band, so the truncation error is of order |center|^(-truncation).
    """
    t0 = time.perf_counter()
    if abs(center) <= 1.0:
        raise ValueError("outlier extraction needs |center| > 1")
    bm = sample_band(config, replica, tag, size=truncation)
    ev = numkit.eigenvalues(bm.matrix)
    ev = ev[np.argsort(np.abs(ev - center))][: count + 1]
    return SpectrumSample(
        ev, config.fingerprint(), int(replica), int(config.seed),
        seconds=time.perf_counter() - t0, meta={"truncation": truncation},
    )


# --- dual ensembles -----------------------------------------------------------------

DUAL_KIND = {1: "antisymmetric", 2: "rectangular", 4: "symmetric"}


@dataclass
class DualSample:
    kind: str
    matrix: np.ndarray


def dual_shape(kind, k):
    if kind == "rectangular":
        k1, k2 = k
        return (k2, k1)
    k = int(k if np.ndim(k) == 0 else k[0])
    return (k, k)


def _check_dual(kind, k, y0):
    if kind not in ("rectangular", "symmetric", "antisymmetric"):
        raise SpecError(f"unknown dual kind {kind!r}")
    shape = dual_shape(kind, k)
    if y0 is None:
        y0 = np.zeros(shape, dtype=np.complex128)
    y0 = np.asarray(y0, dtype=np.complex128)
    if y0.shape != shape:
        raise SpecError(f"Y0 has shape {y0.shape}, expected {shape}")
    if kind == "symmetric" and np.abs(y0 - y0.T).max(initial=0) > 0:
        raise SpecError("Y0 must be symmetric")
    if kind == "antisymmetric" and np.abs(y0 + y0.T).max(initial=0) > 0:
        raise SpecError("Y0 must be antisymmetric")
    return shape, y0


def dual_batch(kind, k, tau, n, y0, rng, count):
    """``count`` draws of the dual ensemble, shape (count,) + Y0.shape.

    Per-entry variances E|y - y0|^2: rectangular tau/N; symmetric 2 tau/N on
    the diagonal and tau/N off it; antisymmetric tau/(2N) off the diagonal.
    """
    shape, y0 = _check_dual(kind, k, y0)
    s = math.sqrt(tau / n)
    g = complex_normal(rng, (count,) + shape)
    if kind == "rectangular":
        y = s * g
    else:
        up = np.triu(g, 1)
        low = np.swapaxes(up, 1, 2)
        if kind == "symmetric":
            diag = np.einsum("bii->bi", g)
            y = s * (up + low)
            idx = np.arange(shape[0])
            y[:, idx, idx] = s * math.sqrt(2.0) * diag
        else:
            y = s * math.sqrt(0.5) * (up - low)
    return y0[None] + y


def sample_dual(kind, k, tau, n, y0=None, seed=0, replica=0):
    """One draw of the dual ensemble as a ``DualSample``."""
    rng = stream(seed, "dual", replica)
    return DualSample(kind, dual_batch(kind, k, tau, n, y0, rng, 1)[0])


# --- persistence ------------------------------------------------------------------

def write_spectra_csv(path, samples):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["replica", "re", "im"])
        for s in samples:
            for lam in s.eigenvalues:
                wr.writerow([s.replica, repr(float(lam.real)), repr(float(lam.imag))])


def read_spectra_csv(path):
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(int(row["replica"]), []).append(complex(float(row["re"]), float(row["im"])))
    return {k: np.array(v) for k, v in out.items()}


def manifest(config, replicas, extra=None):
    return {
        "fingerprint": config.fingerprint(),
        "beta": config.beta,
        "n": config.n,
        "tau": config.tau,
        "seed": int(config.seed),
        "replicas": list(map(int, replicas)),
        "stream": "PCG64(SeedSequence(seed, spawn_key=(crc32(tag), replica)))",
        "version": __version__,
        "compiled_kernels": _backend.COMPILED,
        **(extra or {}),
    }


def write_manifest(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
