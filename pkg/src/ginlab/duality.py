"""Duality observables and their two-sided Monte Carlo verification.

For beta = 1, 2, 4 the observable Q_beta(A; X, Y) is a Pfaffian or a
determinant of a block matrix built from the spectral-parameter matrix A,
an N x N (quaternion: 2N x 2N) matrix X and a small dual matrix Y. The
duality identity equates its average over the deformed Ginibre ensemble
(fixed Y = Y0) with its average over the dual ensemble (fixed X = X0).

Both averages are estimated by independent Monte Carlo and compared by a
z-score. Determinants and Pfaffians are accumulated log-scaled.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import numkit, sampler
from .sampler import DUAL_KIND

CHUNK = 10_000


@dataclass(frozen=True)
class MCEstimate:
    mean: complex
    se_real: float
    se_imag: float
    count: int

    @property
    def standard_error(self):
        return math.hypot(self.se_real, self.se_imag)


@dataclass(frozen=True)
class DualityCase:
    """Sizes, means, covariances and spectral matrix of one duality check.

    ``k`` is K for beta = 1, 4 and ``(K1, K2)`` for beta = 2. Matrices X0,
    Sigma, Gamma are N x N (2N x 2N quaternion form for beta = 4); A has
    order KN (beta = 1), (K1 + K2) N (beta = 2) or 2KN (beta = 4).
    """

    beta: int
    n: int
    k: object
    a: np.ndarray
    x0: np.ndarray = None
    y0: np.ndarray = None
    sigma: np.ndarray = None
    gamma: np.ndarray = None
    tau: float = None
    budget: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.beta not in (1, 2, 4):
            raise ValueError(f"beta must be 1, 2 or 4, got {self.beta}")
        if self.tau is None:
            object.__setattr__(self, "tau", 2.0 / self.beta)
        dim = self.dim
        for name in ("x0", "sigma", "gamma"):
            m = getattr(self, name)
            if m is None:
                m = np.zeros((dim, dim)) if name == "x0" else np.eye(dim)
            m = np.asarray(m, dtype=np.complex128)
            if m.shape != (dim, dim):
                raise ValueError(f"{name} must be {dim}x{dim}, got {m.shape}")
            if self.beta == 4 and not numkit.is_quaternion(m):
                raise ValueError(f"{name} lacks quaternion structure")
            if self.beta == 1 and np.abs(m.imag).max() > 0:
                raise ValueError(f"{name} must be real for beta = 1")
            object.__setattr__(self, name, m)
        kind = DUAL_KIND[self.beta]
        _, y0 = sampler._check_dual(kind, self.k, self.y0)
        object.__setattr__(self, "y0", y0)
        a = np.asarray(self.a, dtype=np.complex128)
        if a.shape != (self.a_order, self.a_order):
            raise ValueError(f"A must have order {self.a_order}, got {a.shape}")
        if self.beta == 2:
            k1n = self.k[0] * self.n
            if np.abs(a[:k1n, k1n:]).max(initial=0) or np.abs(a[k1n:, :k1n]).max(initial=0):
                raise ValueError("A must be block diagonal diag(A1, A2) for beta = 2")
        object.__setattr__(self, "a", a)

    @property
    def dim(self):
        return 2 * self.n if self.beta == 4 else self.n

    @property
    def kk(self):
        return sum(self.k) if self.beta == 2 else int(self.k)

    @property
    def a_order(self):
        return self.kk * self.dim


def _bkron(a, b):
    """Batched Kronecker product; either factor may carry a leading batch axis."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 2:
        a = a[None]
    if b.ndim == 2:
        b = b[None]
    bs = max(a.shape[0], b.shape[0])
    p, q = a.shape[1:]
    m, n = b.shape[1:]
    out = a[:, :, None, :, None] * b[:, None, :, None, :]
    return np.broadcast_to(out, (bs, p, m, q, n)).reshape(bs, p * m, q * n)


def _bdiag(x, k):
    """I_k (x) X for a batch of X."""
    return _bkron(np.eye(k), x)


def q_blocks(case, x, y):
    """The block matrices whose Pfaffian / determinant define Q (batched)."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.ndim == 2:
        x = x[None]
    if y.ndim == 2:
        y = y[None]
    a = case.a[None]
    sig, gam = case.sigma, case.gamma
    if case.beta == 2:
        k1, k2 = case.k
        nn = case.n
        a1 = a[:, : k1 * nn, : k1 * nn]
        a2 = a[:, k1 * nn:, k1 * nn:]
        tl = a1 - _bdiag(x, k1)
        br = a2 - _bdiag(np.swapaxes(x.conj(), 1, 2), k2)
        tr = -_bkron(np.swapaxes(y.conj(), 1, 2), sig)
        bl = _bkron(y, gam)
    else:
        k = case.kk
        off = a - _bdiag(x, k)
        ystar = np.swapaxes(y.conj(), 1, 2)
        if case.beta == 1:
            tl = _bkron(y, sig)
            br = _bkron(ystar, gam)
        else:
            j = numkit.quaternion_j(case.n)
            tl = 1j * _bkron(y, sig @ j)
            br = 1j * _bkron(ystar, j @ gam)
        tr = off
        bl = -np.swapaxes(off, 1, 2)
    bs = max(b.shape[0] for b in (tl, br, tr, bl))
    tl, br, tr, bl = (np.broadcast_to(b, (bs,) + b.shape[1:]) for b in (tl, br, tr, bl))
    top = np.concatenate([tl, tr], axis=2)
    bot = np.concatenate([bl, br], axis=2)
    return np.concatenate([top, bot], axis=1)


def q_sign(case):
    kn = case.kk * case.n
    if case.beta == 1:
        return -1.0 if (kn * (kn - 1) // 2) % 2 else 1.0
    if case.beta == 4:
        return -1.0 if kn % 2 else 1.0
    return 1.0


def q_batch(case, x, y, check=True):
    """Q_beta over a batch; returns ``(mantissa, logscale)``."""
    m = q_blocks(case, x, y)
    if case.beta == 2:
        mant, logs = numkit.det_batch(m)
    else:
        try:
            mant, logs = numkit.pfaffian_batch(m, rtol=1e-10, check=check)
        except numkit.LinalgError as exc:
            raise numkit.LinalgError(f"Q block matrix assembly broke antisymmetry: {exc}") from exc
    return q_sign(case) * mant, logs


def q_observable(case, x, y):
    """Q_beta(A; X, Y) as a ``LogScaled`` value."""
    mant, logs = q_batch(case, x, y)
    return numkit.LogScaled(complex(mant[0]), float(logs[0]))


def _estimate(chunks):
    mant = np.concatenate([c[0] for c in chunks])
    logs = np.concatenate([c[1] for c in chunks])
    return mant, logs


def _to_estimate(mant, logs, shift):
    live = mant != 0
    vals = np.where(live, mant * np.exp(np.where(live, logs - shift, 0.0)), 0.0)
    n = vals.size
    se_r = vals.real.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
    se_i = vals.imag.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
    return MCEstimate(complex(vals.mean()), float(se_r), float(se_i), int(n))


def _common_shift(*pairs):
    shift = 0.0
    for mant, logs in pairs:
        live = mant != 0
        if live.any():
            shift = max(shift, float(logs[live].max()))
    return shift if shift > 600.0 else 0.0


def _chunked(budget, fn, seed, tag):
    out = []
    done = 0
    c = 0
    while done < budget:
        m = min(CHUNK, budget - done)
        out.append(fn(sampler.stream(seed, tag, c), m))
        done += m
        c += 1
    return _estimate(out)


def _x_side(case, tag, observable):
    def draw(rng, m):
        x = sampler.deformed_batch(case.beta, case.n, case.tau, case.x0, case.sigma, case.gamma, rng, m)
        return observable(x)

    return _chunked(case.budget, draw, case.seed, tag)


def _y_side(case, tag, y0=None):
    kind = DUAL_KIND[case.beta]
    y0 = case.y0 if y0 is None else y0

    def draw(rng, m):
        y = sampler.dual_batch(kind, case.k, case.tau, case.n, y0, rng, m)
        return q_batch(case, case.x0, y)

    return _chunked(case.budget, draw, case.seed, tag)


def z_score(lhs, rhs):
    """max over real / imaginary parts of |lhs - rhs| / sqrt(se_l^2 + se_r^2)."""
    out = 0.0
    for d, s1, s2 in (
        (lhs.mean.real - rhs.mean.real, lhs.se_real, rhs.se_real),
        (lhs.mean.imag - rhs.mean.imag, lhs.se_imag, rhs.se_imag),
    ):
        s = math.hypot(s1, s2)
        if s == 0:
            z = 0.0 if abs(d) <= 1e-12 * max(1.0, abs(lhs.mean), abs(rhs.mean)) else math.inf
        else:
            z = abs(d) / s
        out = max(out, z)
    return out


@dataclass
class DualityReport:
    lhs: MCEstimate
    rhs: MCEstimate
    zscore: float
    passed: bool
    shift: float = 0.0
    retried: bool = False
    attempts: list = field(default_factory=list)

    def to_dict(self):
        def est(e):
            return {
                "mean_re": e.mean.real, "mean_im": e.mean.imag,
                "se_re": e.se_real, "se_im": e.se_imag, "count": e.count,
            }

        return {
            "lhs": est(self.lhs), "rhs": est(self.rhs), "zscore": self.zscore,
            "pass": self.passed, "log_shift": self.shift, "retried": self.retried,
            "attempt_zscores": self.attempts,
        }


def _run(case, left, right, threshold, retry):
    attempts = []
    cur = case
    for attempt in range(2 if retry else 1):
        tag = f"try{attempt}"
        lm, ll = left(cur, "x-" + tag)
        rm, rl = right(cur, "y-" + tag)
        shift = _common_shift((lm, ll), (rm, rl))
        lhs = _to_estimate(lm, ll, shift)
        rhs = _to_estimate(rm, rl, shift)
        z = z_score(lhs, rhs)
        attempts.append(z)
        if z <= threshold:
            break
        cur = replace(cur, budget=4 * cur.budget)
    return DualityReport(lhs, rhs, z, z <= threshold, shift, len(attempts) > 1, attempts)


def verify_duality(case, threshold=3.0, retry=True):
    """Average of Q(A; X, Y0) over X against Q(A; X0, Y) over Y.

    A failed comparison is rerun once with 4x the budget on fresh streams;
    both z-scores are kept in the report.
    """
    if case.budget < 1000:
        raise ValueError("sample budget must be at least 1000")

    def left(c, tag):
        return _x_side(c, tag, lambda x: q_batch(c, x, c.y0))

    return _run(case, left, lambda c, tag: _y_side(c, tag), threshold, retry)


def charpoly_case(beta, n, z, w, x0=None, sigma=None, gamma=None, tau=None, budget=100_000, seed=0):
    """Case for the characteristic-polynomial corollary: A = diag(Z (x) I, W* (x) I), Y0 = 0."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    dim = 2 * n if beta == 4 else n
    a = np.diag(np.concatenate([np.repeat(z, dim), np.repeat(w.conj(), dim)]))
    k = (len(z), len(w)) if beta == 2 else len(z) + len(w)
    return DualityCase(beta, n, k, a, x0=x0, sigma=sigma, gamma=gamma, tau=tau, budget=budget, seed=seed)


def charpoly_batch(case, x, k1):
    """prod_i det(z_i - X) prod_j det(conj w_j - X*), with z_1..z_k1 and
    conj w_j read off the diagonal of A."""
    dim = case.dim
    pts = np.diag(case.a)[::dim]
    eye = np.eye(dim)
    xs = np.swapaxes(x.conj(), 1, 2)
    mant = np.ones(x.shape[0], dtype=np.complex128)
    logs = np.zeros(x.shape[0])
    for i, p in enumerate(pts):
        m, l = numkit.det_batch(p * eye[None] - (x if i < k1 else xs))
        mant *= m
        logs += l
    return mant, logs


@dataclass(frozen=True)
class CharpolyCase:
    """A duality case plus the split K = K1 + K2 of its spectral points."""

    case: DualityCase
    k1: int


def make_charpoly(beta, n, z, w, **kw):
    c = charpoly_case(beta, n, z, w, **kw)
    return CharpolyCase(c, len(np.atleast_1d(z)))


def verify_charpoly(cp, threshold=3.0, retry=True):
    """Direct average of the characteristic-polynomial product against the
    dual-side average of Q with Y0 = 0."""
    if isinstance(cp, DualityCase):
        cp = CharpolyCase(cp, cp.k[0] if cp.beta == 2 else cp.kk)
    case = cp.case
    if np.abs(case.y0).max(initial=0) != 0:
        raise ValueError("the characteristic-polynomial check needs Y0 = 0")

    def left(c, tag):
        return _x_side(c, tag, lambda x: charpoly_batch(c, x, cp.k1))

    return _run(case, left, lambda c, tag: _y_side(c, tag), threshold, retry)
