"""Jordan data of the finite-rank perturbation and ensemble configuration."""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import numkit


class SpecError(ValueError):
    """Invalid Jordan data or ensemble configuration."""


def jordan_block(p, theta):
    """p x p Jordan block: ``theta`` on the diagonal, ones on the superdiagonal."""
    return np.eye(p, dtype=np.complex128) * theta + np.eye(p, k=1)


@dataclass(frozen=True)
class JordanSpec:
    """Jordan data: eigenvalues, per-eigenvalue (block size, multiplicity)
    tables and an optional similarity transform ``P``.

    ``blocks[i]`` lists ``(p, beta)`` pairs for ``eigenvalues[i]`` with
    strictly increasing ``p``.
    """

    eigenvalues: tuple
    blocks: tuple
    transform: object = None

    def __post_init__(self):
        eig = tuple(complex(t) for t in self.eigenvalues)
        blk = tuple(tuple((int(p), int(b)) for p, b in row) for row in self.blocks)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "blocks", blk)
        if self.transform is not None:
            object.__setattr__(self, "transform", np.array(self.transform, dtype=np.complex128))
        problems = self.violations()
        if problems:
            raise SpecError("; ".join(problems))
        if self.transform is not None:
            self.transform.setflags(write=False)

    def violations(self):
        out = []
        if len(self.eigenvalues) != len(self.blocks):
            out.append(
                f"{len(self.eigenvalues)} eigenvalues but {len(self.blocks)} block tables"
            )
            return out
        if len(set(self.eigenvalues)) != len(self.eigenvalues):
            out.append("eigenvalues must be pairwise distinct")
        for i, row in enumerate(self.blocks):
            if not row:
                out.append(f"eigenvalue {i} has an empty block table")
            for j, (p, b) in enumerate(row):
                if p < 1:
                    out.append(f"block ({i},{j}) has size {p} < 1")
                if b < 1:
                    out.append(f"block ({i},{j}) has multiplicity {b} < 1")
                if j and p <= row[j - 1][0]:
                    out.append(
                        f"block sizes for eigenvalue {i} not strictly increasing at "
                        f"({i},{j}): {row[j - 1][0]} then {p}"
                    )
        if self.transform is not None:
            r = self.rank
            t = self.transform
            if t.shape != (r, r):
                out.append(f"transform has shape {t.shape}, expected ({r}, {r})")
            elif r and 1.0 / np.linalg.cond(t) < 1e-12:
                out.append(f"transform is numerically singular (cond = {np.linalg.cond(t):.3e})")
        return out

    @property
    def rank(self):
        return sum(p * b for row in self.blocks for p, b in row)

    def jordan_matrix(self):
        mats = [
            jordan_block(p, theta)
            for theta, row in zip(self.eigenvalues, self.blocks)
            for p, b in row
            for _ in range(b)
        ]
        r = self.rank
        out = np.zeros((r, r), dtype=np.complex128)
        k = 0
        for m in mats:
            s = m.shape[0]
            out[k:k + s, k:k + s] = m
            k += s
        return out

    def condition_number(self):
        if self.transform is None:
            return 1.0
        return float(np.linalg.cond(self.transform))

    def to_dict(self):
        d = {
            "jordan": [
                {"theta_re": t.real, "theta_im": t.imag, "blocks": [list(pb) for pb in row]}
                for t, row in zip(self.eigenvalues, self.blocks)
            ]
        }
        if self.transform is not None:
            d["P"] = [
                [x for z in row for x in (z.real, z.imag)] for row in self.transform
            ]
        return d

    @classmethod
    def from_dict(cls, d):
        items = d["jordan"] if isinstance(d, dict) else d
        eig = [complex(e.get("theta_re", 0.0), e.get("theta_im", 0.0)) for e in items]
        blocks = [e["blocks"] for e in items]
        tr = None
        if isinstance(d, dict) and d.get("P") is not None:
            rows = [np.asarray(r, dtype=float) for r in d["P"]]
            tr = np.array([r[0::2] + 1j * r[1::2] for r in rows])
        return cls(tuple(eig), tuple(tuple(map(tuple, b)) for b in blocks), tr)

    @classmethod
    def zero(cls):
        return cls((), ())


@dataclass(frozen=True)
class CriticalityDescriptor:
    z0: complex
    m: int
    t: int
    critical: tuple = ()
    outlier_exponents: dict = field(default_factory=dict)


def build_deformation(spec):
    """A0 = P J P^{-1}; the Jordan matrix itself when no transform is given."""
    j = spec.jordan_matrix()
    if spec.transform is None:
        return j
    p = spec.transform
    return p @ j @ np.linalg.inv(p)


def embed_quaternion(spec):
    """2r x 2r complex representation P diag(J, conj J) P^{-1}.

    Requires Im(theta) >= 0 and, when given, a transform of the quaternion
    form [[P1, P2], [-conj P2, conj P1]].
    """
    for i, t in enumerate(spec.eigenvalues):
        if t.imag < 0:
            raise SpecError(f"eigenvalue {i} = {t} has negative imaginary part")
    j = spec.jordan_matrix()
    r = j.shape[0]
    core = np.zeros((2 * r, 2 * r), dtype=np.complex128)
    core[:r, :r] = j
    core[r:, r:] = j.conj()
    if spec.transform is None:
        return core
    p = spec.transform
    if p.shape != (2 * r, 2 * r):
        raise SpecError(f"quaternion transform must be {2 * r}x{2 * r}, got {p.shape}")
    if not numkit.is_quaternion(p, atol=1e-12):
        raise SpecError("transform is not of quaternion form [[P1, P2], [-conj P2, conj P1]]")
    return p @ core @ np.linalg.inv(p)


def describe_criticality(spec, z0):
    """Count the blocks sitting exactly at ``z0`` and list outlier exponents.

    Equality is exact on the declared eigenvalues: the caller states which
    eigenvalues are critical.
    """
    z0 = complex(z0)
    if abs(abs(z0) - 1.0) > 1e-9 and abs(z0) <= 1.0:
        raise SpecError(f"|z0| = {abs(z0):.12g}: expected |z0| = 1 (edge) or |z0| > 1 (outlier)")
    crit = tuple(i for i, t in enumerate(spec.eigenvalues) if t == z0)
    t = sum(b for i in crit for _, b in spec.blocks[i])
    expo = {
        i: 1.0 / (2 * spec.blocks[i][0][0])
        for i, th in enumerate(spec.eigenvalues)
        if abs(th) > 1.0
    }
    return CriticalityDescriptor(z0=z0, m=len(crit), t=t, critical=crit, outlier_exponents=expo)


@dataclass(frozen=True)
class EnsembleConfig:
    """Ensemble parameters.

    ``deformation`` is a ``JordanSpec`` or an explicit mean matrix (r x r core
    padded with zeros to size N, or the full N x N / 2N x 2N matrix).
    ``sigma``/``gamma`` default to identity and ``tau`` to 2/beta.
    """

    beta: int
    n: int
    deformation: object = None
    sigma: object = None
    gamma: object = None
    tau: float = None
    seed: int = 0

    def __post_init__(self):
        if self.beta not in (1, 2, 4):
            raise SpecError(f"beta must be 1, 2 or 4, got {self.beta}")
        if self.n < 1:
            raise SpecError(f"N must be positive, got {self.n}")
        if self.tau is None:
            object.__setattr__(self, "tau", 2.0 / self.beta)
        if self.tau <= 0:
            raise SpecError(f"tau must be positive, got {self.tau}")
        if not 0 <= int(self.seed) < 2**64:
            raise SpecError("seed must be a 64-bit unsigned integer")
        dim = self.matrix_dim
        for name in ("sigma", "gamma"):
            m = getattr(self, name)
            if m is None:
                continue
            m = np.asarray(m, dtype=np.complex128)
            if m.shape != (dim, dim):
                raise SpecError(f"{name} must be {dim}x{dim}, got {m.shape}")
            if np.abs(m - m.conj().T).max() > 1e-12 * max(1.0, np.abs(m).max()):
                raise SpecError(f"{name} is not Hermitian")
            lo = np.linalg.eigvalsh(m).min()
            if lo <= 0:
                raise SpecError(f"{name} is not positive definite (min eigenvalue {lo:.3e})")
            if self.beta == 1 and np.abs(m.imag).max() > 0:
                raise SpecError(f"{name} must be real for beta = 1")
            if self.beta == 4 and not numkit.is_quaternion(m):
                raise SpecError(f"{name} lacks quaternion structure")
        x0 = self.mean_matrix()
        if self.beta == 1 and np.abs(x0.imag).max() > 0:
            raise SpecError("mean matrix must be real for beta = 1")
        if self.beta == 4 and not numkit.is_quaternion(x0):
            raise SpecError("mean matrix lacks quaternion structure")

    @property
    def matrix_dim(self):
        return 2 * self.n if self.beta == 4 else self.n

    def core(self):
        """The r x r (2r x 2r for beta = 4) nonzero corner A0."""
        d = self.deformation
        if d is None:
            return np.zeros((0, 0), dtype=np.complex128)
        if isinstance(d, JordanSpec):
            return embed_quaternion(d) if self.beta == 4 else build_deformation(d)
        return np.asarray(d, dtype=np.complex128)

    def mean_matrix(self):
        """X0 = diag(A0, 0) of full size; quaternion blocks placed per component."""
        a0 = self.core()
        n, dim = self.n, self.matrix_dim
        if a0.shape == (dim, dim):
            return a0.copy()
        x0 = np.zeros((dim, dim), dtype=np.complex128)
        if self.beta != 4:
            r = a0.shape[0]
            if r > n:
                raise SpecError(f"perturbation rank {r} exceeds N = {n}")
            x0[:r, :r] = a0
            return x0
        r2 = a0.shape[0]
        if r2 % 2:
            raise SpecError("quaternion core must have even size")
        r = r2 // 2
        if r > n:
            raise SpecError(f"perturbation rank {r} exceeds N = {n}")
        x0[:r, :r] = a0[:r, :r]
        x0[:r, n:n + r] = a0[:r, r:]
        x0[n:n + r, :r] = a0[r:, :r]
        x0[n:n + r, n:n + r] = a0[r:, r:]
        return x0

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(json.dumps([self.beta, self.n, float(self.tau), int(self.seed)]).encode())
        for m in (self.core(), self.sigma, self.gamma):
            if m is None:
                h.update(b"none")
            else:
                a = np.ascontiguousarray(m, dtype=np.complex128)
                h.update(str(a.shape).encode())
                h.update(a.tobytes())
        return h.hexdigest()[:16]
