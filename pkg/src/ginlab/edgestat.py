"""Local eigenvalue statistics at the spectral edge.

Eigenvalues near an edge point z0 are mapped to zhat = scale (lam - z0) / z0
and histogrammed on square bins lying inside the disk |zhat| <= W. Counts are
compared with the limiting one-point function by a chi-square test after
merging bins to at least five expected counts.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import kernels, model, sampler

DEFAULT_WINDOW = 5.0
DEFAULT_BIN = 0.25
MIN_EXPECTED = 5.0
# The real-edge Pfaffian formula counts each conjugate pair once; the
# empirical density counts both members (see notes on normalization).
SE_REAL_EDGE_FACTOR = 2.0
DENSE_LIMIT = 192


class MergedBinWarning(UserWarning):
    pass


class OutlierAmbiguityWarning(UserWarning):
    pass


@dataclass
class BinGrid:
    centers: np.ndarray
    side: float
    window: float

    @property
    def area(self):
        return self.side * self.side

    def index(self, zhat):
        """Bin index per point; -1 outside every bin."""
        zhat = np.asarray(zhat)
        k = math.ceil(self.window / self.side)
        ix = np.floor(zhat.real / self.side).astype(int) + k
        iy = np.floor(zhat.imag / self.side).astype(int) + k
        lookup = self._lookup()
        ok = (ix >= 0) & (iy >= 0) & (ix < 2 * k) & (iy < 2 * k)
        out = np.full(zhat.shape, -1, dtype=int)
        out[ok] = lookup[ix[ok], iy[ok]]
        return out

    def _lookup(self):
        k = math.ceil(self.window / self.side)
        table = np.full((2 * k, 2 * k), -1, dtype=int)
        ix = np.round(self.centers.real / self.side - 0.5).astype(int) + k
        iy = np.round(self.centers.imag / self.side - 0.5).astype(int) + k
        table[ix, iy] = np.arange(self.centers.size)
        return table


def make_grid(window=DEFAULT_WINDOW, side=DEFAULT_BIN):
    """Square bins of side ``side`` aligned to the axes, kept when the whole
    bin lies in |zhat| <= window."""
    k = math.ceil(window / side)
    lo = (np.arange(-k, k) * side)
    re, im = np.meshgrid(lo, lo, indexing="ij")
    far = np.maximum(np.abs(re), np.abs(re + side)) ** 2 + np.maximum(np.abs(im), np.abs(im + side)) ** 2
    keep = far <= window * window + 1e-12
    centers = (re[keep] + side / 2) + 1j * (im[keep] + side / 2)
    return BinGrid(centers, side, window)


def _bin_average(fn, grid, order=2):
    x, w = np.polynomial.legendre.leggauss(order)
    off = 0.5 * grid.side * x
    pts = grid.centers[:, None, None] + off[None, :, None] + 1j * off[None, None, :]
    vals = fn(pts)
    return np.einsum("bij,i,j->b", vals, w, w) / 4.0


def merge_groups(expected, minimum=MIN_EXPECTED):
    """Greedy merge in bin order until each group expects ``minimum`` counts;
    a short tail joins the last group."""
    groups, cur, acc = [], [], 0.0
    for i, e in enumerate(expected):
        cur.append(i)
        acc += e
        if acc >= minimum:
            groups.append(cur)
            cur, acc = [], 0.0
    if cur:
        if groups:
            groups[-1].extend(cur)
        else:
            groups.append(cur)
    return [np.asarray(g) for g in groups]


def chi_square(counts, expected, minimum=MIN_EXPECTED):
    groups = merge_groups(expected, minimum)
    o = np.array([counts[g].sum() for g in groups], dtype=float)
    e = np.array([expected[g].sum() for g in groups], dtype=float)
    live = e > 0
    stat = float(np.sum((o[live] - e[live]) ** 2 / e[live]))
    dof = int(live.sum())
    p = float(stats.chi2.sf(stat, dof)) if dof else float("nan")
    return stat, dof, p, groups


@dataclass
class EdgeReport:
    frame: kernels.EdgeFrame
    n: int
    replicas: int
    grid: BinGrid
    counts: np.ndarray
    empirical: np.ndarray
    predicted: np.ndarray
    se: np.ndarray
    chi_square: float
    dof: int
    p_value: float
    max_abs_z: float
    collected: int
    discarded: int = 0
    merged_bins: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.p_value > 0.01

    def to_dict(self):
        return {
            "z0": [self.frame.z0.real, self.frame.z0.imag], "beta": self.frame.beta, "t": self.frame.t,
            "N": self.n, "replicas": self.replicas, "window": self.grid.window, "bin": self.grid.side,
            "bins": int(self.counts.size), "collected": self.collected, "discarded": self.discarded,
            "chi_square": self.chi_square, "dof": self.dof, "p_value": self.p_value,
            "max_abs_z": self.max_abs_z, "merged_bins": self.merged_bins, "pass": self.passed,
            **self.extra,
        }

    def write_profile_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["re_zhat", "im_zhat", "empirical", "predicted", "se"])
            for c, e, p, s in zip(self.grid.centers, self.empirical, self.predicted, self.se):
                wr.writerow([f"{c.real:.6g}", f"{c.imag:.6g}", f"{e:.10g}", f"{p:.10g}", f"{s:.10g}"])

    def write_dat(self, path):
        """Whitespace columns for gnuplot, one blank line between Re columns."""
        order = np.lexsort((self.grid.centers.imag, self.grid.centers.real))
        with open(path, "w") as fh:
            fh.write("# re_zhat im_zhat empirical predicted se\n")
            last = None
            for i in order:
                c = self.grid.centers[i]
                if last is not None and c.real != last:
                    fh.write("\n")
                last = c.real
                fh.write(f"{c.real:.6g} {c.imag:.6g} {self.empirical[i]:.8g} {self.predicted[i]:.8g} {self.se[i]:.8g}\n")

    def write(self, directory, stem="profile"):
        import os

        os.makedirs(directory, exist_ok=True)
        self.write_profile_csv(os.path.join(directory, f"{stem}.csv"))
        self.write_dat(os.path.join(directory, f"{stem}.dat"))
        with open(os.path.join(directory, "report.json"), "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def _method(config, method):
    if method != "auto":
        return method
    if sampler.band_supported(config) and config.matrix_dim > DENSE_LIMIT:
        return "band"
    return "dense"


def collect_zhat(config, frame, window=DEFAULT_WINDOW, replicas=200, method="auto", threads=None, first=0):
    """Scaled eigenvalues within |zhat| <= window, one array per kept replica."""
    if abs(abs(frame.z0) - 1) > 1e-12:
        raise ValueError("edge point must lie on the unit circle")
    scale = frame.scale(config.n)
    radius = window / scale
    how = _method(config, method)

    def one(r):
        s = sampler.window_spectrum(config, r, frame.z0, radius, method=how)
        return s

    samples = sampler.replica_map(one, range(first, first + replicas), threads)
    kept = [frame.to_zhat(s.eigenvalues, config.n) for s in samples if not s.discarded]
    return kept, replicas - len(kept)


def _report(frame, config, grid, zhats, discarded, predict):
    m = len(zhats)
    allz = np.concatenate(zhats) if zhats else np.zeros(0, complex)
    idx = grid.index(allz)
    counts = np.bincount(idx[idx >= 0], minlength=grid.centers.size)
    area = grid.area
    empirical = counts / (m * area)
    se = np.sqrt(counts) / (m * area)
    predicted = predict(grid)
    expected = predicted * m * area
    stat, dof, p, groups = chi_square(counts, expected)
    merged = sum(len(g) for g in groups if len(g) > 1)
    if merged:
        warnings.warn(f"{merged} bins merged to reach {MIN_EXPECTED:g} expected counts", MergedBinWarning)
    o = np.array([counts[g].sum() for g in groups], dtype=float)
    e = np.array([expected[g].sum() for g in groups], dtype=float)
    zs = np.abs(o - e) / np.sqrt(np.maximum(e, 1e-300))
    return EdgeReport(
        frame, config.n, m, grid, counts, empirical, predicted, se, stat, dof, p,
        float(zs.max()) if zs.size else 0.0, int(counts.sum()), discarded, merged,
    )


def predicted_density(frame, zhat):
    """One-point prediction at rotated coordinates zhat = scale (lam - z0) / z0;
    the kernel module takes the unrotated scale (lam - z0) and rotates itself."""
    return kernels.density(frame, frame.z0 * np.asarray(zhat))


def predicted_profile(frame, grid, factor=1.0):
    return factor * kernels.clamp(_bin_average(lambda z: predicted_density(frame, z), grid))


def collect_edge(config, frame, window=DEFAULT_WINDOW, side=DEFAULT_BIN, replicas=200,
                 method="auto", threads=None, first=0):
    """Histogram the scaled edge eigenvalues and test them against the kernel diagonal."""
    if config.beta != frame.beta:
        raise ValueError("config and frame disagree on beta")
    if window > 6:
        raise ValueError("window must be at most 6")
    grid = make_grid(window, side)
    zhats, dropped = collect_zhat(config, frame, window, replicas, method, threads, first)
    factor = SE_REAL_EDGE_FACTOR if frame.real_edge else 1.0
    rep = _report(frame, config, grid, zhats, dropped, lambda g: predicted_profile(frame, g, factor))
    rep.extra["prediction_factor"] = factor
    return rep


def collect_edge_se(config, frame, window=DEFAULT_WINDOW, side=DEFAULT_BIN, replicas=400,
                    method="auto", threads=None, first=0):
    """Quaternion edge statistics; both members of each conjugate pair counted.

    At a real edge the report also carries the chi-square against the
    printed Pfaffian normalization (factor 1).
    """
    if frame.beta != 4:
        raise ValueError("collect_edge_se needs a beta = 4 frame")
    if not frame.real_edge and frame.z0.imag <= 0:
        raise ValueError("complex edge point must have Im z0 > 0")
    rep = collect_edge(config, frame, window, side, replicas, method, threads, first)
    if frame.real_edge:
        raw = predicted_profile(frame, rep.grid, 1.0)
        stat, dof, p, _ = chi_square(rep.counts, raw * rep.replicas * rep.grid.area)
        rep.extra["printed_normalization"] = {"chi_square": stat, "dof": dof, "p_value": p}
    return rep


def axis_strip(zhats, replicas, frame, window=DEFAULT_WINDOW, half_height=0.05, factor=None):
    """Counts in the strip |Im zhat| < half_height against the predicted mass there."""
    if factor is None:
        factor = SE_REAL_EDGE_FACTOR if frame.real_edge else 1.0
    allz = np.concatenate(zhats) if len(zhats) else np.zeros(0, complex)
    inside = (np.abs(allz.imag) < half_height) & (np.abs(allz.real) <= window)
    count = int(inside.sum())
    x, w = np.polynomial.legendre.leggauss(24)
    xs = window * x
    y, v = np.polynomial.legendre.leggauss(6)
    ys = half_height * y
    dens = predicted_density(frame, xs[:, None] + 1j * ys[None, :])
    mass = factor * window * half_height * float(np.einsum("ij,i,j->", dens, w, v))
    expected = mass * replicas
    z = (count - expected) / math.sqrt(max(expected, 1.0))
    return {"count": count, "expected": expected, "zscore": z, "pass": abs(z) <= 3}


# --- two-sample comparisons ---------------------------------------------------------

@dataclass
class InvarianceReport:
    t_a: int
    t_b: int
    chi_square: float
    dof: int
    p_value: float
    replicas: tuple

    @property
    def expect_equal(self):
        return self.t_a == self.t_b

    @property
    def passed(self):
        if self.expect_equal:
            return self.p_value > 0.01
        return self.p_value < 0.001 and min(self.replicas) >= 500

    def to_dict(self):
        return {
            "t_a": self.t_a, "t_b": self.t_b, "chi_square": self.chi_square, "dof": self.dof,
            "p_value": self.p_value, "replicas": list(self.replicas),
            "expect_equal": self.expect_equal, "pass": self.passed,
        }


def two_sample(counts_a, m_a, counts_b, m_b, minimum=10.0):
    """Two-sample chi-square for Poisson bin counts with unequal replica numbers."""
    total = counts_a + counts_b
    groups = merge_groups(total.astype(float), minimum)
    oa = np.array([counts_a[g].sum() for g in groups], dtype=float)
    ob = np.array([counts_b[g].sum() for g in groups], dtype=float)
    k1 = math.sqrt(m_b / m_a)
    k2 = math.sqrt(m_a / m_b)
    live = (oa + ob) > 0
    stat = float(np.sum((k1 * oa[live] - k2 * ob[live]) ** 2 / (oa[live] + ob[live])))
    dof = int(live.sum()) - (1 if m_a == m_b else 0)
    p = float(stats.chi2.sf(stat, dof)) if dof > 0 else float("nan")
    return stat, dof, p


def histogram(zhats, grid):
    allz = np.concatenate(zhats) if zhats else np.zeros(0, complex)
    idx = grid.index(allz)
    return np.bincount(idx[idx >= 0], minlength=grid.centers.size)


def invariance_test(spec_a, spec_b, frame, n, replicas=200, window=DEFAULT_WINDOW, side=DEFAULT_BIN,
                    seed=0, method="auto", threads=None, replicas_b=None):
    """Compare edge profiles of two Jordan specs sharing the edge point."""
    t_a = model.describe_criticality(spec_a, frame.z0).t
    t_b = model.describe_criticality(spec_b, frame.z0).t
    grid = make_grid(window, side)
    mb = replicas_b or replicas
    cfg_a = model.EnsembleConfig(frame.beta, n, spec_a, seed=seed)
    cfg_b = model.EnsembleConfig(frame.beta, n, spec_b, seed=seed + 1)
    za, _ = collect_zhat(cfg_a, frame, window, replicas, method, threads)
    zb, _ = collect_zhat(cfg_b, frame, window, mb, method, threads)
    stat, dof, p = two_sample(histogram(za, grid), len(za), histogram(zb, grid), len(zb))
    return InvarianceReport(t_a, t_b, stat, dof, p, (len(za), len(zb)))


# --- scaling fits -------------------------------------------------------------------

@dataclass
class ScalingFit:
    ns: tuple
    mean_spread: np.ndarray
    spread_se: np.ndarray
    slope: float
    slope_se: float
    expected: float = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        ns = tuple(int(n) for n in self.ns)
        if len(ns) < 4 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("need at least four strictly increasing dimensions")
        self.ns = ns

    def to_dict(self):
        return {
            "Ns": list(self.ns), "mean_spread": [float(x) for x in self.mean_spread],
            "spread_se": [float(x) for x in self.spread_se], "slope": self.slope,
            "slope_se": self.slope_se, "expected": self.expected, **self.extra,
        }


def _weighted_fit(x, y, se):
    w = 1.0 / np.asarray(se) ** 2
    xm = np.sum(w * x) / w.sum()
    ym = np.sum(w * y) / w.sum()
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    return float(slope), float(math.sqrt(1.0 / sxx))


def outlier_scaling(theta, p, ns, replicas=300, truncation=200, seed=0, threads=None):
    """Fluctuation size of the p outliers around theta versus N.

    The spread of a replica is the largest distance from theta among its p
    nearest eigenvalues; log(mean spread) is fitted against log N.
    """
    theta = complex(theta)
    if p not in (1, 2, 3):
        raise ValueError("p must be 1, 2 or 3")
    if abs(theta) < 1.3:
        raise ValueError("|theta| must be at least 1.3")
    ns = tuple(ns)
    if ns[-1] < 16 * ns[0]:
        raise ValueError("dimensions must span at least a factor 16")
    spec = model.JordanSpec((theta,), (((p, 1),),))
    means, ses, ambiguous, angles = [], [], [], []
    for n in ns:
        cfg = model.EnsembleConfig(2, n, spec, seed=seed)
        samples = sampler.replica_map(
            lambda r: sampler.outlier_spectrum(cfg, r, theta, p, min(truncation, n)), range(replicas), threads
        )
        spread = np.empty(replicas)
        amb = 0
        ang = []
        for i, s in enumerate(samples):
            d = np.abs(s.eigenvalues - theta)
            spread[i] = d[p - 1]
            if d.size > p and d[p] <= 2 * d[p - 1]:
                amb += 1
            if p == 2:
                u = (s.eigenvalues[:2] - theta)
                ang.append(abs(np.angle(u[0] / u[1])))
        means.append(spread.mean())
        ses.append(spread.std(ddof=1) / math.sqrt(replicas))
        ambiguous.append(amb / replicas)
        if p == 2:
            angles.append(float(np.mean(ang)))
    if max(ambiguous) > 0.05:
        warnings.warn(
            f"outlier identification ambiguous in up to {max(ambiguous):.0%} of replicas", OutlierAmbiguityWarning
        )
    means = np.asarray(means)
    ses = np.asarray(ses)
    slope, slope_se = _weighted_fit(np.log(ns), np.log(means), ses / means)
    extra = {"ambiguous_fraction": ambiguous, "theta": [theta.real, theta.imag], "p": p}
    if p == 2:
        extra["mean_pair_angle"] = angles
    return ScalingFit(ns, means, ses, slope, slope_se, -1.0 / (2 * p), extra)


def critical_scaling(z0, p, theta_hat, ns, replicas=200, window=DEFAULT_WINDOW, seed=0,
                     method="auto", threads=None):
    """Mean Re zhat in the edge window with theta = z0 + N^(-1/(4p)) theta_hat.

    In the critical window the profile has an N-independent limit, so the
    fitted slope of the mean against log N should vanish.
    """
    z0 = complex(z0)
    frame = kernels.EdgeFrame(z0, 2, 1)
    means, ses = [], []
    for n in ns:
        theta = z0 + n ** (-1.0 / (4 * p)) * complex(theta_hat)
        spec = model.JordanSpec((theta,), (((p, 1),),))
        cfg = model.EnsembleConfig(2, n, spec, seed=seed)
        zhats, _ = collect_zhat(cfg, frame, window, replicas, method, threads)
        per = np.array([z.real.mean() if z.size else np.nan for z in zhats])
        per = per[np.isfinite(per)]
        means.append(per.mean())
        ses.append(per.std(ddof=1) / math.sqrt(per.size))
    means = np.asarray(means)
    ses = np.asarray(ses)
    slope, slope_se = _weighted_fit(np.log(ns), means, ses)
    return ScalingFit(tuple(ns), means, ses, slope, slope_se, 0.0,
                      {"theta_hat": [complex(theta_hat).real, complex(theta_hat).imag], "p": p,
                       "stable": abs(slope) <= 3 * slope_se})
