"""
Monte Carlo simulation of additive functionals and normality diagnostics.

Sample ``i`` of a run with master seed ``s`` uses the splitmix64 stream
``stream_seed(s, i)`` (see ``_kernels``).  Samples are processed in fixed
blocks and block statistics are folded in block order, so a run is
bit-reproducible for a given seed regardless of the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import special

from . import _kernels as K
from .oracle import ExpectedTollProfile, exact_toll_profile
from .tolls import TollSpec, evaluate_additive
from .trees import ModelParams, ParameterError, count_model, enumeration_cutoff, grow

__all__ = [
    "SampleStats",
    "NormalityReport",
    "simulate",
    "normality_report",
    "expected_toll_profile_mc",
    "estimate_toll_decay",
    "MAX_WORK",
]

BLOCK = 8192
MAX_WORK = 5 * 10**10
HIST_BINS = 201
HIST_HALF_WIDTH = 6.0
_EXACT_PROFILE_TREES = 20_000


def _set_workers(workers: int) -> int:
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    w = min(int(workers), numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(w)
    return w


@dataclass
class SampleStats:
    """Streaming count/mean/central moments up to order 4, plus a fixed-bin histogram.

    ``m2``, ``m3``, ``m4`` are sums of powers of deviations from the mean.
    Merging uses the pairwise update formulas, so ``a.merge(b)`` equals the
    statistics of the concatenated sample up to rounding.
    """

    n: int = 0
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0
    minimum: float = math.inf
    maximum: float = -math.inf
    edges: np.ndarray | None = None
    hist: np.ndarray | None = None
    underflow: int = 0
    overflow: int = 0
    lattice: float | None = None
    model: str = ""
    toll: str = ""
    seed_manifest: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    values_sample: list = field(default_factory=list)

    # -- accumulation -----------------------------------------------------

    def _combine(self, nb, mb, m2b, m3b, m4b):
        na = self.count
        if nb == 0:
            return
        if na == 0:
            self.count, self.mean, self.m2, self.m3, self.m4 = nb, mb, m2b, m3b, m4b
            return
        n = na + nb
        delta = mb - self.mean
        d_n = delta / n
        m2a, m3a, m4a = self.m2, self.m3, self.m4
        self.mean = self.mean + nb * d_n
        self.m2 = m2a + m2b + delta * d_n * na * nb
        self.m3 = (m3a + m3b + delta * d_n * d_n * na * nb * (na - nb)
                   + 3.0 * d_n * (na * m2b - nb * m2a))
        self.m4 = (m4a + m4b + delta * d_n ** 3 * na * nb * (na * na - na * nb + nb * nb)
                   + 6.0 * d_n * d_n * (na * na * m2b + nb * nb * m2a)
                   + 4.0 * d_n * (na * m3b - nb * m3a))
        self.count = n

    def push(self, x: float):
        self.push_many(np.array([x], dtype=float))

    def push_many(self, values):
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return
        mb = float(v.mean())
        dev = v - mb
        dev2 = dev * dev
        self._combine(v.size, mb, float(dev2.sum()), float((dev2 * dev).sum()),
                      float((dev2 * dev2).sum()))
        self.minimum = min(self.minimum, float(v.min()))
        self.maximum = max(self.maximum, float(v.max()))
        if self.edges is not None:
            self._histogram(v)

    def _histogram(self, v):
        idx = np.searchsorted(self.edges, v, side="right") - 1
        nbins = len(self.edges) - 1
        self.underflow += int((idx < 0).sum())
        self.overflow += int((idx >= nbins).sum())
        inside = idx[(idx >= 0) & (idx < nbins)]
        self.hist += np.bincount(inside, minlength=nbins)

    def set_histogram(self, edges):
        self.edges = np.asarray(edges, dtype=float)
        self.hist = np.zeros(len(self.edges) - 1, dtype=np.int64)

    def merge(self, other: "SampleStats") -> "SampleStats":
        """Statistics of the union of both samples (neither input is modified)."""
        if self.edges is not None and other.edges is not None and not np.array_equal(self.edges, other.edges):
            raise ParameterError("cannot merge histograms with different bins")
        out = SampleStats(n=self.n or other.n, model=self.model or other.model,
                          toll=self.toll or other.toll)
        out.count, out.mean, out.m2, out.m3, out.m4 = self.count, self.mean, self.m2, self.m3, self.m4
        out._combine(other.count, other.mean, other.m2, other.m3, other.m4)
        out.minimum = min(self.minimum, other.minimum)
        out.maximum = max(self.maximum, other.maximum)
        edges = self.edges if self.edges is not None else other.edges
        if edges is not None:
            out.set_histogram(edges)
            for s in (self, other):
                if s.hist is not None:
                    out.hist += s.hist
                out.underflow += s.underflow
                out.overflow += s.overflow
        out.lattice = self.lattice if self.lattice is not None else other.lattice
        out.seed_manifest = self.seed_manifest + other.seed_manifest
        return out

    # -- summaries --------------------------------------------------------

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(max(self.variance, 0.0))

    @property
    def skewness(self) -> float:
        if self.m2 <= 0:
            return 0.0
        return math.sqrt(self.count) * self.m3 / self.m2 ** 1.5

    @property
    def excess_kurtosis(self) -> float:
        if self.m2 <= 0:
            return 0.0
        return self.count * self.m4 / (self.m2 * self.m2) - 3.0

    def to_dict(self) -> dict:
        out = {
            "n": self.n, "count": self.count, "mean": self.mean, "variance": self.variance,
            "skewness": self.skewness, "excess_kurtosis": self.excess_kurtosis,
            "min": self.minimum, "max": self.maximum, "model": self.model, "toll": self.toll,
            "lattice": self.lattice, "seed_manifest": self.seed_manifest,
            "extras": self.extras,
        }
        if self.edges is not None:
            out["histogram"] = {"edges": self.edges.tolist(), "counts": self.hist.tolist(),
                                "underflow": self.underflow, "overflow": self.overflow}
        return out

    def values_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample", "value"])
        for i, x in enumerate(self.values_sample):
            w.writerow([i, repr(float(x))])
        return buf.getvalue()


def _detect_lattice(v: np.ndarray):
    """Common span ``h`` with all values on ``v[0] + h*Z``, else ``None``."""
    u = np.unique(v)
    if len(u) < 2 or len(u) > max(64, len(v) // 4):
        return None
    h = float(np.diff(u).min())
    if h <= 0:
        return None
    steps = (u - u[0]) / h
    if np.allclose(steps, np.round(steps), atol=1e-6, rtol=0):
        return h, float(u[0])
    return None


def _histogram_edges(first_block: np.ndarray, lattice, bins=HIST_BINS):
    center = float(first_block.mean())
    scale = float(first_block.std())
    if scale == 0:
        return None, None
    lo = center - HIST_HALF_WIDTH * scale
    if lattice == "auto":
        lattice = _detect_lattice(first_block)
    elif isinstance(lattice, (int, float)):
        lattice = (float(lattice), 0.0)
    if lattice:
        h, origin = lattice
        width = h * max(1, round(2 * HIST_HALF_WIDTH * scale / (bins * h)))
        start = origin + h * (math.floor((lo - origin) / h) + 0.5)
        return start + width * np.arange(bins + 1), h
    return np.linspace(lo, center + HIST_HALF_WIDTH * scale, bins + 1), None


def _model_args(model: ModelParams):
    if model.variant == "dary":
        return K.MODEL_DARY, model.d, 1.0
    if model.variant == "gport":
        return K.MODEL_GPORT, 2, float(model.alpha)
    return K.MODEL_RECURSIVE, 2, 1.0


def _run_block(model, toll, n, seed, first, count):
    """Values ``F``, root tolls and bound violations for one block of samples."""
    F = np.empty(count)
    froot = np.empty(count)
    viol = np.zeros(count, dtype=np.int64)
    if toll.kernel is not None:
        code, d, alpha = _model_args(model)
        K.simulate_block(code, d, alpha, n, toll.kernel[0], float(toll.kernel[1]),
                         np.uint64(seed), first, count, F, froot, viol)
        return F, froot, viol
    for i in range(count):
        rng = np.random.default_rng([int(seed), first + i])
        tree = grow(model, n, rng)
        F[i] = evaluate_additive(toll, tree).value
        froot[i] = float(toll(tree))
    return F, froot, viol


def _check_budget(n, samples):
    if n < 1 or samples < 1:
        raise ParameterError("n and samples must be positive")
    if n * samples > MAX_WORK:
        raise ParameterError(f"n * samples = {n * samples:.3g} exceeds the budget {MAX_WORK:.3g}")


def simulate(model, toll: TollSpec, n: int, samples: int, seed: int, workers: int = 1,
             histogram: bool = True, lattice="auto", keep_values: int = 0,
             block: int = BLOCK) -> SampleStats:
    """Sample ``F(T_n)`` ``samples`` times and accumulate streaming statistics.

    Built-in tolls run in compiled kernels (``workers`` threads); other tolls
    fall back to the Python tree types, one sample at a time.

    The histogram has 201 bins spanning six standard deviations either side of
    the first block's mean.  For lattice-valued functionals (detected from the
    first block, or given as ``lattice=h``) the bin edges sit at half-lattice
    points so that the binned CDF is exact at every edge.
    """
    model = ModelParams.parse(model)
    _check_budget(n, samples)
    used = _set_workers(workers)
    stats = SampleStats(n=n, model=str(model), toll=toll.label())
    violations = 0
    for b, first in enumerate(range(0, samples, block)):
        count = min(block, samples - first)
        F, _, viol = _run_block(model, toll, n, seed, first, count)
        violations += int(viol.sum())
        if b == 0 and histogram:
            edges, h = _histogram_edges(F, lattice)
            if edges is not None:
                stats.set_histogram(edges)
                stats.lattice = h
        if len(stats.values_sample) < keep_values:
            stats.values_sample.extend(F[: keep_values - len(stats.values_sample)].tolist())
        stats.push_many(F)
        stats.seed_manifest.append({"block": b, "first_sample": first, "count": count,
                                    "seed": int(seed)})
    stats.extras = {"workers": used, "block": block, "kernel": toll.kernel is not None,
                    "stream": "splitmix64, state0 = mix(mix(seed) + index * 0x9E3779B97F4A7C15)"}
    if toll.kernel is not None and toll.kernel[0] == K.TOLL_LOG_ROOT_SUBTREES:
        stats.extras["subtree_bound_violations"] = violations
    return stats


@dataclass
class NormalityReport:
    skewness: float
    skewness_se: float
    excess_kurtosis: float
    kurtosis_se: float
    ks_statistic: float
    mean_check: dict
    variance_check: dict
    sigma_zero: bool = False
    samples: int = 0
    n: int = 0
    truncation: dict = field(default_factory=dict)

    def gates(self, skew: float = 0.05, kurtosis: float = 0.1, ks: float = 0.01,
              variance_rel: float | None = None) -> dict:
        """Pass/fail of each normality gate."""
        out = {
            "skewness": abs(self.skewness) < skew,
            "excess_kurtosis": abs(self.excess_kurtosis) < kurtosis,
            "ks": self.ks_statistic < ks,
            "sigma_nonzero": not self.sigma_zero,
        }
        if variance_rel is not None:
            ratio = self.variance_check.get("ratio")
            out["variance"] = ratio is not None and abs(ratio - 1.0) < variance_rel
        return out

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ks_binned(stats: SampleStats) -> float:
    if stats.edges is None or stats.std == 0:
        return 0.0
    cum = stats.underflow + np.concatenate([[0], np.cumsum(stats.hist)])
    emp = cum / stats.count
    z = (stats.edges - stats.mean) / stats.std
    theo = special.ndtr(z)
    return float(np.max(np.abs(emp - theo)))


def normality_report(stats: SampleStats, constants=None) -> NormalityReport:
    """Moments, binned KS distance and mean/variance z-scores against the constants.

    The KS distance standardizes with the sample mean and deviation; the
    mean check uses ``mu*n + mu/(d-1)`` (d-ary) or ``mu*n - mu/(alpha+1)``
    (GPORT) and the variance check ``sigma2*n``.
    """
    N = stats.count
    if N < 4:
        raise ParameterError("need at least 4 samples")
    se_skew = math.sqrt(6.0 * N * (N - 1) / ((N - 2) * (N + 1) * (N + 3)))
    se_kurt = 2.0 * se_skew * math.sqrt((N * N - 1.0) / ((N - 3) * (N + 5)))
    sigma_zero = stats.m2 <= 0.0
    sem = stats.std / math.sqrt(N)
    mean_check = {"observed": stats.mean, "predicted": None, "z": None}
    var_check = {"observed": stats.variance, "observed_per_n": stats.variance / stats.n,
                 "predicted": None, "z": None, "ratio": None}
    truncation = {}
    if constants is not None:
        pred = constants.predicted_mean(stats.n)
        mean_check.update(predicted=pred,
                          z=(stats.mean - pred) / sem if sem > 0 else 0.0)
        if constants.sigma2 is not None:
            pv = constants.sigma2 * stats.n
            mu4 = stats.m4 / N
            var_se = math.sqrt(max(mu4 - stats.variance ** 2 * (N - 3) / (N - 1), 0.0) / N)
            var_check.update(predicted=pv, z=(stats.variance - pv) / var_se if var_se > 0 else 0.0,
                             ratio=stats.variance / pv if pv != 0 else None)
        truncation = {"method": constants.method, "K": constants.K, "N": constants.N,
                      "tail_bound": constants.tail_bound}
    return NormalityReport(
        skewness=stats.skewness, skewness_se=se_skew,
        excess_kurtosis=stats.excess_kurtosis, kurtosis_se=se_kurt,
        ks_statistic=_ks_binned(stats), mean_check=mean_check, variance_check=var_check,
        sigma_zero=sigma_zero, samples=N, n=stats.n, truncation=truncation)


def _root_toll_stats(model, toll, m, samples, seed, absolute=False):
    vals = []
    for first in range(0, samples, BLOCK):
        count = min(BLOCK, samples - first)
        _, froot, _ = _run_block(model, toll, m, seed, first, count)
        vals.append(np.abs(froot) if absolute else froot)
    v = np.concatenate(vals)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


def expected_toll_profile_mc(model, toll: TollSpec, sizes, samples: int, seed: int,
                             exact_upto: int | None = None, workers: int = 1) -> ExpectedTollProfile:
    """Profile ``E f(T_m)``, ``m = 1..max(sizes)``.

    Sizes up to ``exact_upto`` come from exact enumeration (default: sizes
    with at most 20000 trees); larger sizes are Monte Carlo estimates with
    standard errors.  Size ``m`` uses seed ``seed + m``.
    """
    model = ModelParams.parse(model)
    M = sizes if isinstance(sizes, int) else max(sizes)
    if exact_upto is None:
        exact_upto = 0
        while exact_upto < min(M, enumeration_cutoff(model)) and \
                count_model(model, exact_upto + 1) <= _EXACT_PROFILE_TREES:
            exact_upto += 1
    exact_upto = min(exact_upto, M)
    _set_workers(workers)
    prof = exact_toll_profile(model, toll, exact_upto) if exact_upto else \
        ExpectedTollProfile([], [], [], [], str(model), toll.label())
    for m in range(exact_upto + 1, M + 1):
        mean, se = _root_toll_stats(model, toll, m, samples, seed + m)
        prof.values.append(mean)
        prof.stderr.append(se)
        prof.provenance.append("MC")
        prof.samples.append(samples)
    return prof


def estimate_toll_decay(model, toll: TollSpec, sizes, samples: int, seed: int,
                        workers: int = 1) -> dict:
    """Monte Carlo ``E|f(T_k)|`` over a size grid and its fitted log-log slope.

    Advisory only: a finite sample cannot establish summability of the
    expected toll.
    """
    model = ModelParams.parse(model)
    _set_workers(workers)
    rows = []
    for k in sizes:
        mean, se = _root_toll_stats(model, toll, int(k), samples, seed + int(k), absolute=True)
        rows.append({"size": int(k), "mean_abs_toll": mean, "stderr": se})
    pos = [(r["size"], r["mean_abs_toll"]) for r in rows if r["mean_abs_toll"] > 0]
    slope = None
    if len(pos) >= 2:
        x = np.log([p[0] for p in pos])
        y = np.log([p[1] for p in pos])
        slope = float(np.polyfit(x, y, 1)[0])
    return {"model": str(model), "toll": toll.label(), "samples": samples, "seed": seed,
            "rows": rows, "loglog_slope": slope, "advisory": True}


def report_json(obj) -> str:
    """JSON text for reports containing numpy scalars."""
    def default(o):
        if isinstance(o, (np.integer, np.floating)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        return str(o)

    return json.dumps(obj, default=default, indent=2, sort_keys=True)
