"""
Brute-force ground truth at small sizes.

Everything here enumerates all trees of a given size and weights them with
their exact model probability, so results are exact up to float evaluation
of the toll values themselves.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from . import _kernels as K
from .tolls import TollSpec, evaluate_additive
from .trees import (
    ModelParams,
    count_dary,
    enumerate_dary,
    enumerate_model,
    enumerate_plane,
    gport_total_weight,
    tree_probability,
    weight_port,
)

__all__ = [
    "ExactDistribution",
    "ExpectedTollProfile",
    "exact_distribution",
    "exact_moments",
    "exact_toll_profile",
    "verify_uniformity",
    "verify_model_probability",
    "verify_mean_formula",
]

BUCKET = 1e-12


@dataclass
class ExactDistribution:
    """Exact law of ``F(T_n)``: ``support`` maps bucketed values to probabilities.

    ``atoms`` keeps the unbucketed ``(value, probability)`` pairs, one per tree
    class, and is what the moment routines use.
    """

    n: int
    model: str
    toll: str
    support: dict
    atoms: list = field(repr=False, default_factory=list)

    def total_probability(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))

    def to_csv(self) -> str:
        """``value,probability_numerator,probability_denominator`` rows."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", "probability_numerator", "probability_denominator"])
        for value in sorted(self.support):
            p = self.support[value]
            writer.writerow([repr(value), p.numerator, p.denominator])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"n": self.n, "model": self.model, "toll": self.toll,
                "support": [[v, str(p)] for v, p in sorted(self.support.items())]}


@dataclass
class ExpectedTollProfile:
    """``E f(T_m)`` for ``m = 1..M`` with per-entry provenance.

    ``provenance[m-1]`` is ``"EXACT"`` or ``"MC"``; ``stderr`` is zero for
    exact entries.
    """

    values: list
    provenance: list
    stderr: list
    samples: list = field(default_factory=list)
    model: str = ""
    toll: str = ""

    def __len__(self):
        return len(self.values)

    def is_exact(self, upto: int | None = None) -> bool:
        upto = len(self.values) if upto is None else upto
        return len(self.values) >= upto and all(p == "EXACT" for p in self.provenance[:upto])

    def to_dict(self) -> dict:
        return {"model": self.model, "toll": self.toll, "values": list(self.values),
                "provenance": list(self.provenance), "stderr": list(self.stderr)}


def _bucket(value: float) -> float:
    return round(value / BUCKET) * BUCKET


def exact_distribution(model, toll: TollSpec, n: int, cutoff: int | None = None) -> ExactDistribution:
    """Exact distribution of ``F(T_n)`` by full enumeration."""
    model = ModelParams.parse(model)
    atoms = []
    support = {}
    for tree in enumerate_model(model, n, cutoff):
        p = tree_probability(model, tree)
        if p == 0:
            continue
        value = evaluate_additive(toll, tree).value
        atoms.append((value, p))
        key = _bucket(value)
        support[key] = support.get(key, Fraction(0)) + p
    return ExactDistribution(n, str(model), toll.label(), support, atoms)


def exact_moments(model, toll: TollSpec, n: int, order: int = 1, central: bool = False,
                  dist: ExactDistribution | None = None) -> float:
    """``E F^r`` (or ``E (F - E F)^r`` when ``central``) from the exact distribution."""
    dist = exact_distribution(model, toll, n) if dist is None else dist
    probs = [float(p) for _, p in dist.atoms]
    values = [v for v, _ in dist.atoms]
    if order == 0:
        return 1.0
    mean = math.fsum(p * v for p, v in zip(probs, values))
    if not central:
        if order == 1:
            return mean
        return math.fsum(p * v ** order for p, v in zip(probs, values))
    return math.fsum(p * (v - mean) ** order for p, v in zip(probs, values))


def exact_toll_profile(model, toll: TollSpec, M: int, cutoff: int | None = None) -> ExpectedTollProfile:
    """``E f(T_m)`` for ``m = 1..M`` by enumeration (toll at the root only)."""
    model = ModelParams.parse(model)
    values = []
    for m in range(1, M + 1):
        acc = []
        for tree in enumerate_model(model, m, cutoff):
            p = tree_probability(model, tree)
            if p:
                acc.append(float(p) * float(toll(tree)))
        values.append(math.fsum(acc))
    return ExpectedTollProfile(values, ["EXACT"] * M, [0.0] * M, [0] * M, str(model), toll.label())


def _tree_code(tree) -> int:
    base = tree.n * tree.d
    code = 0
    for v in range(tree.n - 1, 0, -1):
        code = code * base + tree.parent[v] * tree.d + tree.slot[v]
    return code


def verify_uniformity(d: int, n: int, samples: int, seed: int, generator=None,
                      workers: int = 1) -> dict:
    """Chi-square test of a d-ary generator against the uniform law on all trees.

    With ``generator=None`` the compiled sampler used by the Monte Carlo
    engine is tested; otherwise ``generator(rng)`` must return a
    ``DAryIncreasingTree`` and is called ``samples`` times.
    """
    trees = list(enumerate_dary(d, n))
    index = {_tree_code(t): i for i, t in enumerate(trees)}
    counts = np.zeros(len(trees), dtype=np.int64)
    outside = 0
    if generator is None:
        from .montecarlo import _set_workers

        _set_workers(workers)
        codes = np.empty(samples, dtype=np.int64)
        K.sample_dary_codes(d, n, seed, 0, samples, codes)
        uniq, cnt = np.unique(codes, return_counts=True)
        for c, k in zip(uniq.tolist(), cnt.tolist()):
            if c in index:
                counts[index[c]] += k
            else:
                outside += k
    else:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            t = generator(rng)
            i = index.get(_tree_code(t))
            if i is None:
                outside += 1
            else:
                counts[i] += 1
    cells = len(trees)
    expected = samples / cells
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    df = cells - 1
    if df == 0:
        p_value, quantile = 1.0, 0.0
    else:
        p_value = float(stats.chi2.sf(chi2, df))
        quantile = float(stats.chi2.ppf(0.999, df))
    passed = outside == 0 and (df == 0 or chi2 < quantile)
    return {"check": "uniformity", "d": d, "n": n, "samples": samples, "seed": seed,
            "cells": cells, "chi2": chi2, "df": df, "p_value": p_value,
            "quantile_0.999": quantile, "outside_support": outside, "passed": passed}


def verify_model_probability(alpha, n: int) -> dict:
    """Exact check ``P(T) * total_weight == w(T)`` over every PORT of size ``n``."""
    alpha = Fraction(alpha)
    model = ModelParams.gport(alpha)
    total = gport_total_weight(alpha, n)
    mismatches, prob_sum, checked = [], Fraction(0), 0
    for tree in enumerate_plane(n):
        p = tree_probability(model, tree)
        w = weight_port(alpha, tree)
        prob_sum += p
        checked += 1
        if p * total != w:
            mismatches.append({"tree": tree.to_text(), "probability": str(p), "weight": str(w)})
    passed = not mismatches and prob_sum == 1
    return {"check": "gport-probability", "alpha": str(alpha), "n": n, "trees": checked,
            "total_weight": str(total), "probability_sum": str(prob_sum),
            "mismatches": mismatches[:5], "passed": passed}


def verify_mean_formula(model, toll: TollSpec, n: int, tol: float = 1e-12) -> dict:
    """Closed mean formula from the exact toll profile vs enumeration of ``F``."""
    from .constants import exact_mean

    model = ModelParams.parse(model if not isinstance(model, int) else ModelParams.dary(model))
    profile = exact_toll_profile(model, toll, n)
    formula = exact_mean(model, toll, n, profile)
    brute = exact_moments(model, toll, n, 1)
    diff = abs(formula - brute)
    return {"check": "mean-formula", "model": str(model), "toll": toll.label(), "n": n,
            "formula": formula, "enumeration": brute, "abs_error": diff, "tolerance": tol,
            "passed": diff <= tol}


def count_check(d: int, n: int) -> dict:
    enumerated = sum(1 for _ in enumerate_dary(d, n))
    formula = count_dary(d, n)
    return {"check": "count", "d": d, "n": n, "enumerated": enumerated, "formula": formula,
            "passed": enumerated == formula}
