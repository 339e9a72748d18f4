"""
Limit constants of additive functionals.

For d-ary increasing trees the mean and variance of ``F(T_n)`` grow like
``mu*n + mu/(d-1)`` and ``sigma2*n``; for GPORTs like ``mu*n - mu/(alpha+1)``
and ``sigma2*n``.  This module evaluates truncations of the tree series for
``mu`` and ``sigma2``, the weight functions in the variance double series, the
closed forms for fringe-subtree counts, and the exact finite-``n`` mean.

Truncating the tree sums at ``|T| <= K`` is the same as replacing the toll
by ``f * 1{|T| <= K}``, so every truncation is itself an exact constant of a
(finitely supported) toll.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .oracle import ExpectedTollProfile, exact_toll_profile
from .tolls import TollSpec, evaluate_additive
from .trees import (
    EnumerationLimitError,
    ModelParams,
    ParameterError,
    count_dary,
    enumerate_dary,
    enumerate_plane,
    enumeration_cutoff,
    path_tree,
    weight_port,
)

__all__ = [
    "TheoremConstants",
    "mu_enumeration",
    "mu_size_series",
    "sigma2_enumeration",
    "exact_mean",
    "size_only_profile",
    "phi",
    "phi_closed",
    "phi_quad",
    "phi_betainc",
    "phi_inner_product",
    "varphi",
    "varphi_inner_product",
    "fringe_constants",
    "gport_constants",
    "estimate_toll_decay",
    "DEFAULT_K",
]

ENUMERATION = "ENUMERATION"
SIZE_SERIES = "SIZE_SERIES"
CLOSED_FORM = "CLOSED_FORM"

DEFAULT_K = {2: 7, 3: 6}
# beyond this k the alternating closed form loses too many digits
PHI_CLOSED_MAX_K = 20


@dataclass
class TheoremConstants:
    mu: float
    sigma2: float | None
    K: int | None = None
    N: int | None = None
    tail_bound: float | None = None
    method: str = ENUMERATION
    model: str = ""
    toll: str = ""
    mu_sequence: list = field(default_factory=list)
    sigma2_sequence: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def predicted_mean(self, n: int) -> float:
        """``mu*n + mu/(d-1)`` (d-ary) or ``mu*n - mu/(alpha+1)`` (GPORT)."""
        model = ModelParams.parse(self.model)
        if model.variant == "dary":
            return self.mu * n + self.mu / (model.d - 1)
        if model.variant == "gport":
            return self.mu * n - self.mu / float(model.alpha + 1)
        return self.mu * n

    def to_dict(self) -> dict:
        out = asdict(self)
        out["extras"] = _jsonable(self.extras)
        return out

    def to_json(self, **kw) -> str:
        payload = {"schema_version": 1}
        payload.update(self.to_dict())
        return json.dumps(payload, **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _dary(model) -> ModelParams:
    if isinstance(model, ModelParams):
        return model
    if isinstance(model, int):
        return ModelParams.dary(model)
    return ModelParams.parse(model)


def _warn_unbounded(toll: TollSpec, d=None):
    if toll.sup(d) is None and not toll.bounded:
        warnings.warn(
            f"toll {toll.label()!r} is unbounded: the boundedness assumption behind the "
            "limit theorem fails, constants are formal truncations",
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# per-size sums over enumerated trees


@dataclass
class _SizeSums:
    S: list    # sum w f
    S2: list   # sum w f^2
    SF: list   # sum w f F
    W: list    # sum w


def _size_sums(model: ModelParams, toll: TollSpec, K: int, cutoff=None) -> _SizeSums:
    limit = enumeration_cutoff(model) if cutoff is None else cutoff
    if K > limit:
        raise EnumerationLimitError(f"truncation K={K} exceeds enumeration cutoff {limit}")
    out = _SizeSums([], [], [], [])
    for k in range(1, K + 1):
        if model.variant == "dary":
            trees = enumerate_dary(model.d, k, cutoff=limit)
        else:
            trees = enumerate_plane(k, cutoff=limit)
        s, s2, sf, w_tot = [], [], [], []
        for t in trees:
            w = 1.0 if model.variant == "dary" else float(weight_port(model.alpha, t))
            f = float(toll(t))
            w_tot.append(w)
            if f == 0.0:
                continue
            F = evaluate_additive(toll, t).value
            s.append(w * f)
            s2.append(w * f * f)
            sf.append(w * f * F)
        out.S.append(math.fsum(s))
        out.S2.append(math.fsum(s2))
        out.SF.append(math.fsum(sf))
        out.W.append(math.fsum(w_tot))
    return out


def _dary_denominators(d: int, K: int) -> list:
    # prod_{j=1}^k ((d-1)j + d), exact
    out, acc = [], 1
    for j in range(1, K + 1):
        acc *= (d - 1) * j + d
        out.append(acc)
    return out


def _gport_denominators(alpha: Fraction, K: int) -> list:
    out, acc = [], Fraction(1)
    for j in range(1, K + 1):
        acc *= (alpha + 1) * j + alpha
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# mu


def mu_enumeration(d, toll: TollSpec, K: int, cutoff: int | None = None) -> TheoremConstants:
    """``mu_K = (d-1) sum_{|T|<=K} f(T) / prod_{j<=|T|} ((d-1)j + d)``."""
    model = _dary(d)
    d = model.d
    t0 = time.perf_counter()
    sums = _size_sums(model, toll, K, cutoff)
    dens = _dary_denominators(d, K)
    terms = [(d - 1) * sums.S[k] / dens[k] for k in range(K)]
    seq = [math.fsum(terms[: k + 1]) for k in range(K)]
    sup = toll.sup(d)
    tail = None if sup is None else sup * d / ((d - 1) * K + d)
    return TheoremConstants(seq[-1], None, K=K, tail_bound=tail, method=ENUMERATION,
                            model=str(model), toll=toll.label(), mu_sequence=seq,
                            timings={"total_s": time.perf_counter() - t0})


def size_only_profile(toll: TollSpec, M: int, model=None) -> ExpectedTollProfile:
    """Exact profile of a size-only toll: ``E f(T_m) = f(any tree of size m)``."""
    if not toll.size_only:
        raise ParameterError(f"toll {toll.label()!r} is not size-only")
    vals = [float(toll(path_tree(m))) for m in range(1, M + 1)]
    return ExpectedTollProfile(vals, ["EXACT"] * M, [0.0] * M, [0] * M,
                               "" if model is None else str(model), toll.label())


def _series_weights(model: ModelParams, M: int) -> list:
    """Weight of ``E f(T_m)`` in the size-grouped series for mu."""
    if model.variant == "dary":
        d = model.d
        return [d * (d - 1) / (((d - 1) * m + 1) * ((d - 1) * m + d)) for m in range(1, M + 1)]
    if model.variant == "gport":
        a = model.alpha
        return [float(a * (a + 1) / (((a + 1) * m - 1) * ((a + 1) * m + a))) for m in range(1, M + 1)]
    return [1.0 / (m * (m + 1)) for m in range(1, M + 1)]


def _series_tail(model: ModelParams, N: int) -> float:
    # sum_{m > N} of the series weights, by telescoping
    if model.variant == "dary":
        d = model.d
        return d / ((d - 1) * N + d)
    if model.variant == "gport":
        a = model.alpha
        return float(a / ((a + 1) * N + a))
    return 1.0 / (N + 1)


def mu_size_series(model, profile: ExpectedTollProfile, N: int | None = None,
                   bound: float | None = None) -> TheoremConstants:
    """Truncated size-grouped series for ``mu`` from a profile of ``E f(T_m)``.

    d-ary: ``d(d-1) sum_m E f(T_m) / (((d-1)m+1)((d-1)m+d))``.  With a bound
    ``sup|f|`` the tail is at most ``bound * d / ((d-1)N + d)``.  Monte Carlo
    entries propagate their standard errors to ``extras['mu_stderr']``.
    """
    model = _dary(model)
    N = len(profile) if N is None else N
    if N > len(profile):
        raise ParameterError(f"profile covers m <= {len(profile)}, series needs N = {N}")
    weights = _series_weights(model, N)
    terms = [w * e for w, e in zip(weights, profile.values[:N])]
    seq = list(np.cumsum(terms))
    se = math.sqrt(math.fsum((w * s) ** 2 for w, s in zip(weights, profile.stderr[:N])))
    tail = None if bound is None else bound * _series_tail(model, N)
    return TheoremConstants(math.fsum(terms), None, N=N, tail_bound=tail, method=SIZE_SERIES,
                            model=str(model), toll=profile.toll,
                            mu_sequence=[float(x) for x in seq],
                            extras={"mu_stderr": se,
                                    "provenance": sorted(set(profile.provenance[:N]))})


def _exact_profile(model, toll: TollSpec, n: int) -> ExpectedTollProfile:
    # avoid enumeration where the toll's metadata makes it unnecessary
    if toll.size_only:
        return size_only_profile(toll, n, model)
    cut = toll.support_cutoff
    if cut is not None and cut < n:
        prof = exact_toll_profile(model, toll, cut)
        pad = n - cut
        prof.values += [0.0] * pad
        prof.provenance += ["EXACT"] * pad
        prof.stderr += [0.0] * pad
        prof.samples += [0] * pad
        return prof
    return exact_toll_profile(model, toll, n)


def exact_mean(model, toll: TollSpec, n: int, profile: ExpectedTollProfile | None = None) -> float:
    """Exact ``E F(T_n)`` from the exact expected tolls ``E f(T_m)``, ``m <= n``.

    d-ary: ``(d(d-1)n + d) sum_{m<n} E f(T_m)/(((d-1)m+1)((d-1)m+d)) + E f(T_n)``.
    The same identity holds for GPORTs with ``d -> -alpha`` and for recursive
    trees as the ``alpha -> infinity`` limit.
    """
    model = _dary(model)
    if profile is None:
        profile = _exact_profile(model, toll, n)
    if not profile.is_exact(n):
        raise ParameterError(f"exact mean needs an EXACT profile for m <= {n}")
    E = profile.values
    weights = _series_weights(model, n - 1)
    if model.variant == "dary":
        d = model.d
        lead = (d * (d - 1) * n + d) / (d * (d - 1))
    elif model.variant == "gport":
        a = model.alpha
        lead = float((a * (a + 1) * n - a) / (a * (a + 1)))
    else:
        lead = float(n)
    return lead * math.fsum(w * e for w, e in zip(weights, E[: n - 1])) + E[n - 1]


# ---------------------------------------------------------------------------
# weight functions


def _check_x(x, upper_open=True):
    if not (0.0 <= x < 1.0 if upper_open else 0.0 <= x <= 1.0):
        raise ParameterError(f"x = {x} outside the domain")


@lru_cache(maxsize=None)
def _power_coefficients(exponent: Fraction, k: int) -> tuple:
    """Coefficients ``a_i`` with ``int_x^1 (1-w)^e w^(k-1) dw = sum a_i (1-x)^(e+i+1)``."""
    return tuple(
        Fraction((-1) ** i * math.comb(k - 1, i)) / (exponent + i + 1) for i in range(k)
    )


def _closed_eval(exponent: Fraction, k: int, x: float, power_offset: int) -> float:
    coeffs = _power_coefficients(exponent, k)
    y = 1.0 - x
    e = float(exponent)
    return math.fsum(float(a) * y ** (e + i + power_offset) for i, a in enumerate(coeffs))


def _arity_exponent(d: int) -> Fraction:
    if int(d) != d or d < 2:
        raise ParameterError(f"d must be an integer >= 2, got {d!r}")
    return Fraction(d, d - 1)


def phi_closed(d: int, k: int, x: float) -> float:
    """Alternating closed form of the weight function (exact rational coefficients)."""
    _check_x(x)
    return _closed_eval(_arity_exponent(d), k, x, 0)


def phi_quad(d: int, k: int, x: float) -> float:
    """Adaptive quadrature of ``(1-x)^-1 int_x^1 (1-w)^(d/(d-1)) w^(k-1) dw``."""
    _check_x(x)
    beta = d / (d - 1)
    val, _ = integrate.quad(lambda w: (1.0 - w) ** beta * w ** (k - 1), x, 1.0,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return val / (1.0 - x)


def phi_betainc(d: int, k: int, x: float) -> float:
    """Incomplete-beta evaluation; no cancellation at large ``k``."""
    _check_x(x)
    beta = d / (d - 1)
    return float(special.beta(k, beta + 1) * special.betainc(beta + 1, k, 1.0 - x) / (1.0 - x))


def phi(d: int, k: int, x: float, method: str = "auto") -> float:
    """``phi_k(x) = (1-x)^-1 int_x^1 (1-w)^(d/(d-1)) w^(k-1) dw`` for ``x in [0, 1)``.

    ``method`` is ``closed``, ``quad``, ``betainc`` or ``auto`` (closed form up
    to ``k = 20``, incomplete beta beyond).
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    if method == "auto":
        method = "closed" if k <= PHI_CLOSED_MAX_K else "betainc"
    return {"closed": phi_closed, "quad": phi_quad, "betainc": phi_betainc}[method](d, k, x)


def _inner_exact(exponent: Fraction, k1: int, k2: int, offset: int) -> Fraction:
    # int_0^1 (1-x)^(2e + i + j + 2 - 2*offset) dx for the product of two expansions
    a = _power_coefficients(exponent, k1)
    b = _power_coefficients(exponent, k2)
    total = Fraction(0)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            total += ai * bj / (2 * exponent + i + j + 3 - 2 * offset)
    return total


def phi_inner_product(d: int, k1: int, k2: int, method: str = "exact", as_fraction: bool = False):
    """``int_0^1 phi_k1(x) phi_k2(x) dx``.

    ``exact`` multiplies the two expansions with rational arithmetic; ``quad``
    integrates the product of incomplete-beta evaluations numerically.
    """
    if min(k1, k2) < 1:
        raise ParameterError("k must be >= 1")
    if method == "exact":
        val = _inner_exact(_arity_exponent(d), min(k1, k2), max(k1, k2), 1)
        return val if as_fraction else float(val)
    if method == "quad":
        val, _ = integrate.quad(lambda x: phi_betainc(d, k1, x) * phi_betainc(d, k2, x),
                                0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)
        return val
    raise ParameterError(f"unknown method {method!r}")


def _alpha_exponent(alpha) -> Fraction:
    a = Fraction(alpha)
    if a <= 0:
        raise ParameterError("alpha must be positive")
    return a / (a + 1)


def varphi(alpha, k: int, x: float, prefactor: bool = False, method: str = "closed") -> float:
    """``int_x^1 (1-w)^(alpha/(alpha+1)) w^(k-1) dw`` on ``[0, 1]``.

    With ``prefactor=True`` the result is divided by ``(1-x)``, mirroring the
    d-ary weight function (requires ``x < 1``).
    """
    _check_x(x, upper_open=prefactor)
    e = _alpha_exponent(alpha)
    if x == 1.0:
        return 0.0
    if method == "closed":
        val = _closed_eval(e, k, x, 1)
    elif method == "quad":
        ef = float(e)
        val, _ = integrate.quad(lambda w: (1.0 - w) ** ef * w ** (k - 1), x, 1.0,
                                epsabs=1e-15, epsrel=1e-13, limit=200)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return val / (1.0 - x) if prefactor else val


def varphi_inner_product(alpha, k1: int, k2: int, prefactor: bool = False,
                         method: str = "exact", as_fraction: bool = False):
    e = _alpha_exponent(alpha)
    if method == "exact":
        val = _inner_exact(e, min(k1, k2), max(k1, k2), 1 if prefactor else 0)
        return val if as_fraction else float(val)
    val, _ = integrate.quad(
        lambda x: varphi(alpha, k1, x, prefactor, "quad") * varphi(alpha, k2, x, prefactor, "quad"),
        0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)
    return val


# ---------------------------------------------------------------------------
# sigma^2


def _sigma2_dary(d, sums, K, mu_seq):
    dens = _dary_denominators(d, K)
    a = [sums.S[k - 1] / ((d - 1) ** k * math.factorial(k - 1)) for k in range(1, K + 1)]
    gram = [[phi_inner_product(d, i, j) for j in range(1, K + 1)] for i in range(1, K + 1)]
    seq, parts = [], []
    for top in range(1, K + 1):
        mu = mu_seq[top - 1]
        t1 = -mu * mu / (d - 1)
        t2 = -(d - 1) * math.fsum(
            (sums.S2[k - 1] - 2 * (sums.SF[k - 1] - mu * k * sums.S[k - 1])) / dens[k - 1]
            for k in range(1, top + 1))
        t3 = d * (d - 1) * math.fsum(
            a[i] * a[j] * gram[i][j] for i in range(top) for j in range(top))
        seq.append(t1 + t2 + t3)
        parts.append((t1, t2, t3))
    return seq, parts


def sigma2_enumeration(d, toll: TollSpec, K: int | None = None, cutoff: int | None = None,
                       convergence_tol: float = 1e-4) -> TheoremConstants:
    """Truncated ``mu`` and ``sigma2`` from all trees with ``|T| <= K``.

    ``sigma2 = -mu^2/(d-1) - (d-1) sum_T [f^2 - 2 f (F - mu|T|)] / prod((d-1)j+d)
    + d sum_{T1,T2} (d-1)^(1-|T1|-|T2|) f(T1) f(T2) / ((|T1|-1)!(|T2|-1)!) <phi, phi>``.

    The double sum only depends on the per-size totals of ``f``, so it is
    collapsed to a ``K x K`` quadratic form.  ``sigma2_sequence[k-1]`` uses the
    truncation at ``k`` (with the matching ``mu_k``).
    """
    model = _dary(d)
    d = model.d
    K = DEFAULT_K.get(d, 5) if K is None else K
    _warn_unbounded(toll, d)
    t0 = time.perf_counter()
    sums = _size_sums(model, toll, K, cutoff)
    t1 = time.perf_counter()
    dens = _dary_denominators(d, K)
    mu_terms = [(d - 1) * sums.S[k] / dens[k] for k in range(K)]
    mu_seq = [math.fsum(mu_terms[: k + 1]) for k in range(K)]
    seq, parts = _sigma2_dary(d, sums, K, mu_seq)
    if K >= 2 and abs(seq[-1] - seq[-2]) > convergence_tol:
        warnings.warn(
            f"sigma2 truncation not settled: last increment {seq[-1] - seq[-2]:.3e} "
            f"exceeds {convergence_tol:g}", stacklevel=2)
    sup = toll.sup(d)
    return TheoremConstants(
        mu_seq[-1], seq[-1], K=K,
        tail_bound=None if sup is None else sup * d / ((d - 1) * K + d),
        method=ENUMERATION, model=str(model), toll=toll.label(),
        mu_sequence=mu_seq, sigma2_sequence=seq,
        extras={"sigma2_terms": list(parts[-1]),
                "last_increment": seq[-1] - seq[-2] if K >= 2 else None},
        timings={"enumeration_s": t1 - t0, "total_s": time.perf_counter() - t0})


def fringe_constants(d: int, mode: str, k: int | None = None, tree=None) -> TheoremConstants:
    """Closed-form ``(mu, sigma2)`` for fringe-subtree counts.

    ``mode='size'`` counts fringe subtrees of size ``k``; ``mode='occurrence'``
    counts occurrences of the reference tree ``tree`` (only ``|tree|`` matters).
    Computed in exact rational arithmetic.
    """
    _arity_exponent(d)
    d = int(d)
    mode = mode.lower()
    if mode == "occurrence":
        if tree is None and k is None:
            raise ParameterError("occurrence mode needs the reference tree")
        k = tree.n if tree is not None else k
    elif mode != "size":
        raise ParameterError(f"unknown mode {mode!r}")
    if k is None or k < 1:
        raise ParameterError("k must be >= 1")
    den = math.prod((d - 1) * j + d for j in range(1, k + 1))
    Yk = count_dary(d, k)
    if mode == "occurrence":
        mu = Fraction(d - 1, den)
        mult = 1
    else:
        mu = Fraction(d * (d - 1), ((d - 1) * k + d) * ((d - 1) * k + 1))
        mult = Yk * Yk
    inner = phi_inner_product(d, k, k, as_fraction=True)
    sigma2 = (-mu * mu * (2 * k + Fraction(1, d - 1)) + mu
              + Fraction(d * mult, math.factorial(k - 1) ** 2) * Fraction(d - 1) ** (1 - 2 * k) * inner)
    label = f"fringe-{mode}:k={k}"
    return TheoremConstants(float(mu), float(sigma2), K=k, method=CLOSED_FORM,
                            model=str(ModelParams.dary(d)), toll=label,
                            mu_sequence=[float(mu)], sigma2_sequence=[float(sigma2)],
                            extras={"mu_exact": mu, "sigma2_exact": sigma2})


# ---------------------------------------------------------------------------
# GPORTs


GPORT_VARIANTS = {
    # name: (sign of the mu^2/(alpha+1) term, (1-x)^-1 factor in the weight function)
    # plus-scaled is the default; it is the one that matches exact and simulated variances
    "plus-unscaled": (+1, False),
    "minus-unscaled": (-1, False),
    "plus-scaled": (+1, True),
    "minus-scaled": (-1, True),
}


def gport_constants(alpha, toll: TollSpec, K: int = 6, cutoff: int | None = None,
                    variant: str = "plus-scaled") -> TheoremConstants:
    """Truncated GPORT constants over PORTs weighted by ``w(T)``.

    ``mu = (alpha+1) sum_T w(T) f(T) / prod_j ((alpha+1)j + alpha)``.  ``sigma2``
    is evaluated for every entry of ``GPORT_VARIANTS`` (stored in
    ``extras['sigma2_variants']``); ``variant`` selects the reported one.
    """
    model = ModelParams.gport(alpha)
    a = model.alpha
    _warn_unbounded(toll)
    t0 = time.perf_counter()
    sums = _size_sums(model, toll, K, cutoff)
    dens = [float(x) for x in _gport_denominators(a, K)]
    af = float(a)
    mu_terms = [(af + 1) * sums.S[k] / dens[k] for k in range(K)]
    mu_seq = [math.fsum(mu_terms[: k + 1]) for k in range(K)]
    coef = [sums.S[k - 1] / ((af + 1) ** k * math.factorial(k - 1)) for k in range(1, K + 1)]
    variants = {}
    for name, (sign, prefactor) in GPORT_VARIANTS.items():
        gram = [[varphi_inner_product(a, i, j, prefactor) for j in range(1, K + 1)]
                for i in range(1, K + 1)]
        seq = []
        for top in range(1, K + 1):
            mu = mu_seq[top - 1]
            t1 = sign * mu * mu / (af + 1)
            t2 = -(af + 1) * math.fsum(
                (sums.S2[k - 1] - 2 * (sums.SF[k - 1] - mu * k * sums.S[k - 1])) / dens[k - 1]
                for k in range(1, top + 1))
            t3 = af * (af + 1) * math.fsum(
                coef[i] * coef[j] * gram[i][j] for i in range(top) for j in range(top))
            seq.append(t1 + t2 + t3)
        variants[name] = seq
    if variant not in variants:
        raise ParameterError(f"unknown variant {variant!r}; known: {list(variants)}")
    seq = variants[variant]
    sup = toll.sup()
    return TheoremConstants(
        mu_seq[-1], seq[-1], K=K,
        tail_bound=None if sup is None else sup * _series_tail(model, K),
        method=ENUMERATION, model=str(model), toll=toll.label(),
        mu_sequence=mu_seq, sigma2_sequence=seq,
        extras={"variant": variant,
                "sigma2_variants": {k: v[-1] for k, v in variants.items()},
                "sigma2_variant_sequences": variants},
        timings={"total_s": time.perf_counter() - t0})


def estimate_toll_decay(model, toll: TollSpec, sizes, samples: int, seed: int, workers: int = 1):
    """Monte Carlo ``E|f(T_k)|`` on a size grid with a fitted log-log slope."""
    from .montecarlo import estimate_toll_decay as _impl

    return _impl(model, toll, sizes, samples, seed, workers)
