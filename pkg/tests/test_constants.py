import json
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from tolltrees.constants import (
    GPORT_VARIANTS,
    exact_mean,
    fringe_constants,
    gport_constants,
    mu_enumeration,
    mu_size_series,
    phi,
    phi_betainc,
    phi_closed,
    phi_inner_product,
    phi_quad,
    sigma2_enumeration,
    size_only_profile,
    varphi,
    varphi_inner_product,
)
from tolltrees.oracle import exact_moments
from tolltrees.tolls import builtin_toll, parse_toll
from tolltrees.trees import ModelParams, ParameterError, parse_tree

LEAF = builtin_toll("leaf")


def _variance_slope(model, toll, n):
    # Var F(T_n) - Var F(T_{n-1}) from full enumeration
    return exact_moments(model, toll, n, 2, True) - exact_moments(model, toll, n - 1, 2, True)


# --- phi ---------------------------------------------------------------------


def _phi_direct(d, k, x):
    # straight from the integral definition, no shared helpers
    b = d / (d - 1)
    val, _ = integrate.quad(lambda w: (1 - w) ** b * w ** (k - 1), x, 1, epsabs=1e-14, epsrel=1e-13)
    return val / (1 - x)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_phi_three_ways(d):
    for k in range(1, 21):
        for x in (0.0, 0.1, 0.37, 0.5, 0.8, 0.95):
            ref = _phi_direct(d, k, x)
            assert phi_closed(d, k, x) == pytest.approx(ref, abs=1e-10)
            assert phi_quad(d, k, x) == pytest.approx(ref, abs=1e-10)
            assert phi_betainc(d, k, x) == pytest.approx(ref, abs=1e-10)


def test_phi_known_value():
    # d = 2, k = 1: (1-x)^{-1} * (1-x)^3 / 3
    assert phi(2, 1, 0.25) == pytest.approx(0.75**2 / 3, abs=1e-15)
    with pytest.raises(ParameterError):
        phi(2, 1, 1.0)
    with pytest.raises(ParameterError):
        phi(2, 0, 0.5)


def test_phi_large_k_uses_stable_path():
    v = phi(2, 200, 0.3)
    assert v == pytest.approx(_phi_direct(2, 200, 0.3), rel=1e-8)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_inner_products_exact_vs_quadrature(d):
    for k1 in (1, 2, 5, 11, 20):
        for k2 in (1, 3, 7, 20):
            exact = phi_inner_product(d, k1, k2)
            quad = phi_inner_product(d, k1, k2, method="quad")
            direct, _ = integrate.quad(lambda x: _phi_direct(d, k1, x) * _phi_direct(d, k2, x), 0, 1,
                                       epsabs=1e-14, epsrel=1e-12, limit=200)
            assert exact == pytest.approx(quad, abs=1e-10)
            assert exact == pytest.approx(direct, abs=1e-10)
    assert isinstance(phi_inner_product(d, 2, 3, as_fraction=True), Fraction)


def test_inner_product_hand_value():
    # d = 2, k1 = k2 = 1: int (1-x)^4 / 9 = 1/45
    assert phi_inner_product(2, 1, 1, as_fraction=True) == Fraction(1, 45)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 2)]), st.integers(1, 8),
       st.floats(0.0, 0.9))
def test_varphi_prefactor_relation(alpha, k, x):
    plain = varphi(alpha, k, x)
    pref = varphi(alpha, k, x, prefactor=True)
    assert pref == pytest.approx(plain / (1 - x), rel=1e-12, abs=1e-15)
    e = float(alpha / (alpha + 1))
    direct, _ = integrate.quad(lambda w: (1 - w) ** e * w ** (k - 1), x, 1, epsabs=1e-14)
    assert plain == pytest.approx(direct, abs=1e-10)


def test_varphi_inner_product_quadrature():
    for alpha in (1, Fraction(1, 2)):
        for pref in (False, True):
            a = varphi_inner_product(alpha, 2, 3, prefactor=pref)
            q, _ = integrate.quad(lambda x: varphi(alpha, 2, x, pref) * varphi(alpha, 3, x, pref),
                                  0, 1, limit=200)
            assert a == pytest.approx(q, abs=1e-10)


# --- mu ----------------------------------------------------------------------


def test_mu_constant_normalization():
    series = mu_size_series(ModelParams.dary(2), size_only_profile(builtin_toll("constant", {"c": 1}), 2000),
                            2000, bound=1.0)
    assert abs(series.mu - 1) < 1e-3
    assert series.tail_bound == pytest.approx(2 / 2002)
    assert 1 - series.mu <= series.tail_bound + 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_mu_constant_partial_sums_closed_form(d):
    # sum_{j < K} (d-1) / ((d-1)j + d) telescopes to 1 - d / ((d-1)K + d)
    res = mu_enumeration(d, builtin_toll("constant", {"c": 1}), 5)
    for K, m in enumerate(res.mu_sequence, 1):
        assert m == pytest.approx(1 - d / ((d - 1) * K + d), abs=1e-14)


def test_mu_leaf_against_exact_means():
    # E L_n / n -> 1/3 for binary trees; the exact mean is (n + 1) / 3
    for n in range(2, 8):
        assert exact_moments("dary:2", LEAF, n) == pytest.approx((n + 1) / 3, abs=1e-12)
    assert fringe_constants(2, "size", 1).mu == pytest.approx(1 / 3, abs=1e-15)


def test_fringe_mu_d3_against_enumeration():
    # d = 3, size-2 fringes: E = (6n + 3) / 35 for n > 2 by hand
    toll = builtin_toll("fringe-size", {"k": 2})
    for n in (4, 5, 6):
        assert exact_moments("dary:3", toll, n) == pytest.approx((6 * n + 3) / 35, abs=1e-12)
    fc = fringe_constants(3, "size", 2)
    assert fc.extras["mu_exact"] == Fraction(6, 35)


# --- sigma2 ------------------------------------------------------------------


def test_leaf_constants():
    fc = fringe_constants(2, "size", 1)
    assert fc.mu == pytest.approx(1 / 3, abs=1e-10)
    assert fc.sigma2 == pytest.approx(2 / 45, abs=1e-10)
    assert fc.extras["sigma2_exact"] == Fraction(2, 45)
    assert sigma2_enumeration(2, LEAF, 5).sigma2 == pytest.approx(2 / 45, abs=1e-10)


@pytest.mark.parametrize("k", [1, 2])
def test_sigma2_matches_linear_variance_growth(k):
    # for binary trees Var F_n is exactly linear once n is large enough
    toll = builtin_toll("fringe-size", {"k": k})
    slope = _variance_slope("dary:2", toll, 8)
    assert fringe_constants(2, "size", k).sigma2 == pytest.approx(slope, abs=1e-12)
    assert sigma2_enumeration(2, toll, 6).sigma2 == pytest.approx(slope, abs=1e-12)


def test_sigma2_d3_leaf_trend():
    slope = _variance_slope("dary:3", LEAF, 7)
    res = sigma2_enumeration(3, LEAF)
    assert res.sigma2 == pytest.approx(0.06, abs=1e-12)
    assert abs(res.sigma2 - slope) < 1e-3


def test_fringe_occurrence_constants():
    tree = parse_tree("1[0:2[0:_, 1:_], 1:_]")
    toll = builtin_toll("fringe-occurrence", {"tree": tree})
    closed = fringe_constants(2, "occurrence", tree=tree)
    enum = sigma2_enumeration(2, toll, 6)
    assert closed.mu == pytest.approx(enum.mu, abs=1e-12)
    assert closed.sigma2 == pytest.approx(enum.sigma2, abs=1e-12)
    slope = _variance_slope("dary:2", toll, 8)
    assert closed.sigma2 == pytest.approx(slope, abs=1e-12)


def test_sigma2_sequence_converges_for_non_size_toll():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = sigma2_enumeration(2, builtin_toll("log-root-subtrees"), 6)
    seq = res.sigma2_sequence
    assert len(seq) == 6
    assert abs(seq[-1] - seq[-2]) < abs(seq[1] - seq[0])


def test_unbounded_toll_warns():
    with pytest.warns(UserWarning):
        sigma2_enumeration(2, builtin_toll("path-length"), 3)


def test_theorem_constants_serialize():
    res = fringe_constants(2, "size", 1)
    doc = json.loads(res.to_json())
    assert doc["schema_version"] == 1
    assert doc["mu"] == pytest.approx(1 / 3)
    # mu*n + mu/(d-1), which is the exact (n + 1) / 3 for binary leaves
    assert res.predicted_mean(10) == pytest.approx(11 / 3)


# --- exact mean --------------------------------------------------------------


@pytest.mark.parametrize("model", ["dary:2", "dary:3", "port", "gport:1/2", "recursive"])
def test_exact_mean_identity(model):
    for name in ("leaf", "fringe-size:k=2", "outdegree:k=1", "log-root-subtrees", "orbits"):
        toll = parse_toll(name)
        for n in (1, 3, 5):
            assert exact_mean(model, toll, n) == pytest.approx(exact_moments(model, toll, n),
                                                               abs=1e-12)


# --- GPORT -------------------------------------------------------------------


def test_gport_leaf_mu_and_variants():
    res = gport_constants(1, LEAF)
    assert res.mu == pytest.approx(2 / 3, abs=1e-12)
    variants = res.extras["sigma2_variants"]
    assert set(variants) == set(GPORT_VARIANTS)
    assert variants["plus-unscaled"] == pytest.approx(1 / 18, abs=1e-12)
    assert variants["plus-scaled"] == pytest.approx(1 / 9, abs=1e-12)


def test_gport_variant_matching_exact_variance_growth():
    # exact enumeration of PORTs: the variance slope approaches 1/9 from above
    slope = _variance_slope("port", LEAF, 8)
    variants = gport_constants(1, LEAF).extras["sigma2_variants"]
    best = min(variants, key=lambda v: abs(variants[v] - slope))
    assert best == "plus-scaled"
    assert abs(slope - 1 / 9) / (1 / 9) < 0.03


def test_gport_reduces_to_dary_under_negative_alpha_map():
    # the size-grouped mu with alpha = -d reproduces the d-ary weights
    for n in range(2, 7):
        a = exact_mean("dary:2", LEAF, n)
        assert a == pytest.approx((n + 1) / 3, abs=1e-12)
    port = exact_mean("port", LEAF, 6)
    assert port == pytest.approx(exact_moments("port", LEAF, 6), abs=1e-12)


def test_bad_parameters():
    with pytest.raises(ParameterError):
        fringe_constants(1, "size", 1)
    with pytest.raises(ParameterError):
        fringe_constants(2, "size", 0)
    with pytest.raises(ParameterError):
        gport_constants(0, LEAF)
    with pytest.raises(ParameterError):
        phi_inner_product(2, 1, 1, method="magic")
    assert np.isfinite(phi(3, 5, 0.99))
