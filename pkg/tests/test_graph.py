import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewgraph.errors import InsufficientResolution
from skewgraph.graph import (SampledGraph, classify_regularity, delta_u_estimate, evaluate_graph, gamma_u_approx,
                             holder_exponent_estimate, sample_unstable_slice, truncation_bound, _leaf_gamma)
from skewgraph.systems import (ZERO_FORCING, AffineAnosov, AffineHorseshoe, BakerWeierstrass, CirclePoint,
                               CodePoint, TorusPoint)

HORSESHOE = AffineHorseshoe(0.25, 1.5, 4.0, 0.5)
ANOSOV = AffineAnosov(1.5)
BAKER = BakerWeierstrass(1.5, 3)


def test_fixed_point_values():
    assert evaluate_graph(HORSESHOE, CodePoint.constant(1), 60).value == pytest.approx(1.0, abs=1e-10)
    assert evaluate_graph(HORSESHOE, CodePoint.constant(0), 60).value == 0.0
    assert HORSESHOE.graph_exact(CodePoint.constant(1)) == Fraction(HORSESHOE.t) / (Fraction(HORSESHOE.lam) - 1)
    point = evaluate_graph(ANOSOV, TorusPoint())
    assert point.value == pytest.approx(1.0 / (1 - 1 / 1.5), abs=point.error_bound + 1e-12)


def test_horseshoe_zero_slice():
    g = sample_unstable_slice(AffineHorseshoe(t=0.0), bits=10)
    assert len(g) == 1024 and np.all(g.value == 0.0)


def test_baker_slice_matches_series():
    bits, depth = 12, 64
    g = sample_unstable_slice(BAKER, bits=bits, depth=depth)
    denom = 1 << bits
    for i in range(0, denom, 37):
        # Exact phase b^k i / 2^bits mod 1 before taking the cosine.
        series = math.fsum(BAKER.lam ** -k * math.cos(2 * math.pi * ((3 ** k * i) % denom) / denom)
                           for k in range(depth))
        assert abs(g.value[i] - series) <= g.error_bound[i] + 1e-12
    tail = BAKER.lam ** -depth / (1 - 1 / BAKER.lam)
    assert g.error_bound[0] >= tail


def test_anosov_slice_starts_at_anchor_value():
    g = sample_unstable_slice(ANOSOV, bits=10)
    assert g.value[0] == evaluate_graph(ANOSOV, TorusPoint()).value or \
        abs(g.value[0] - evaluate_graph(ANOSOV, TorusPoint()).value) < 1e-12
    assert g.param[0] == 0.0 and np.all(np.diff(g.param) > 0)


def test_sampled_graph_csv_round_trip():
    g = sample_unstable_slice(BAKER, bits=6)
    text = g.to_csv(header_lines=["skewgraph test"])
    assert text.splitlines()[1] == "param,base_1,base_2,value,error_bound"
    back = SampledGraph.from_csv(text)
    np.testing.assert_array_equal(back.value, g.value)
    np.testing.assert_array_equal(back.param, g.param)


def test_gamma_examples():
    flat = AffineHorseshoe(t=0.0)
    xi, eta = CodePoint.constant(0), CodePoint.from_future((1,), (0,))
    assert gamma_u_approx(flat, xi, eta, 10) == 0
    g40 = gamma_u_approx(HORSESHOE, xi, eta, 40)
    g41 = gamma_u_approx(HORSESHOE, xi, eta, 41)
    assert abs(g40 - g41) <= 1e-8
    pt = TorusPoint((Fraction(1, 5), Fraction(2, 7)))
    phi = evaluate_graph(ANOSOV, pt).value
    for n in (1, 5, 12):
        assert gamma_u_approx(ANOSOV, pt, pt, n) == pytest.approx(phi, abs=1e-9)


def test_gamma_rejects_points_off_the_leaf():
    with pytest.raises(ValueError):
        gamma_u_approx(HORSESHOE, CodePoint.constant(0), CodePoint.constant(1), 3)


def test_anosov_gamma_converges_geometrically():
    rng = np.random.default_rng(11)
    bound = ANOSOV.lam / ANOSOV.kappa + 0.05
    for _ in range(20):
        xi = TorusPoint((Fraction(int(rng.integers(0, 64)), 64), Fraction(int(rng.integers(0, 64)), 64)))
        idx = np.array([int(rng.integers(1 << 26, 1 << 29))])
        g = np.array([_leaf_gamma(ANOSOV, xi, idx, 30, n, 64)[0] for n in range(30)])
        d = np.abs(np.diff(g))
        ok = d > 1e-11
        rate = math.exp(np.polyfit(np.arange(len(d))[ok], np.log(d[ok]), 1)[0])
        assert rate <= bound


def test_delta_u_examples():
    assert delta_u_estimate(AffineHorseshoe(t=0.0), CodePoint.constant(0), 1.0, 256) == 0.0
    a = delta_u_estimate(HORSESHOE, CodePoint.constant(0), 1.0, 1024, n=40)
    b = delta_u_estimate(HORSESHOE, CodePoint.constant(0), 1.0, 2048, n=40)
    assert a > 0.1 and abs(a - b) <= 1e-3
    assert delta_u_estimate(AffineAnosov(1.5, ZERO_FORCING), TorusPoint(), 0.5, 256) == 0.0


def test_holder_examples():
    h = holder_exponent_estimate(sample_unstable_slice(HORSESHOE, bits=16)).slope
    assert h == pytest.approx(math.log(1.5) / math.log(4), abs=0.05)
    w = holder_exponent_estimate(sample_unstable_slice(BAKER, bits=18)).slope
    assert w == pytest.approx(math.log(1.5) / math.log(3), abs=0.05)
    flat = sample_unstable_slice(AffineHorseshoe(t=0.0), bits=10)
    assert holder_exponent_estimate(flat).slope == 1.0
    with pytest.raises(InsufficientResolution):
        holder_exponent_estimate(sample_unstable_slice(BAKER, bits=8), ladder=(1, 8))


def test_classify_examples():
    assert classify_regularity(AffineHorseshoe(t=0.0)).verdict == "lipschitz"
    report = classify_regularity(HORSESHOE, samples=64)
    assert report.verdict == "critical_holder"
    assert report.critical_exponent == pytest.approx(0.292481, abs=1e-6)
    assert classify_regularity(AffineAnosov(1.5, ZERO_FORCING)).verdict == "lipschitz"
    assert "verdict=critical_holder" in list(report.lines())


def random_code(draw):
    fut = tuple(draw(st.lists(st.integers(0, 1), min_size=0, max_size=12)))
    cyc = tuple(draw(st.lists(st.integers(0, 1), min_size=1, max_size=3)))
    return CodePoint.from_future(fut, cyc)


@st.composite
def system_points(draw):
    kind = draw(st.sampled_from(["horseshoe", "anosov", "baker"]))
    if kind == "horseshoe":
        return HORSESHOE, random_code(draw)
    if kind == "anosov":
        q = 1 << 10
        return ANOSOV, TorusPoint((Fraction(draw(st.integers(0, q - 1)), q), Fraction(draw(st.integers(0, q - 1)), q)))
    return BAKER, CirclePoint(Fraction(draw(st.integers(0, 4095)), 4096), Fraction(draw(st.integers(0, 7)), 8))


@settings(max_examples=100)
@given(system_points(), st.integers(1, 40))
def test_truncation_consistency(sp, n):
    system, xi = sp
    a = evaluate_graph(system, xi, n).value
    b = evaluate_graph(system, xi, n + 5).value
    lam = system.constants.lambda_w
    sup = max(abs(system.fiber_range[0]) if hasattr(system, "fiber_range") else 0.0, system.fiber_diameter)
    assert abs(a - b) <= sup * lam ** -n + 1e-12


@given(system_points(), st.integers(5, 40))
def test_x0_independence(sp, n):
    system, xi = sp
    pts = [evaluate_graph(system, xi, n, x0) for x0 in (-1.0, 0.0, 1.0)]
    for p in pts:
        assert abs(p.value - pts[1].value) <= 2 * max(p.error_bound, pts[1].error_bound)


@given(system_points(), st.integers(2, 40))
def test_cocycle_invariance(sp, n):
    system, xi = sp
    phi_n = evaluate_graph(system, xi, n)
    forward = system.fiber_map(xi, phi_n.value)
    back = evaluate_graph(system, system.tau(xi), n - 1).value
    assert abs(forward - back) <= system.constants.lambda_s * phi_n.error_bound


def test_truncation_bound_shrinks():
    assert truncation_bound(HORSESHOE, 40) < truncation_bound(HORSESHOE, 20)
