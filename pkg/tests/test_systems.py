import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewgraph.errors import ConfigError, InvalidParameters
from skewgraph.systems import (CAT_KAPPA, CAT_MATRIX, DEFAULT_FORCING, AffineAnosov, AffineHorseshoe,
                               BakerWeierstrass, CodePoint, FourierForcing, HyperbolicityConstants, Ray,
                               TorusPoint, build_system, config_hash, geometric_potentials, lucas, parse_config,
                               serialize_config, system_from_text, validate_hypotheses)

HORSESHOE_TOML = """[system]
kind = "affine_horseshoe"
mu = 0.25
lambda = 1.5
kappa = 4.0
t = 0.5
"""


def test_anosov_system_constants():
    system = build_system({"kind": "affine_anosov", "lambda": 1.5,
                           "p": [[1.0, "ss", 1, 1], [1.0, "cc", 0, 2]]})
    c = system.constants
    assert c.kappa_s == c.kappa_w == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-15)
    assert c.mu_w == pytest.approx(1 / c.kappa_w, abs=1e-15)


def test_forcing_formula():
    xs = np.linspace(0, 1, 17)
    x1, x2 = np.meshgrid(xs, xs)
    expected = np.sin(2 * np.pi * x1) * np.sin(2 * np.pi * x2) + np.cos(4 * np.pi * x2)
    np.testing.assert_allclose(DEFAULT_FORCING(x1, x2), expected, atol=1e-15)
    assert DEFAULT_FORCING(0.0, 0.0) == 1.0


def test_horseshoe_blender_flag_and_baker_validation():
    h = build_system({"kind": "affine_horseshoe", "mu": 0.25, "lambda": 1.5, "kappa": 4.0, "t": 0.5})
    assert h.blender_regime
    assert not AffineHorseshoe(lam=2.5).blender_regime
    with pytest.raises(InvalidParameters, match="lambda"):
        build_system({"kind": "baker_weierstrass", "lambda": 3.0, "b": 2})


@pytest.mark.parametrize("kwargs", [dict(mu=0.6), dict(lam=0.9), dict(lam=4.5), dict(kappa=2.0)])
def test_horseshoe_rejects_bad_parameters(kwargs):
    with pytest.raises(InvalidParameters):
        AffineHorseshoe(**kwargs)


def test_constant_chain_validation():
    with pytest.raises(InvalidParameters, match="lambda_s < kappa_w"):
        HyperbolicityConstants.affine(0.25, 4.0, 4.0)


def test_hypothesis_reports():
    assert validate_hypotheses(AffineAnosov(1.5)).pinching_ok
    h = validate_hypotheses(AffineHorseshoe(0.25, 1.5, 4.0))
    assert h.standing_ok and h.pinching_ok
    h = validate_hypotheses(AffineHorseshoe(0.45, 1.5, 4.0))
    assert h.standing_ok and not h.pinching_ok
    pinch = [row for row in h.inequalities if row[0].startswith("kappa_s")][0]
    assert pinch[1] == pytest.approx(1.8) and pinch[3] == pytest.approx(-0.3)


def test_geometric_potentials():
    p = geometric_potentials(AffineHorseshoe(0.25, 1.5, 4.0))
    assert (p.phi_s.values, p.phi_u.values, p.phi_cu.values) == \
        pytest.approx((math.log(0.25), -math.log(4), -math.log(1.5)))
    p = geometric_potentials(AffineAnosov(1.5))
    k = (3 + math.sqrt(5)) / 2
    assert (p.phi_s.values, p.phi_u.values, p.phi_cu.values) == pytest.approx((-math.log(k), -math.log(k),
                                                                               -math.log(1.5)))
    p = geometric_potentials(BakerWeierstrass(1.5, 3))
    assert (p.phi_u.values, p.phi_cu.values) == pytest.approx((-math.log(3), -math.log(1.5)))
    for pots in (p, geometric_potentials(AffineAnosov(2.0))):
        assert pots.phi_s.depth == pots.phi_u.depth == pots.phi_cu.depth == 0


systems = st.one_of(
    st.builds(AffineHorseshoe, st.floats(0.05, 0.45), st.floats(1.05, 1.95), st.just(4.0), st.floats(-1, 1)),
    st.builds(AffineAnosov, st.floats(1.05, 2.5)),
    st.builds(BakerWeierstrass, st.floats(1.05, 1.9), st.integers(2, 5)),
)


@given(systems)
def test_config_round_trip(system):
    text = serialize_config({"system": system.to_config()})
    assert system_from_text(text) == system


@given(systems)
def test_potential_signs(system):
    p = system.geometric_potentials()
    assert p.phi_u.sup < 0 and p.phi_cu.sup < 0 and -p.phi_s.inf > 0


def test_cat_matrix_exactness():
    A = np.array(CAT_MATRIX)
    assert round(np.linalg.det(A)) == 1 and np.trace(A) == 3
    ev = np.linalg.eigvals(A.astype(float))
    assert ev.prod() == pytest.approx(1.0, abs=1e-14)
    assert max(ev) == pytest.approx(CAT_KAPPA, abs=1e-14)


@mpmath.workdps(60)
def test_lucas_identities():
    golden = (1 + mpmath.sqrt(5)) / 2
    for k in range(1, 30):
        assert abs(lucas(2 * k) - (golden ** 2) ** k - golden ** (-2 * k)) < mpmath.mpf(10) ** -40
        assert abs(golden * (golden ** 2) ** k - lucas(2 * k + 1) - golden ** (-(2 * k + 1))) < \
            mpmath.mpf(10) ** -40


@mpmath.workdps(80)
def test_torus_point_high_power_against_mpmath():
    golden = (1 + mpmath.sqrt(5)) / 2
    system = AffineAnosov()
    pt = system.tau_power(TorusPoint((Fraction(1, 7), Fraction(2, 9)), offset=0.3), 64)
    x1, x2 = pt.coordinates()
    disp = mpmath.mpf(0.3) * (golden ** 2) ** 64
    # tau^64 maps the anchor through the integer matrix power exactly.
    e1 = mpmath.mpf(pt.anchor[0].numerator) / pt.anchor[0].denominator + disp
    e2 = mpmath.mpf(pt.anchor[1].numerator) / pt.anchor[1].denominator - disp * golden
    assert abs(x1 - float(e1 % 1)) < 1e-12
    assert abs(x2 - float(e2 % 1)) < 1e-12


def test_torus_round_trip_on_rational_anchor():
    system = AffineAnosov()
    pt = TorusPoint((Fraction(3, 11), Fraction(5, 13)))
    assert system.tau_inv(system.tau(pt)).anchor == pt.anchor


def test_code_point_shift():
    system = AffineHorseshoe()
    pt = CodePoint(Ray((1, 0), (1,)), Ray((0,), (0,)))
    assert system.tau_inv(system.tau(pt)) == pt


def test_parse_config_errors_cite_line_and_field():
    with pytest.raises(ConfigError, match="line 4.*lambda"):
        parse_config(HORSESHOE_TOML.replace("lambda = 1.5", "lambda = 9.0"))
    with pytest.raises(ConfigError, match="unknown field"):
        parse_config(HORSESHOE_TOML + "extra = 1\n")
    with pytest.raises(ConfigError, match="kind"):
        parse_config('[system]\nkind = "plykin"\n')
    with pytest.raises(ConfigError, match="syntax"):
        parse_config("[system\n")
    with pytest.raises(ConfigError, match="system.p"):
        parse_config('[system]\nkind = "affine_anosov"\np = [[1.0, "xs", 1, 1]]\n')


def test_config_hash_is_stable():
    assert config_hash(HORSESHOE_TOML) == config_hash(HORSESHOE_TOML)
    assert config_hash(HORSESHOE_TOML) != config_hash(HORSESHOE_TOML + "\n")
    assert len(config_hash(HORSESHOE_TOML)) == 16


def test_forcing_list_round_trip():
    rows = [[0.5, "sc", 2, 1], [-1.0, "cs", 0, 3]]
    assert FourierForcing.from_list(rows).to_list() == rows
