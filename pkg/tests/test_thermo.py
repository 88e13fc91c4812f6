import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from skewgraph.blender import THREE_SYMBOL_MATRIX
from skewgraph.errors import BracketFailure, BudgetExceeded, NotMonotone
from skewgraph.symbolic import OneSidedPotential, ShiftSpace, cylinder_words, birkhoff_sum
from skewgraph.systems import CAT_KAPPA
from skewgraph.thermo import (OUTER_BRACKET, cylinder_pressure, pressure, pressure_cylinder, pressure_exact,
                              solve_bowen, solve_linear_root, solve_pressure_root)

FULL2 = ShiftSpace.full(2)
EXAMPLE_SHIFT = ShiftSpace.from_matrix(THREE_SYMBOL_MATRIX)
const = OneSidedPotential.constant


def test_exact_pressure_examples():
    assert pressure_exact(FULL2, const(0.0)).value == pytest.approx(math.log(2), abs=1e-14)
    assert pressure_exact(FULL2, OneSidedPotential.from_symbols([0.0, math.log(2)])).value == \
        pytest.approx(math.log(3), abs=1e-14)
    assert pressure_exact(FULL2, const(-math.log(1.5))).value == pytest.approx(0.287682, abs=1e-6)


def test_exact_agrees_with_brute_force_cylinder_sums():
    psi = OneSidedPotential.from_symbols([0.0, math.log(2)])
    for n in range(1, 11):
        total = math.fsum(math.exp(birkhoff_sum(psi, w, n)) for w in cylinder_words(FULL2, n))
        assert math.log(total) / n == pytest.approx(math.log(3), abs=1e-12)


def test_cylinder_examples():
    est = pressure_cylinder(FULL2, const(0.0), range(4, 17))
    assert all(v == pytest.approx(math.log(2), abs=1e-14) for v in est.residuals)
    assert est.value == pytest.approx(math.log(2), abs=1e-13)
    psi = OneSidedPotential.from_symbols([-math.log(1.2), -math.log(1.8)])
    est = pressure_cylinder(FULL2, psi, range(8, 19))
    assert est.value == pytest.approx(math.log(1 / 1.2 + 1 / 1.8), abs=1e-6)
    assert est.method == "cylinder_extrapolated" and len(est.residuals) == 11


def test_cylinder_on_three_symbol_matrix_against_characteristic_polynomial():
    lam = sympy.symbols("x")
    poly = sympy.Matrix(THREE_SYMBOL_MATRIX).charpoly(lam).as_expr()
    rho = max(abs(complex(r)) for r in sympy.Poly(poly, lam).nroots(n=30))
    est = pressure_cylinder(EXAMPLE_SHIFT, const(0.0), range(8, 17))
    assert est.value == pytest.approx(math.log(rho), abs=1e-3)
    assert pressure_exact(EXAMPLE_SHIFT, const(0.0)).value == pytest.approx(math.log(rho), abs=1e-12)


def test_cylinder_budget():
    with pytest.raises(BudgetExceeded):
        pressure_cylinder(FULL2, const(0.0), [10, 20], budget=1 << 12)


def test_entropy_override_rejects_non_constant_potentials():
    proxy = ShiftSpace.full(2, entropy_override=math.log(CAT_KAPPA))
    assert pressure_exact(proxy, const(-1.0)).value == pytest.approx(math.log(CAT_KAPPA) - 1.0, abs=1e-15)
    with pytest.raises(ValueError):
        pressure_exact(proxy, OneSidedPotential.from_symbols([0.0, -1.0]))


def test_root_examples():
    d = solve_pressure_root(FULL2, const(-math.log(1.5)), const(-math.log(4))).d
    assert d == pytest.approx(math.log(2) / math.log(4) + 1 - math.log(1.5) / math.log(4), abs=1e-10)
    assert d == pytest.approx(1.207519, abs=1e-6)
    proxy = ShiftSpace.full(2, entropy_override=math.log(CAT_KAPPA))
    d = solve_pressure_root(proxy, const(-math.log(1.5)), const(-math.log(CAT_KAPPA))).d
    assert d == pytest.approx(2 - math.log(1.5) / math.log((3 + math.sqrt(5)) / 2), abs=1e-10)
    assert solve_pressure_root(FULL2, const(-math.log(2)), const(-math.log(2))).d == pytest.approx(1.0, abs=1e-10)


def test_bowen_examples():
    assert solve_bowen(FULL2, const(math.log(0.25))).d == pytest.approx(0.5, abs=1e-10)
    assert solve_bowen(FULL2, const(-math.log(4))).d == pytest.approx(0.5, abs=1e-10)
    assert solve_bowen(FULL2, const(-math.log(2))).d == pytest.approx(1.0, abs=1e-10)


def test_solver_errors():
    with pytest.raises(NotMonotone):
        solve_pressure_root(FULL2, const(-1.0), const(0.0))
    with pytest.raises(NotMonotone):
        solve_bowen(FULL2, OneSidedPotential.from_symbols([-1.0, 0.5]))
    with pytest.raises(BracketFailure):
        solve_bowen(FULL2, const(-1e-3))  # root log 2 / 1e-3 lies far outside [-8, 16]


shifts = st.sampled_from([FULL2, ShiftSpace.full(3), EXAMPLE_SHIFT])


def random_potential(draw, alphabet, depth):
    size = alphabet ** depth
    vals = draw(st.lists(st.floats(-2.0, 1.0, allow_nan=False), min_size=size, max_size=size))
    return OneSidedPotential(np.array(vals).reshape((alphabet,) * depth) if depth else vals[0])


@given(shifts, st.data())
def test_pressure_monotone_in_d(shift, data):
    phi_cu = random_potential(data.draw, shift.alphabet_size, data.draw(st.integers(0, 2)))
    phi_u = random_potential(data.draw, shift.alphabet_size, 1)
    phi_u = phi_u - (phi_u.sup + data.draw(st.floats(0.1, 2.0)))
    try:
        root = solve_pressure_root(shift, phi_cu, phi_u)
    except BracketFailure:
        # Only legitimate when the root lies outside the outer bracket.
        lo, hi = OUTER_BRACKET
        edges = [pressure_exact(shift, phi_cu + (d - 1.0) * phi_u).value for d in (lo, hi)]
        assert edges[0] < 0 or edges[1] > 0
        return
    below = pressure_exact(shift, phi_cu + (root.d - 1.01) * phi_u).value
    above = pressure_exact(shift, phi_cu + (root.d - 0.99) * phi_u).value
    assert below > 0 > above
    assert abs(root.pressure_at_root) < 1e-9


@given(st.sampled_from([FULL2, ShiftSpace.full(3)]), st.data())
def test_pressure_bounds_on_full_shift(shift, data):
    psi = random_potential(data.draw, shift.alphabet_size, data.draw(st.integers(0, 2)))
    p = pressure(shift, psi).value
    assert math.log(shift.alphabet_size) + psi.inf - 1e-12 <= p <= math.log(shift.alphabet_size) + psi.sup + 1e-12


@pytest.mark.parametrize("c", [0.5, 2.0])
@given(data=st.data())
def test_bowen_root_scaling(c, data):
    phi = random_potential(data.draw, 2, 1)
    phi = phi - (phi.sup + data.draw(st.floats(0.2, 2.0)))
    d = solve_bowen(FULL2, phi).d
    assert solve_bowen(FULL2, c * phi).d == pytest.approx(d / c, rel=1e-9)


def test_linear_root_matches_closed_form():
    psi1 = const(-math.log(4))
    psi2 = OneSidedPotential.from_symbols([-math.log(1.2), -math.log(1.8)])
    t = solve_linear_root(FULL2, psi1, psi2).d
    assert t == pytest.approx(math.log(1 / 1.2 + 1 / 1.8) / math.log(4), abs=1e-10)


def test_cylinder_pressure_single_depth():
    assert cylinder_pressure(ShiftSpace.full(3), const(-1.0), 5) == pytest.approx(math.log(3) - 1.0, abs=1e-14)


def test_near_period_two_potential_is_flagged_as_poor_fit():
    # Transfer matrix with a subdominant eigenvalue close to minus the leading one: P_n alternates
    # with parity and the P + c/n model cannot absorb it. The estimate must say so.
    psi = OneSidedPotential(np.array([[-2.0, 1.0], [1.0, -2.0]]))
    est = pressure_cylinder(FULL2, psi, range(8, 17))
    exact = pressure_exact(FULL2, psi).value
    assert abs(est.value - exact) > 1e-3
    assert est.poor_fit and abs(est.value - exact) <= est.error_bound
