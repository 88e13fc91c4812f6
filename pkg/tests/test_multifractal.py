import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewgraph.errors import InvalidParameters
from skewgraph.multifractal import LevelTarget, count_level_cylinders, entropy_surface, variational_dimension
from skewgraph.symbolic import OneSidedPotential, ShiftSpace

FULL2 = ShiftSpace.full(2)
L4, L12, L15, L18 = math.log(4), math.log(1.2), math.log(1.5), math.log(1.8)
PSI1 = OneSidedPotential.constant(-L4)
PSI2_CONST = OneSidedPotential.constant(-L15)
PSI2_STEP = OneSidedPotential.from_symbols([-L12, -L18])


def test_constant_counts():
    assert count_level_cylinders(FULL2, PSI1, PSI2_CONST, LevelTarget(-L4, -L15, 0.01, 10)) == 1024
    assert count_level_cylinders(FULL2, PSI1, PSI2_CONST, LevelTarget(-L4 + 1, -L15, 0.01, 10)) == 0


def test_binomial_count_matches_brute_force():
    n, theta, a2 = 12, 0.05, -(L12 + L18) / 2
    brute = sum(1 for w in itertools.product((0, 1), repeat=n)
                if abs(sum(-L12 if s == 0 else -L18 for s in w) / n - a2) < theta)
    closed = sum(math.comb(n, k) for k in range(n + 1) if abs(k / n - 0.5) * (L18 - L12) < theta)
    got = count_level_cylinders(FULL2, PSI1, PSI2_STEP, LevelTarget(-L4, a2, theta, n))
    assert got == brute == closed


def test_level_target_validation():
    with pytest.raises(ValueError):
        LevelTarget(0.0, 0.0, 0.0, 4)


@settings(max_examples=40)
@given(st.floats(-L18, -L12), st.floats(0.001, 0.3), st.floats(1.0, 4.0), st.integers(1, 10))
def test_theta_monotone(a2, theta, factor, n):
    small = count_level_cylinders(FULL2, PSI1, PSI2_STEP, LevelTarget(-L4, a2, theta, n))
    large = count_level_cylinders(FULL2, PSI1, PSI2_STEP, LevelTarget(-L4, a2, theta * factor, n))
    assert small <= large


def test_constant_surface_is_one_point():
    surface = entropy_surface(FULL2, PSI1, PSI2_CONST)
    assert len(surface.grid) == 1
    assert surface.H[0] == pytest.approx(math.log(2), abs=1e-12)
    grid = np.array([[-L4, -L15], [-L4 + 0.5, -L15], [-L4, -L15 - 0.5]])
    surface = entropy_surface(FULL2, PSI1, PSI2_CONST, grid=grid)
    assert surface.empty.tolist() == [False, True, True]
    assert surface.to_csv().splitlines()[0] == "a1,a2,theta,n,M,H_estimate"


def test_binary_entropy_curve():
    # The exact count at a2 = -(q log1.2 + (1-q) log1.8) is C(n, qn); compare with the Stirling form
    # of log C(n, qn) / n, which is the binary entropy minus its finite-n correction.
    n = 16
    k = np.arange(1, n)
    q = k / n
    grid = np.column_stack([np.full(len(k), -L4), -(q * L12 + (1 - q) * L18)])
    surface = entropy_surface(FULL2, PSI1, PSI2_STEP, grid=grid, n_ladder=(n,), theta_ladder=(0.01,))
    exact = np.log([math.comb(n, int(i)) for i in k]) / n
    np.testing.assert_allclose(surface.H, exact, atol=1e-12)
    binary = -q * np.log(q) - (1 - q) * np.log(1 - q)
    stirling = binary - np.log(2 * math.pi * n * q * (1 - q)) / (2 * n)
    assert np.max(np.abs(surface.H - stirling)) < 0.03
    # The uncorrected gap is the 1/n Stirling term and must shrink with n.
    coarse = entropy_surface(FULL2, PSI1, PSI2_STEP, grid=grid[7:8], n_ladder=(8,), theta_ladder=(0.01,))
    assert abs(binary[7] - surface.H[7]) < abs(math.log(2) - coarse.H[0])


def test_hull_boundary_count():
    target = LevelTarget(-L4, -L12, 1e-6, 12)
    assert count_level_cylinders(FULL2, PSI1, PSI2_STEP, target) == 1


def test_variational_constant():
    result = variational_dimension(FULL2, PSI1, PSI2_CONST, entropy_surface(FULL2, PSI1, PSI2_CONST))
    closed = (math.log(2) - L15) / L4
    assert result.t_pressure_root == pytest.approx(closed, abs=1e-10)
    assert abs(result.t_variational - closed) < 1e-3 and abs(result.gap) < 1e-3


def test_variational_depth_one():
    result = variational_dimension(FULL2, PSI1, PSI2_STEP, entropy_surface(FULL2, PSI1, PSI2_STEP))
    closed = math.log(1 / 1.2 + 1 / 1.8) / L4
    assert result.t_pressure_root == pytest.approx(closed, abs=1e-10)
    assert abs(result.t_variational - closed) < 0.01
    assert result.gaps_decreasing
    assert all(step.t_refined <= result.t_pressure_root + 1e-9 for step in result.steps)


def test_positive_potential_rejected():
    bad = OneSidedPotential.from_symbols([-1.0, 0.2])
    with pytest.raises(InvalidParameters):
        variational_dimension(FULL2, PSI1, bad, entropy_surface(FULL2, PSI1, PSI2_STEP))


@settings(max_examples=20)
@given(st.integers(1, 4), st.integers(1, 3), st.floats(0.5, 2.0), st.floats(0.1, 1.0))
def test_super_multiplicativity_constant(r, m, c1, c2):
    psi1, psi2 = OneSidedPotential.constant(-c1), OneSidedPotential.constant(-c2)
    short = count_level_cylinders(FULL2, psi1, psi2, LevelTarget(-c1, -c2, 0.01, r))
    long = count_level_cylinders(FULL2, psi1, psi2, LevelTarget(-c1, -c2, 0.01, m * r))
    assert math.log(long) / (m * r) == pytest.approx(math.log(short) / r, abs=1e-12)
    assert long >= short ** m


@settings(max_examples=10)
@given(st.integers(4, 12))
def test_total_decomposition(n):
    pitch = (L18 - L12) / n
    a2 = -(np.arange(n + 1) / n * L12 + (1 - np.arange(n + 1) / n) * L18)
    total = sum(count_level_cylinders(FULL2, PSI1, PSI2_STEP, LevelTarget(-L4, float(v), pitch / 2, n))
                for v in a2)
    assert total == 2 ** n
