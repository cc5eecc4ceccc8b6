import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from conftest import fine_potential
from mkdv_longtime.core import SpatialGrid
from mkdv_longtime.errors import NonConvergence, OutOfRange
from mkdv_longtime.scattering import (
    GAUGE_ROTATION,
    Potential,
    ReflectionTable,
    box_profile,
    gaussian_profile,
    jost_solve,
    midpoint_values,
    reflection_coefficient,
    sech_profile,
    symmetric_grid,
)

SIGMA3 = np.diag([1.0, -1.0])


def box_transfer(A, L, z):
    K = -1j * z * SIGMA3 + np.array([[0.0, A], [A, 0.0]])
    M = expm(L * K)
    return np.linalg.solve(M, np.diag(np.exp([-1j * L * z, 1j * L * z])))


def ivp_first_column(u, xl, xr, z, rtol=1e-12):
    """Reference: adaptive DOP853 on Psi' = (-iz sigma3 + U) Psi, then Phi = e^{ixz sigma3} Psi."""

    def rhs(s, y):
        us = u(s)
        return [-1j * z * y[0] + us * y[1], us * y[0] + 1j * z * y[1]]

    y0 = np.array([np.exp(-1j * xl * z), 0j])
    sol = solve_ivp(rhs, (xl, xr), y0, method="DOP853", rtol=rtol, atol=1e-14)
    psi = sol.y[:, -1]
    return psi[0] * np.exp(1j * xr * z), psi[1] * np.exp(-1j * xr * z)


def test_potential_validation():
    g = SpatialGrid.from_interval(0, 1, 0.5)
    with pytest.raises(ValueError):
        Potential(g, np.zeros(2))
    with pytest.raises(ValueError):
        Potential(g, np.array([0.0, np.nan, 0.0]))
    p = Potential(g, np.array([0.0, 2.0, 0.0]))
    assert p.tail_epsilon == pytest.approx(2e-12)
    assert p.effective_support() == (1, 1)


def test_effective_support():
    p = fine_potential(sech_profile(0.3))
    i0, i1 = p.effective_support()
    x = p.x
    assert np.all(np.abs(p.values[:i0]) < p.tail_epsilon)
    assert np.all(np.abs(p.values[i1 + 1:]) < p.tail_epsilon)
    assert x[i0] == pytest.approx(-x[i1])


def test_midpoint_interpolation_order():
    for h in (0.1, 0.05):
        x = np.arange(0, 3 + h / 2, h)
        err = np.max(np.abs(midpoint_values(np.sin(x)) - np.sin(x[:-1] + h / 2)))
        if h == 0.1:
            e1 = err
    assert e1 / err > 14


def test_zero_potential():
    p = fine_potential(lambda x: 0 * x, half_width=5)
    tm = jost_solve(p, 1.3)
    assert tm.a == 1 and tm.b == 0
    tab = reflection_coefficient(p, z_max=1, dz=0.1)
    assert np.all(tab.r_values == 0)


@pytest.mark.parametrize("A", [0.25, 0.5])
@pytest.mark.parametrize("L", [1.0, 4.0])
@pytest.mark.parametrize("z", [0.5, 1.0, 2.0])
def test_box_matrix_exponential(A, L, z):
    p = Potential.from_function(box_profile(A, 0.0, L), SpatialGrid.from_interval(-1.0, L + 1.0, 0.002))
    T = box_transfer(A, L, z)
    tm = jost_solve(p, z)
    assert abs(tm.a - T[0, 0]) < 1e-9
    assert abs(tm.b - T[1, 0]) < 1e-9
    assert abs(tm.b_breve - T[0, 1]) < 1e-9
    assert abs(tm.a_breve - T[1, 1]) < 1e-9


def test_born_approximation():
    eps = 1e-3
    p = fine_potential(sech_profile(eps))
    for z in (0.0, 0.4, 1.0, 2.0):
        born = -eps * np.pi / np.cosh(np.pi * z)
        b = jost_solve(p, z).b
        assert abs(b - born) <= 2 * eps ** 2 * abs(born)


def test_sech_r0_closed_form(sech03_table):
    # sech data has r(0) = -tanh(pi A) in this gauge
    assert sech03_table.r0() == pytest.approx(-np.tanh(0.3 * np.pi), abs=1e-9)


def test_sech_invariants(sech03_table):
    tab = sech03_table
    assert np.max(np.abs(tab.r_values)) < 1
    assert tab.symmetry_defect() <= 1e-8
    assert abs(tab.r0().imag) <= 1e-12
    assert tab.meta["max_residual"] <= 1e-8


def test_r0_scheme_agreement(sech03):
    tab1 = reflection_coefficient(sech03, z_max=0.5, dz=0.005)
    tab2 = reflection_coefficient(sech03, z_max=0.5, dz=0.0025)
    p, q = ivp_first_column(sech_profile(0.3), -30.0, 30.0, 0.0)
    r_ivp = np.conj(-q / p)
    assert abs(tab1.r0() - tab2.r0()) <= 1e-7
    assert abs(tab1.r0() - r_ivp) <= 1e-7


@pytest.mark.parametrize("z", [-2.3, 0.7, 3.0])
def test_ivp_agreement_off_axis(sech03, z):
    tm = jost_solve(sech03, z)
    p, q = ivp_first_column(sech_profile(0.3), -30.0, 30.0, z)
    assert abs(tm.a - np.conj(p)) < 1e-8
    assert abs(tm.b + q) < 1e-8


def test_grid_doubling_stability():
    z = np.linspace(-5, 5, 21)
    for f in (sech_profile(0.3), gaussian_profile(0.5)):
        r1 = [jost_solve(fine_potential(f, dx=0.02), v).reflection for v in z]
        r2 = [jost_solve(fine_potential(f, dx=0.01), v).reflection for v in z]
        assert np.max(np.abs(np.subtract(r1, r2))) <= 1e-6


def test_nonconvergence_on_coarse_grid():
    p = fine_potential(sech_profile(3.0), half_width=20, dx=0.5)
    with pytest.raises(NonConvergence) as info:
        jost_solve(p, 4.0, tol=1e-10)
    assert "richardson_error" in info.value.context
    with pytest.raises(NonConvergence):
        reflection_coefficient(p, z_max=4, dz=0.5, tol=1e-10)


def test_threads_match_serial(sech03):
    a = reflection_coefficient(sech03, z_max=1.0, dz=0.01)
    b = reflection_coefficient(sech03, z_max=1.0, dz=0.01, threads=3)
    np.testing.assert_array_equal(a.r_values, b.r_values)


def test_symmetric_grid_exact():
    z = symmetric_grid(6.0, 0.005)
    assert z.size == 2401
    np.testing.assert_array_equal(z, -z[::-1])
    assert z[1200] == 0.0


def test_r_at_nodes_and_range(sech03_table):
    tab = sech03_table
    for k in (0, 17, 600, tab.z_grid.size - 1):
        assert tab.r_at(tab.z_grid[k]) == tab.r_values[k]
    with pytest.raises(OutOfRange):
        tab.r_at(tab.z_max + 0.01)
    with pytest.raises(OutOfRange):
        tab.r_at(np.array([0.0, -3.5]))
    z = 1.2345
    assert abs(tab.r_at(-z) - np.conj(tab.r_at(z))) < 1e-12


def test_r_at_refinement(sech03):
    coarse = reflection_coefficient(sech03, z_max=1.0, dz=0.02)
    fine = reflection_coefficient(sech03, z_max=1.0, dz=0.01)
    mids = coarse.z_grid[:-1] + 0.01
    # cubic spline: O(dz^4) away from the ends
    err = np.abs(coarse.r_at(mids) - fine.r_at(mids))[5:-5]
    assert err.max() < 5 * 0.02 ** 4


def test_csv_roundtrip_bit_identical(sech03_table, tmp_path):
    tab = sech03_table
    path = tmp_path / "r.csv"
    text = tab.to_csv(path)
    assert text.splitlines()[0] == "z,re_r,im_r"
    back = ReflectionTable.from_csv(path)
    np.testing.assert_array_equal(back.z_grid, tab.z_grid)
    np.testing.assert_array_equal(back.r_values, tab.r_values)
    assert back.to_csv() == text


def test_json_roundtrip_bit_identical(sech03_table, tmp_path):
    tab = sech03_table
    path = tmp_path / "r.json"
    text = tab.to_json(path)
    doc = json.loads(text)
    assert doc["n"] == tab.z_grid.size and doc["dz"] == pytest.approx(0.005)
    back = ReflectionTable.from_json(path)
    np.testing.assert_array_equal(back.r_values, tab.r_values)
    assert back.to_json() == text


def test_table_validation():
    with pytest.raises(ValueError):
        ReflectionTable(np.array([0.0, 1.0, 0.5]), np.zeros(3))
    with pytest.raises(ValueError):
        ReflectionTable(np.array([0.0, 1.0]), np.zeros(2))


def test_gauge_rotation_symmetry(sech03_table):
    rot = sech03_table.scaled(GAUGE_ROTATION)
    # in the rotated gauge r(-z) = -conj r(z)
    assert np.max(np.abs(rot.r_values[::-1] + np.conj(rot.r_values))) < 1e-12


profiles = st.one_of(
    st.builds(sech_profile, st.floats(0.01, 1.0), st.floats(0.5, 2.0)),
    st.builds(gaussian_profile, st.floats(0.01, 1.0), st.floats(0.5, 2.0)),
)


@settings(max_examples=15, deadline=None)
@given(profiles, st.floats(0.0, 5.0))
def test_unitarity_and_symmetry_property(f, z):
    p = fine_potential(f, half_width=25, dx=0.01)
    t1, t2 = jost_solve(p, z), jost_solve(p, -z)
    assert abs(t1.residual) <= 1e-8
    assert abs(t2.reflection - np.conj(t1.reflection)) <= 1e-8
    assert abs(t1.reflection) < 1
    assert t1.a != 0
