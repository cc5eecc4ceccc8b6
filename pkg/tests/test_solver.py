import warnings

import numpy as np
import pytest
import scipy.fft as sfft

from mkdv_longtime.core import SpatialGrid
from mkdv_longtime.errors import BlowUp, WrapAroundWarning
from mkdv_longtime.scattering import Potential, gaussian_profile, sech_profile
from mkdv_longtime.solver import (
    EvolutionConfig,
    airy_propagator,
    conserved_quantities,
    evolve,
    phi_functions,
    read_snapshots,
    write_snapshots,
)

pytestmark = pytest.mark.filterwarnings("ignore::mkdv_longtime.errors.WrapAroundWarning")


def periodic_potential(f, length, n):
    return Potential.from_function(f, SpatialGrid.centered(length, n))


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, (0.5, 0.2))
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, (2.0,))
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, scheme="RK4")
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, dealias_fraction=0.0)


def test_phi_functions_continuity():
    z = np.array([0.4999j, 0.5001j, -0.49999, 0.50001, 1e-9j])
    p1, p2, p3 = phi_functions(z)
    np.testing.assert_allclose(p1 * z, np.expm1(z), rtol=1e-12, atol=1e-20)
    assert phi_functions(np.array([0j]))[2][0] == pytest.approx(1 / 6, rel=1e-15)
    a = phi_functions(np.array([0.4999999j]))
    b = phi_functions(np.array([0.5000001j]))
    for u, v in zip(a, b):
        assert abs(u[0] - v[0]) < 1e-6


def test_airy_propagator_identity_and_mode():
    g = SpatialGrid.centered(2 * np.pi * 8, 128)
    u = np.cos(3 * g.x / 8)
    np.testing.assert_array_equal(airy_propagator(u, 0.0, g), u)
    k = 3 / 8
    assert np.max(np.abs(airy_propagator(np.cos(np.pi * (g.x - g.x_min) / g.dx), 2.0, g))) <= 1.0 + 1e-12
    t = 1.7
    expect = np.cos(k * (g.x - g.x_min) + t * k ** 3 + k * g.x_min)
    assert np.max(np.abs(airy_propagator(u, t, g) - expect)) < 1e-13


def test_airy_semigroup():
    g = SpatialGrid.centered(200.0, 2048)
    u = np.exp(-g.x ** 2)
    a = airy_propagator(airy_propagator(u, 1.3, g), 2.1, g)
    b = airy_propagator(u, 3.4, g)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_zero_initial_data():
    p = periodic_potential(lambda x: 0 * x, 100.0, 256)
    snaps = evolve(p, EvolutionConfig(0.1, 2.0, (1.0, 2.0)))
    assert [s.t for s in snaps] == [1.0, 2.0]
    for s in snaps:
        assert not np.any(s.field)
        assert conserved_quantities(s) == (0.0, 0.0, 0.0)


def test_conserved_sech_closed_form():
    g = SpatialGrid.centered(200.0, 4096)
    u = 1 / np.cosh(g.x)
    I1, I2, E = conserved_quantities(u, g)
    assert I1 == pytest.approx(np.pi, abs=1e-10)
    assert I2 == pytest.approx(2.0, abs=1e-10)
    # int sech^2 tanh^2 + sech^4 = 2/3 + 4/3
    assert E == pytest.approx(2.0, abs=1e-10)
    gn = SpatialGrid.from_interval(-100, 100, 0.01)
    assert conserved_quantities(1 / np.cosh(gn.x), gn)[1] == pytest.approx(2.0, abs=1e-8)


def test_small_amplitude_duhamel_oracle():
    # the gap to the linear flow is the first Duhamel correction (cubic in amplitude)
    g = SpatialGrid.centered(1600.0, 2 ** 14)
    eps, T = 1e-3, 10.0
    u0 = eps / np.cosh(np.clip(g.x, -700, 700))
    num = evolve(u0, EvolutionConfig(0.05, T, (T,)), g)[0].field
    lin = airy_propagator(u0, T, g)
    xi = g.wavenumbers()
    mask = xi <= 2 / 3 * xi.max()
    s, w = np.polynomial.legendre.leggauss(48)
    s, w = (s + 1) * T / 2, w * T / 2
    acc = np.zeros(xi.size, complex)
    for si, wi in zip(s, w):
        us = airy_propagator(u0, si, g)
        acc += wi * np.exp(1j * (T - si) * xi ** 3) * 2j * xi * mask * sfft.rfft(us ** 3)
    duh = sfft.irfft(acc, g.n)
    gap = np.max(np.abs(num - lin))
    assert 1e-10 < gap < 5e-9
    assert np.max(np.abs(num - lin - duh)) < 0.02 * gap


def test_etdrk4_order_four():
    p = periodic_potential(sech_profile(0.3), 100.0, 128)
    T = 2.0

    def run(dt):
        return evolve(p, EvolutionConfig(dt, T, (T,)))[0].field

    errs = [np.max(np.abs(run(dt) - run(dt / 4))) for dt in (0.05, 0.025, 0.0125)]
    # err(dt)/err(dt/2) = 16 (1 - 4^-4)/(1 - 2^-4) = 17 for a fourth-order scheme
    for a, b in zip(errs, errs[1:]):
        assert 17 / 2 <= a / b <= 17 * 2


def test_strang_order_two():
    p = periodic_potential(sech_profile(0.3), 100.0, 128)
    T = 2.0

    def run(dt):
        return evolve(p, EvolutionConfig(dt, T, (T,), scheme="StrangSplit"))[0].field

    ref = evolve(p, EvolutionConfig(0.002, T, (T,)))[0].field
    e1 = np.max(np.abs(run(0.02) - ref))
    e2 = np.max(np.abs(run(0.01) - ref))
    assert 3 < e1 / e2 < 5


@pytest.mark.slow
def test_step_halving_t50():
    p = periodic_potential(sech_profile(0.3), 400.0, 4096)
    a = evolve(p, EvolutionConfig(0.0025, 50.0, (50.0,)))[0].field
    b = evolve(p, EvolutionConfig(0.00125, 50.0, (50.0,)))[0].field
    assert np.sqrt(np.sum((a - b) ** 2) * p.grid.dx) <= 1e-7


def test_spectral_doubling():
    for f in (sech_profile(0.3), gaussian_profile(0.5)):
        a = evolve(periodic_potential(f, 400.0, 4096), EvolutionConfig(0.05, 20.0, (20.0,)))[0].field
        b = evolve(periodic_potential(f, 400.0, 8192), EvolutionConfig(0.05, 20.0, (20.0,)))[0].field
        assert np.max(np.abs(a - b[::2])) <= 1e-8


def test_conservation_and_reality_short():
    p = periodic_potential(sech_profile(0.3), 400.0, 4096)
    snaps = evolve(p, EvolutionConfig(0.05, 40.0, (0.0, 20.0, 40.0)))
    d0 = snaps[0].diagnostics
    for s in snaps[1:]:
        assert abs(s.diagnostics["I2"] - d0["I2"]) / d0["I2"] <= 1e-6
        assert abs(s.diagnostics["E"] - d0["E"]) / d0["E"] <= 1e-5
        assert s.diagnostics["imag_residue"] <= 1e-10
    # the integral of u is carried by the zero mode and never changes
    assert snaps[-1].diagnostics["I1"] == pytest.approx(d0["I1"], abs=1e-12)


def test_record_time_off_step():
    p = periodic_potential(sech_profile(0.3), 100.0, 256)
    snaps = evolve(p, EvolutionConfig(0.1, 0.35, (0.0, 0.33, 0.35)))
    assert [s.t for s in snaps] == [0.0, 0.33, 0.35]
    np.testing.assert_array_equal(snaps[0].field, p.values)
    # three full steps then one short step of 0.03
    mid = evolve(p, EvolutionConfig(0.1, 0.3, (0.3,)))[0].field
    end = evolve(mid, EvolutionConfig(0.03, 0.03, (0.03,)), p.grid)[0].field
    assert np.max(np.abs(snaps[1].field - end)) < 1e-14


def test_blowup_guard():
    p = periodic_potential(sech_profile(0.3), 100.0, 256)
    with pytest.raises(BlowUp):
        evolve(p, EvolutionConfig(0.1, 10.0, (10.0,), blowup_factor=0.5))


def test_wraparound_warning():
    p = periodic_potential(sech_profile(0.3), 40.0, 256)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        evolve(p, EvolutionConfig(0.05, 5.0, (2.0, 5.0)))
    hits = [w for w in caught if issubclass(w.category, WrapAroundWarning)]
    assert len(hits) == 1


def test_non_periodic_rejected():
    p = Potential.from_function(sech_profile(0.3), SpatialGrid.from_interval(-10, 10, 0.1))
    with pytest.raises(ValueError):
        evolve(p, EvolutionConfig(0.1, 1.0))


def test_snapshot_io(tmp_path):
    p = periodic_potential(sech_profile(0.3), 50.0, 128)
    cfg = EvolutionConfig(0.1, 1.0, (0.5, 1.0))
    snaps = evolve(p, cfg)
    write_snapshots(snaps, tmp_path, cfg.to_dict())
    assert (tmp_path / "manifest.json").exists()
    text = (tmp_path / "snapshot_t0.5.csv").read_text()
    assert text.startswith("x,u\n")
    back = read_snapshots(tmp_path)
    assert [s.t for s in back] == [0.5, 1.0]
    for a, b in zip(snaps, back):
        np.testing.assert_array_equal(a.field, b.field)
