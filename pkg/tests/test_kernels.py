import os
import subprocess
import sys

import numpy as np
import pytest

from mkdv_longtime import kernels
from mkdv_longtime.scattering import midpoint_values
from mkdv_longtime.special import airy_ai, airy_ai_prime

BACKENDS = sorted(kernels.available_backends())


def _jost_inputs():
    dx = 0.02
    x = np.arange(-20.0, 20.0 + dx / 2, dx)
    u = 0.4 * np.exp(-x ** 2) + 0.1 / np.cosh(x - 1)
    return u, midpoint_values(u), x[0], dx, np.linspace(-4, 4, 81)


def test_compiled_backend_present():
    # the extension is optional, but a normal install builds it
    assert kernels.BACKEND in ("compiled", "python")
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", BACKENDS)
def test_jost_zero_potential(name):
    u = np.zeros(11)
    p, q = kernels.jost_sweep(u, midpoint_values(u), 0.0, 0.1, np.array([-1.0, 0.0, 2.0]), backend=name)
    np.testing.assert_array_equal(p, 1.0)
    np.testing.assert_array_equal(q, 0.0)


def test_backends_agree_jost():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    args = _jost_inputs()
    pc, qc = kernels.jost_sweep(*args, backend="compiled")
    pp, qp = kernels.jost_sweep(*args, backend="python")
    assert np.max(np.abs(pc - pp)) < 1e-13
    assert np.max(np.abs(qc - qp)) < 1e-13


def test_backends_agree_painleve():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    a = (0.5 * airy_ai(8.0), 0.5 * airy_ai_prime(8.0), 8.0, 1e-2, 1200, 1e-12, 1e-15, 1e3)
    Pc, Dc, sc, kc = kernels.painleve_march(*a, backend="compiled")
    Pp, Dp, sp, kp = kernels.painleve_march(*a, backend="python")
    assert sc == sp == 0 and kc == kp == 1200
    assert np.max(np.abs(Pc - Pp)) < 1e-13
    assert np.max(np.abs(Dc - Dp)) < 1e-13


@pytest.mark.parametrize("name", BACKENDS)
def test_painleve_guard_status(name):
    # large data blows up in finite s: guard must trip
    P, D, status, k = kernels.painleve_march(2.0, 0.0, 0.0, 1e-2, 1000, 1e-10, 1e-12, 50.0, backend=name)
    assert status == 1
    assert k < 1000


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, MKDV_LONGTIME_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from mkdv_longtime import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
