"""Leading-order long-time formulas and their error envelopes.

Oscillatory sector (x < 0, tau large)::

    u ~ sqrt(kappa / (3 t z0)) cos(16 t z0^3 - kappa log(192 t z0^3) + phi(z0))
    kappa = -log(1 - |r(z0)|^2) / (2 pi)
    phi(z0) = arg Gamma(i kappa) - pi/4 - arg r(z0)
              + (1/pi) int_{-z0}^{z0} log((1-|r|^2)/(1-|r(z0)|^2)) dzeta / (zeta - z0)

Self-similar sector (|x| <~ t^{1/3})::

    u ~ (3t)^{-1/3} P(x / (3t)^{1/3})

``phase_phi`` evaluates the phase formula as written on whatever table it is
given (``convention="direct"``).  Tables produced by ``scattering`` live in the
real-symmetric gauge; the combination that reproduces the PDE there is the
same formula applied to ``i r`` at the mirrored stationary point ``-z0``
(``convention="calibrated"``), which is what ``region1_leading`` uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import PhaseGeometry, RegionLabel, make_geometry
from .errors import Ambiguous, OutOfRange, QuadratureFailure
from .scattering import GAUGE_ROTATION, ReflectionTable
from .special import PainleveSolution, arg_gamma_i_kappa, painleve2_solve, painleve_eval

CONVENTIONS = ("direct", "calibrated")


def kappa_of(r_z0: complex) -> float:
    m2 = abs(complex(r_z0)) ** 2
    if not m2 < 1:
        raise ValueError("|r(z0)| must be < 1")
    return -math.log1p(-m2) / (2.0 * math.pi)


def _panels(a, b, width):
    n = max(1, int(math.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def _gauss_composite(f, a, b, width, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = _panels(a, b, width)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    return float(np.sum(weights * f(nodes)))


def _chi_integrand(table: ReflectionTable, zs: float):
    ref = math.log1p(-abs(table.r_at(zs)) ** 2)

    def f(zeta):
        m2 = np.abs(table.r_at(zeta)) ** 2
        return (np.log1p(-m2) - ref) / (zeta - zs)

    return f


def chi_integral_at(table: ReflectionTable, zs: float, width: float = 0.05,
                    order: int = 8, tol: float = 1e-9) -> float:
    """(1/pi) int_{-|zs|}^{|zs|} log((1-|r|^2)/(1-|r(zs)|^2)) dzeta/(zeta - zs), zs of either sign.

    The numerator vanishes at zeta = zs, so the integrand is bounded; Gauss
    nodes never touch the endpoint.  Two refinement levels must agree to tol.
    """
    z0 = abs(float(zs))
    if z0 == 0:
        return 0.0
    if z0 > table.z_max:
        raise OutOfRange("stationary point outside the reflection table", z0=z0, z_max=table.z_max)
    f = _chi_integrand(table, float(zs))
    coarse = _gauss_composite(f, -z0, z0, width, order)
    fine = _gauss_composite(f, -z0, z0, width / 2, order)
    if not abs(fine - coarse) <= tol * max(1.0, abs(fine)):
        raise QuadratureFailure("chi integral refinement levels disagree", z0=float(zs),
                                coarse=coarse, fine=fine, tol=tol)
    return fine / math.pi


def chi_integral_at_z0(table: ReflectionTable, z0: float, **kw) -> float:
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    return chi_integral_at(table, z0, **kw)


def chi_integral_midpoint(table: ReflectionTable, zs: float, n: int = 20000) -> float:
    """Independent composite-midpoint evaluation of ``chi_integral_at``."""
    z0 = abs(float(zs))
    if z0 == 0:
        return 0.0
    h = 2.0 * z0 / n
    nodes = -z0 + h * (np.arange(n) + 0.5)
    return float(h * np.sum(_chi_integrand(table, float(zs))(nodes)) / math.pi)


def _phase_at(table: ReflectionTable, zs: float) -> float:
    rz = table.r_at(zs)
    kappa = kappa_of(rz)
    if kappa <= 0:
        raise ValueError("phase is undefined where r(z0) = 0")
    return arg_gamma_i_kappa(kappa) - math.pi / 4 - math.atan2(rz.imag, rz.real) + chi_integral_at(table, zs)


def phase_phi(table: ReflectionTable, z0: float, convention: str = "direct") -> float:
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    if convention == "direct":
        return _phase_at(table, z0)
    if convention == "calibrated":
        return _phase_at(table.scaled(GAUGE_ROTATION), -z0)
    raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True)
class RegionIParams:
    z0: float
    kappa: float
    phi: float
    amplitude: float = float("nan")
    t: float | None = None

    def amplitude_at(self, t: float) -> float:
        return math.sqrt(self.kappa / (3.0 * t * self.z0))

    def phase_at(self, t: float) -> float:
        tz3 = t * self.z0 ** 3
        return 16.0 * tz3 - self.kappa * math.log(192.0 * tz3) + self.phi


def region1_params(g: PhaseGeometry, table: ReflectionTable, convention: str = "calibrated") -> RegionIParams:
    if not g.x < 0:
        raise ValueError("the oscillatory formula needs x < 0")
    z0 = float(g.z0.real)
    if z0 > table.z_max:
        raise OutOfRange("stationary point outside the reflection table", z0=z0, z_max=table.z_max)
    kappa = kappa_of(table.r_at(z0))
    phi = phase_phi(table, z0, convention) if kappa > 0 else 0.0
    return RegionIParams(z0, kappa, phi, math.sqrt(kappa / (3.0 * g.t * z0)), g.t)


def region1_leading(g: PhaseGeometry, table: ReflectionTable, convention: str = "calibrated") -> float:
    p = region1_params(g, table, convention)
    if p.kappa == 0:
        return 0.0
    return p.amplitude * math.cos(p.phase_at(g.t))


def region234_leading(g: PhaseGeometry, sol: PainleveSolution) -> float:
    c = (3.0 * g.t) ** (1.0 / 3.0)
    return painleve_eval(sol, g.x / c) / c


@dataclass(frozen=True)
class RhoCalibration:
    rho: float
    r0: float
    residual_plus: float
    residual_minus: float
    ratio: float
    branch: str
    solutions: dict = field(default_factory=dict, compare=False, repr=False)


def calibrate_rho(table: ReflectionTable, pde_value_at_origin, s_min: float = -12.0,
                  s_max: float = 8.0, ds: float = 1e-3, min_ratio: float = 2.0) -> RhoCalibration:
    """Pick rho = +r(0) or -r(0) by matching (3t)^{-1/3} P(0) against PDE samples at x = 0."""
    samples = [(float(t), float(u)) for t, u in pde_value_at_origin]
    if len(samples) < 3:
        raise ValueError("need at least 3 time samples")
    r0c = table.r0()
    if abs(r0c.imag) > 1e-8 * max(1.0, abs(r0c)):
        raise ValueError("r(0) is expected to be real in the real-symmetric gauge")
    r0 = float(r0c.real)
    if not abs(r0) < 1:
        raise ValueError("|r(0)| must be < 1")
    if r0 == 0:
        return RhoCalibration(0.0, 0.0, 0.0, 0.0, math.inf, "zero")
    sols, res = {}, {}
    for name, rho in (("+r(0)", r0), ("-r(0)", -r0)):
        sol = painleve2_solve(rho, s_min=s_min, s_max=s_max, ds=ds)
        sols[name] = sol
        p0 = painleve_eval(sol, 0.0)
        res[name] = sum(abs(u - p0 / (3.0 * t) ** (1.0 / 3.0)) for t, u in samples)
    hi, lo = max(res.values()), min(res.values())
    ratio = hi / lo if lo > 0 else math.inf
    best = min(res, key=res.get)
    if ratio < min_ratio:
        raise Ambiguous("both rho branches fit the data comparably", ratio=ratio,
                        residual_plus=res["+r(0)"], residual_minus=res["-r(0)"])
    return RhoCalibration(sols[best].rho, r0, res["+r(0)"], res["-r(0)"], ratio, best, sols)


def error_envelope(g: PhaseGeometry, label, p: float = 8.0, eta: float = 0.1, c: float = 1.0) -> float:
    """Error order of the leading term in each region, unit constants."""
    if not p > 4:
        raise ValueError("p must exceed 4")
    label = RegionLabel(label)
    t, tau = g.t, g.tau
    q = p / (p - 1.0)
    a = 2.0 / (3.0 * p) - 0.5
    if label is RegionLabel.I:
        zt = abs(g.z0) * t
        return zt ** -0.5 * tau ** -0.5 + zt ** -0.75
    if label is RegionLabel.II:
        return tau ** (-1.0 / (2.0 * q)) * (tau / t) ** (0.5 - 2.0 / (3.0 * p))
    if label is RegionLabel.III:
        return t ** a
    if label is RegionLabel.IV:
        return t ** -0.5 + math.exp(-16.0 * tau ** (2.0 / 3.0) * eta) * t ** a
    e = math.exp(-c * tau)
    return e * t ** (-1.0 / 3.0) + abs(g.x) ** -1.5 + e * t ** (-2.0 / 3.0)


def envelope_at(x: float, t: float, label, **kw) -> float:
    return error_envelope(make_geometry(x, t), label, **kw)
