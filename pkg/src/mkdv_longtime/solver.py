"""Fourier pseudo-spectral reference solver for defocusing MKdV.

Solves u_t = -u_xxx + 2 (u^3)_x on a periodic grid.  In Fourier space the
linear part is the multiplier i xi^3 and the nonlinearity is
2 i xi F[u^3], truncated by the 2/3 rule.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.integrate import trapezoid

from .core import SpatialGrid
from .errors import BlowUp, WrapAroundWarning
from .scattering import Potential

SCHEMES = ("ETDRK4", "StrangSplit")


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    record_times: tuple = ()
    dealias_fraction: float = 2.0 / 3.0
    scheme: str = "ETDRK4"
    wrap_tol: float = 1e-6
    boundary_fraction: float = 0.05
    blowup_factor: float = 1e3
    workers: int = 1

    def __post_init__(self):
        rt = tuple(float(t) for t in self.record_times)
        object.__setattr__(self, "record_times", rt)
        if not (self.dt > 0 and self.t_final > 0):
            raise ValueError("dt and t_final must be positive")
        if list(rt) != sorted(rt) or any(t < 0 or t > self.t_final * (1 + 1e-12) for t in rt):
            raise ValueError("record_times must be sorted and inside [0, t_final]")
        if not 0 < self.dealias_fraction <= 1:
            raise ValueError("dealias_fraction must be in (0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")

    def to_dict(self):
        d = asdict(self)
        d["record_times"] = list(self.record_times)
        return d


@dataclass(frozen=True)
class EvolutionSnapshot:
    t: float
    grid: SpatialGrid
    field: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def x(self):
        return self.grid.x

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "u"])
        for a, b in zip(self.grid.x, self.field):
            w.writerow([repr(float(a)), repr(float(b))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def odd_wavenumbers(grid: SpatialGrid) -> np.ndarray:
    """rfft wavenumbers with the Nyquist entry zeroed.

    An odd multiplier such as i xi^3 would make the Nyquist coefficient of a
    real field complex, which irfft then silently drops.
    """
    xi = grid.wavenumbers()
    if grid.n % 2 == 0:
        xi[-1] = 0.0
    return xi


def airy_propagator(u, t_step: float, grid: SpatialGrid, workers: int = 1) -> np.ndarray:
    """Exact linear flow u_t = -u_xxx: multiply mode xi by exp(i t xi^3)."""
    u = np.asarray(u, dtype=float)
    if t_step == 0:
        return u.copy()
    xi = odd_wavenumbers(grid)
    v = sfft.rfft(u, workers=workers) * np.exp(1j * t_step * xi ** 3)
    return sfft.irfft(v, grid.n, workers=workers)


def phi_functions(z):
    """phi_1, phi_2, phi_3 of the exponential integrators, Taylor series near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    out = []
    zb, zs = z[~small], z[small]
    e = np.exp(zb)
    big = [(e - 1) / zb, (e - 1 - zb) / zb ** 2, (e - 1 - zb - zb ** 2 / 2) / zb ** 3]
    for k in (1, 2, 3):
        p = np.empty_like(z)
        p[~small] = big[k - 1]
        # Horner form of sum_j z^j / (j + k)!
        acc = np.zeros_like(zs)
        for j in range(24, -1, -1):
            acc = acc * zs + 1.0 / math.factorial(j + k)
        p[small] = acc
        out.append(p)
    return tuple(out)


class _Stepper:
    def __init__(self, grid: SpatialGrid, cfg: EvolutionConfig):
        self.n = grid.n
        self.workers = cfg.workers
        xi = odd_wavenumbers(grid)
        self.lin = 1j * xi ** 3
        mask = xi <= cfg.dealias_fraction * grid.wavenumbers().max()
        self.g = 2j * xi * mask
        self.scheme = cfg.scheme
        self._cache = {}

    def nonlinear(self, v):
        u = sfft.irfft(v, self.n, workers=self.workers)
        return self.g * sfft.rfft(u * u * u, workers=self.workers)

    def _coeffs(self, h):
        c = self._cache.get(h)
        if c is None:
            hl = h * self.lin
            p1h, _, _ = phi_functions(hl / 2)
            p1, p2, p3 = phi_functions(hl)
            c = (np.exp(hl), np.exp(hl / 2), h / 2 * p1h,
                 h * (p1 - 3 * p2 + 4 * p3), h * (p2 - 2 * p3), h * (-p2 + 4 * p3))
            self._cache[h] = c
        return c

    def step(self, v, h):
        if self.scheme == "ETDRK4":
            E, E2, Q, f1, f2, f3 = self._coeffs(h)
            N = self.nonlinear
            Nv = N(v)
            a = E2 * v + Q * Nv
            Na = N(a)
            b = E2 * v + Q * Na
            Nb = N(b)
            c = E2 * a + Q * (2 * Nb - Nv)
            Nc = N(c)
            return E * v + f1 * Nv + 2 * f2 * (Na + Nb) + f3 * Nc
        # Strang: exact half linear step, RK4 on the nonlinear flow, exact half linear step
        E2 = self._coeffs(h)[1]
        N = self.nonlinear
        w = E2 * v
        k1 = N(w)
        k2 = N(w + 0.5 * h * k1)
        k3 = N(w + 0.5 * h * k2)
        k4 = N(w + h * k3)
        w = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return E2 * w


def conserved_quantities(snapshot_or_field, grid: SpatialGrid | None = None):
    """(I1, I2, E) with E = int u_x^2 + u^4; trapezoid rule, spectral derivative."""
    if grid is None:
        grid = snapshot_or_field.grid
        u = snapshot_or_field.field
    else:
        u = np.asarray(snapshot_or_field, dtype=float)
    dx = grid.dx
    if grid.periodic:
        def trap(f):
            return float(np.sum(f) * dx)
    else:
        def trap(f):
            return float(trapezoid(f, dx=dx))
    ux = sfft.irfft(1j * odd_wavenumbers(grid) * sfft.rfft(u), grid.n)
    return trap(u), trap(u * u), trap(ux * ux + u ** 4)


def _boundary_ratio(u, frac):
    m = max(1, int(frac * u.size))
    tot = float(np.sum(u * u))
    if tot == 0:
        return 0.0
    edge = float(np.sum(u[:m] ** 2) + np.sum(u[-m:] ** 2))
    return math.sqrt(edge / tot)


def _imag_residue(v, n):
    # irfft silently drops these; a real field has them exactly real
    res = abs(v[0].imag)
    if n % 2 == 0:
        res = max(res, abs(v[-1].imag))
    return res / n


def evolve(u0, cfg: EvolutionConfig, grid: SpatialGrid | None = None) -> list[EvolutionSnapshot]:
    """March u0 to every record time; returns snapshots in record order."""
    if isinstance(u0, Potential):
        grid = u0.grid
        u = np.array(u0.values, dtype=float)
    else:
        if grid is None:
            raise ValueError("grid is required when u0 is an array")
        u = np.array(u0, dtype=float)
    if not grid.periodic:
        raise ValueError("evolve needs a periodic grid")
    stepper = _Stepper(grid, cfg)
    n = grid.n
    sup0 = float(np.max(np.abs(u))) if u.size else 0.0
    guard = cfg.blowup_factor * max(sup0, 1e-300)
    v = sfft.rfft(u, workers=cfg.workers)
    targets = list(cfg.record_times)
    snaps = []
    warned = False
    t = 0.0
    it = 0

    def record(tval, vv, f=None):
        nonlocal warned
        if f is None:
            f = sfft.irfft(vv, n, workers=cfg.workers)
        sup = float(np.max(np.abs(f))) if f.size else 0.0
        I1, I2, E = conserved_quantities(f, grid)
        ratio = _boundary_ratio(f, cfg.boundary_fraction)
        diag = {"I1": I1, "I2": I2, "E": E, "sup": sup,
                "imag_residue": _imag_residue(vv, n) / max(sup, 1e-300) if sup else 0.0,
                "boundary_ratio": ratio, "steps": it}
        if ratio > cfg.wrap_tol and not warned:
            warnings.warn(f"boundary-window L2 ratio {ratio:.3e} exceeds {cfg.wrap_tol:g} at t={tval:g}",
                          WrapAroundWarning, stacklevel=3)
            warned = True
        f.setflags(write=False)
        snaps.append(EvolutionSnapshot(float(tval), grid, f, diag))

    while targets and targets[0] <= 0:
        record(targets.pop(0), v, u.copy())
    eps = 1e-9 * cfg.dt
    t_end = cfg.t_final
    while t < t_end - eps:
        h = cfg.dt
        nxt = min(targets[0] if targets else t_end, t_end)
        if t + h > nxt - eps:
            h = nxt - t
        v = stepper.step(v, h)
        it += 1
        t = nxt if abs(t + h - nxt) <= eps else t + h
        if it % 64 == 0 or (targets and t >= targets[0] - eps):
            u_now = sfft.irfft(v, n, workers=cfg.workers)
            sup = float(np.max(np.abs(u_now)))
            if not math.isfinite(sup) or sup > guard:
                raise BlowUp("field exceeded the amplitude guard", t=t, sup=sup, guard=guard)
        while targets and t >= targets[0] - eps:
            record(targets.pop(0), v)
    return snaps


def write_snapshots(snaps, out_dir, config: dict | None = None) -> str:
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for s in snaps:
        name = f"snapshot_t{s.t:g}.csv"
        s.to_csv(os.path.join(out_dir, name))
        files.append(name)
    grid = snaps[0].grid if snaps else None
    manifest = {
        "times": [s.t for s in snaps],
        "files": files,
        "grid": None if grid is None else {"x_min": grid.x_min, "dx": grid.dx, "n": grid.n,
                                           "periodic": grid.periodic},
        "config": config or {},
        "conserved": {k: [s.diagnostics.get(k) for s in snaps] for k in ("I1", "I2", "E")},
        "diagnostics": [s.diagnostics for s in snaps],
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path


def read_snapshots(out_dir) -> list[EvolutionSnapshot]:
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        m = json.load(fh)
    g = m["grid"]
    grid = SpatialGrid(g["x_min"], g["dx"], g["n"], g["periodic"])
    out = []
    for t, name, diag in zip(m["times"], m["files"], m["diagnostics"]):
        with open(os.path.join(out_dir, name)) as fh:
            rows = list(csv.reader(fh))[1:]
        u = np.array([float(r[1]) for r in rows])
        out.append(EvolutionSnapshot(float(t), grid, u, diag))
    return out
