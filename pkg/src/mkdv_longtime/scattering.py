"""Direct scattering for the AKNS operator of defocusing MKdV.

The Lax equation is integrated in its real-symmetric form

    dPsi/dx = -i z sigma_3 Psi + [[0, u], [u, 0]] Psi,

which is the conjugate of the ``[[0, iu], [-iu, 0]]`` form by the constant
gauge ``diag(e^{i pi/4}, e^{-i pi/4})``.  In this gauge a real potential gives
``r(-z) = conj(r(z))`` and a real ``r(0)``.  ``GAUGE_ROTATION`` converts a
reflection coefficient from this gauge to the ``iu`` gauge.

Integration runs on the envelope ``Phi = e^{i x z sigma_3} Psi`` with
``Phi -> I`` at the left edge of the effective support, and the transition
matrix is read from ``Psi^+ = Psi^- T``, i.e. ``T = Phi(x_R)^{-1}``.  Only the
first column of ``Phi`` is integrated; the second follows from
``Phi_22 = conj(Phi_11)``, ``Phi_12 = conj(Phi_21)`` for real z.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels
from .core import SpatialGrid
from .errors import NonConvergence, OutOfRange

GAUGE_ROTATION = 1j


@dataclass(frozen=True)
class Potential:
    grid: SpatialGrid
    values: np.ndarray
    tail_epsilon: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size != self.grid.n:
            raise ValueError("values must be a 1-d array of length grid.n")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.tail_epsilon is None:
            amp = float(np.max(np.abs(vals))) if vals.size else 0.0
            object.__setattr__(self, "tail_epsilon", 1e-12 * amp if amp > 0 else 1e-300)
        elif self.tail_epsilon <= 0:
            raise ValueError("tail_epsilon must be positive")

    @classmethod
    def from_function(cls, f, grid: SpatialGrid, tail_epsilon=None) -> "Potential":
        with np.errstate(over="ignore"):
            return cls(grid, np.asarray(f(grid.x), dtype=float), tail_epsilon)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def effective_support(self) -> tuple[int, int]:
        """Node indices (i_left, i_right) of the smallest window with |u| >= tail_epsilon."""
        idx = np.flatnonzero(np.abs(self.values) >= self.tail_epsilon)
        if idx.size == 0:
            return 0, 0
        return int(idx[0]), int(idx[-1])


def sech_profile(amplitude: float, width: float = 1.0):
    def f(x):
        with np.errstate(over="ignore"):
            return amplitude / np.cosh(np.asarray(x) / width)
    return f


def gaussian_profile(amplitude: float, width: float = 1.0):
    def f(x):
        return amplitude * np.exp(-(np.asarray(x) / width) ** 2)
    return f


def box_profile(height: float, left: float, right: float):
    def f(x):
        x = np.asarray(x)
        return np.where((x >= left) & (x <= right), height, 0.0)
    return f


def midpoint_values(u: np.ndarray) -> np.ndarray:
    """Fourth-order interpolation of u at cell midpoints (one-sided at the ends)."""
    u = np.asarray(u, dtype=float)
    n = u.size
    if n < 2:
        return np.zeros(0)
    if n < 4:
        return 0.5 * (u[:-1] + u[1:])
    um = np.empty(n - 1)
    um[1:-1] = (-u[:-3] + 9.0 * u[1:-2] + 9.0 * u[2:-1] - u[3:]) / 16.0
    um[0] = (5.0 * u[0] + 15.0 * u[1] - 5.0 * u[2] + u[3]) / 16.0
    um[-1] = (5.0 * u[-1] + 15.0 * u[-2] - 5.0 * u[-3] + u[-4]) / 16.0
    return um


@dataclass(frozen=True)
class TransitionMatrix:
    z: float
    a: complex
    b: complex
    richardson_error: float = 0.0

    @property
    def b_breve(self) -> complex:
        return self.b.conjugate()

    @property
    def a_breve(self) -> complex:
        return self.a.conjugate()

    @property
    def residual(self) -> float:
        """|a|^2 - |b|^2 - 1, zero for exact defocusing scattering."""
        return abs(self.a) ** 2 - abs(self.b) ** 2 - 1.0

    @property
    def reflection(self) -> complex:
        return self.b_breve / self.a

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b_breve], [self.b, self.a_breve]])


def _support_slices(u0: Potential):
    """Fine (step dx) and coarse (step 2 dx) node sets over the effective support."""
    i0, i1 = u0.effective_support()
    n = u0.grid.n
    # at least 4 nodes and an even number of intervals for the coarse pass
    while i1 - i0 < 4 and (i0 > 0 or i1 < n - 1):
        i0, i1 = max(i0 - 1, 0), min(i1 + 1, n - 1)
    if (i1 - i0) % 2:
        if i1 < n - 1:
            i1 += 1
        elif i0 > 0:
            i0 -= 1
    return i0, i1


def _sweep(u0: Potential, z: np.ndarray, threads: int = 1, backend=None):
    """Envelope integration at step dx and at 2 dx (for the Richardson estimate)."""
    i0, i1 = _support_slices(u0)
    u = np.ascontiguousarray(u0.values[i0:i1 + 1])
    x_left = u0.grid.x_min + i0 * u0.grid.dx
    h = u0.grid.dx
    z = np.ascontiguousarray(np.asarray(z, dtype=float))
    um = midpoint_values(u)
    coarse = (u.size - 1) % 2 == 0 and u.size >= 5
    uc = np.ascontiguousarray(u[::2])
    umc = np.ascontiguousarray(u[1::2])

    def work(zc):
        p, q = kernels.jost_sweep(u, um, x_left, h, zc, backend=backend)
        if coarse:
            p2, q2 = kernels.jost_sweep(uc, umc, x_left, 2.0 * h, zc, backend=backend)
        else:
            p2, q2 = p, q
        return p, q, p2, q2

    if threads > 1 and z.size > 1:
        chunks = np.array_split(z, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, [np.ascontiguousarray(c) for c in chunks]))
        return tuple(np.concatenate([pt[i] for pt in parts]) for i in range(4))
    return work(z)


def _abq(p, q):
    # T = Phi^{-1}:  a = conj(Phi_11), b = -Phi_21
    return np.conj(p), -q


def jost_solve(u0: Potential, z: float, tol: float = 1e-6, backend=None) -> TransitionMatrix:
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    if u0.is_zero():
        return TransitionMatrix(float(z), 1.0 + 0j, 0j, 0.0)
    p, q, p2, q2 = _sweep(u0, np.array([float(z)]), backend=backend)
    a, b = _abq(p, q)
    a2, b2 = _abq(p2, q2)
    err = float(max(abs(a[0] - a2[0]), abs(b[0] - b2[0])) / 15.0)
    tm = TransitionMatrix(float(z), complex(a[0]), complex(b[0]), err)
    if not err <= tol:
        raise NonConvergence(
            "step dx too coarse for the requested tolerance",
            z=float(z), richardson_error=err, residual=tm.residual, tol=tol,
        )
    return tm


def symmetric_grid(z_max: float, dz: float) -> np.ndarray:
    if not (z_max > 0 and dz > 0):
        raise ValueError("z_max and dz must be positive")
    k = int(round(z_max / dz))
    j = np.arange(-k, k + 1)
    return j * dz


@dataclass(frozen=True)
class ReflectionTable:
    z_grid: np.ndarray
    r_values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        z = np.asarray(self.z_grid, dtype=float)
        r = np.asarray(self.r_values, dtype=complex)
        if z.ndim != 1 or z.shape != r.shape or z.size < 3:
            raise ValueError("z_grid and r_values must be matching 1-d arrays (>= 3 nodes)")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z_grid must be increasing")
        z.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "r_values", r)
        object.__setattr__(self, "_spline", CubicSpline(z, r))

    @property
    def z_max(self) -> float:
        return float(self.z_grid[-1])

    @property
    def dz(self) -> float:
        return float(self.z_grid[1] - self.z_grid[0])

    def r_at(self, z):
        zz = np.asarray(z, dtype=float)
        lo, hi = self.z_grid[0], self.z_grid[-1]
        slack = 1e-12 * max(1.0, hi - lo)
        if np.any(zz < lo - slack) or np.any(zz > hi + slack):
            raise OutOfRange("z outside the tabulated window", z_min=float(lo), z_max=float(hi))
        zc = np.clip(zz, lo, hi)
        out = np.asarray(self._spline(zc), dtype=complex)
        # exact at nodes
        k = np.clip(np.searchsorted(self.z_grid, zc), 0, self.z_grid.size - 1)
        hit = self.z_grid[k] == zc
        out = np.where(hit, self.r_values[k], out)
        return complex(out) if out.ndim == 0 else out

    __call__ = r_at

    def r0(self) -> complex:
        return self.r_at(0.0)

    def symmetry_defect(self) -> float:
        """max |r(-z) - conj r(z)| over the grid (requires a symmetric grid)."""
        return float(np.max(np.abs(self.r_values[::-1] - np.conj(self.r_values))))

    def scaled(self, factor: complex) -> "ReflectionTable":
        return ReflectionTable(self.z_grid, factor * self.r_values, dict(self.meta))

    # -- serialisation -------------------------------------------------
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z", "re_r", "im_r"])
        for z, r in zip(self.z_grid, self.r_values):
            w.writerow([repr(float(z)), repr(float(r.real)), repr(float(r.imag))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text, meta=None) -> "ReflectionTable":
        text = _read_text(path_or_text)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["z", "re_r", "im_r"]:
            raise ValueError("reflection CSV must have header z,re_r,im_r")
        data = [(float(a), float(b), float(c)) for a, b, c in rows[1:] if a]
        z = np.array([d[0] for d in data])
        r = np.array([complex(d[1], d[2]) for d in data])
        return cls(z, r, meta or {})

    def to_json(self, path=None) -> str:
        doc = {
            "kind": "reflection_table",
            "z_max": self.z_max,
            "dz": self.dz,
            "n": int(self.z_grid.size),
            "meta": _jsonable(self.meta),
            "z": [float(v) for v in self.z_grid],
            "re_r": [float(v.real) for v in self.r_values],
            "im_r": [float(v.imag) for v in self.r_values],
        }
        text = json.dumps(doc, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, path_or_text) -> "ReflectionTable":
        doc = json.loads(_read_text(path_or_text))
        r = np.array(doc["re_r"]) + 1j * np.array(doc["im_r"])
        return cls(np.array(doc["z"], dtype=float), r, doc.get("meta", {}))


def _read_text(path_or_text) -> str:
    s = str(path_or_text)
    if "\n" in s:
        return s
    with open(s) as fh:
        return fh.read()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def reflection_coefficient(
    u0: Potential,
    z_max: float = 6.0,
    dz: float = 0.005,
    tol: float = 1e-6,
    threads: int = 1,
    backend=None,
) -> ReflectionTable:
    """Tabulate r(z) = conj(b(z)) / a(z) on the symmetric grid -z_max..z_max."""
    z = symmetric_grid(z_max, dz)
    if u0.is_zero():
        return ReflectionTable(z, np.zeros(z.size, dtype=complex),
                               {"max_residual": 0.0, "max_richardson_error": 0.0, "dx": u0.grid.dx})
    p, q, p2, q2 = _sweep(u0, z, threads=threads, backend=backend)
    a, b = _abq(p, q)
    a2, b2 = _abq(p2, q2)
    err = np.maximum(np.abs(a - a2), np.abs(b - b2)) / 15.0
    residual = np.abs(np.abs(a) ** 2 - np.abs(b) ** 2 - 1.0)
    bad = np.flatnonzero(~(err <= tol))
    if bad.size:
        k = int(bad[0])
        raise NonConvergence(
            "reflection table node failed the Richardson check",
            z=float(z[k]), richardson_error=float(err[k]), residual=float(residual[k]), tol=tol,
        )
    r = np.conj(b) / a
    i0, i1 = _support_slices(u0)
    meta = {
        "dx": u0.grid.dx,
        "support": [float(u0.grid.x_min + i0 * u0.grid.dx), float(u0.grid.x_min + i1 * u0.grid.dx)],
        "tail_epsilon": u0.tail_epsilon,
        "max_residual": float(residual.max()),
        "max_richardson_error": float(err.max()),
        "max_abs_r": float(np.abs(r).max()),
    }
    return ReflectionTable(z, r, meta)


def r_at(table: ReflectionTable, z):
    return table.r_at(z)
