"""Experiment configs, numerics-vs-asymptotics comparison, decay fits and reports."""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field

import numpy as np
import scipy
import scipy.fft as sfft
import yaml

from . import __version__, kernels
from .asymptotics import (
    calibrate_rho,
    error_envelope,
    region1_leading,
    region234_leading,
)
from .core import RegionLabel, RegionThresholds, SpatialGrid, classify_region, make_geometry
from .errors import ConfigError, MKdVError
from .scattering import (
    Potential,
    gaussian_profile,
    reflection_coefficient,
    sech_profile,
)
from .solver import EvolutionConfig, evolve
from .special import painleve2_solve

DEFAULTS = {
    "profile": {"kind": "sech", "amplitude": 0.3, "width": 1.0},
    "domain": {"length": 12800.0, "n": 65536},
    "solver": {"dt": 0.05, "scheme": "ETDRK4", "dealias_fraction": 2.0 / 3.0},
    "scattering": {"dx": 0.01, "half_width": 40.0, "z_max": 3.0, "dz": 0.005},
    "painleve": {"s_min": -30.0, "s_max": 40.0, "ds": 1e-3},
    "thresholds": {"M_prime": 1.0, "tau_I": 10.0, "tau_V": 10.0, "growth_exponent": 0.4},
    "envelope": {"p": 8.0, "eta": 0.1, "c": 1.0},
    "rays": [
        {"name": "x=-3t", "ratio": -3.0},
        {"name": "x=0", "x": 0.0},
        {"name": "x=+3t", "ratio": 3.0},
    ],
    "times": [25.0, 50.0, 100.0, 200.0],
    "seed": 0,
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class Ray:
    name: str
    ratio: float | None = None
    x: float | None = None

    def position(self, t: float) -> float:
        return self.ratio * t if self.ratio is not None else self.x


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict

    def __post_init__(self):
        d = _merge(DEFAULTS, self.data)
        object.__setattr__(self, "data", d)
        prof = d["profile"]
        kind = prof.get("kind")
        if kind not in ("sech", "gaussian", "file"):
            raise ConfigError("profile.kind must be sech, gaussian or file", kind=kind)
        if kind == "file":
            if not prof.get("path"):
                raise ConfigError("profile.path is required for kind=file")
        else:
            if not float(prof.get("amplitude", -1)) >= 0:
                raise ConfigError("profile.amplitude must be non-negative", amplitude=prof.get("amplitude"))
            if not float(prof.get("width", 0)) > 0:
                raise ConfigError("profile.width must be positive")
        times = [float(t) for t in d["times"]]
        if any(t <= 0 for t in times) or times != sorted(times):
            raise ConfigError("times must be positive and sorted", times=times)
        n = int(d["domain"]["n"])
        if n < 8 or n & (n - 1):
            raise ConfigError("domain.n must be a power of two", n=n)
        names = [r.get("name") for r in d["rays"]]
        for r in d["rays"]:
            if ("ratio" in r) == ("x" in r):
                raise ConfigError("each ray needs exactly one of ratio or x", ray=r)
        if len(set(names)) != len(names) or None in names:
            raise ConfigError("rays need unique names", names=names)
        try:
            self.thresholds
            self.solver_config
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_yaml(cls, path_or_text) -> "ExperimentConfig":
        s = str(path_or_text)
        try:
            if "\n" not in s and os.path.exists(s):
                with open(s) as fh:
                    s = fh.read()
            doc = yaml.safe_load(s) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a mapping")
        return cls(doc)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True)

    @property
    def times(self):
        return [float(t) for t in self.data["times"]]

    @property
    def rays(self):
        return [Ray(r["name"], r.get("ratio"), r.get("x")) for r in self.data["rays"]]

    @property
    def thresholds(self):
        return RegionThresholds(**{k: float(v) for k, v in self.data["thresholds"].items()})

    @property
    def envelope(self):
        return {k: float(v) for k, v in self.data["envelope"].items()}

    @property
    def grid(self):
        dom = self.data["domain"]
        return SpatialGrid.centered(float(dom["length"]), int(dom["n"]))

    @property
    def solver_config(self):
        s = self.data["solver"]
        times = self.times
        return EvolutionConfig(float(s["dt"]), max(times) if times else 1.0, tuple(times),
                               float(s.get("dealias_fraction", 2 / 3)), s.get("scheme", "ETDRK4"))

    def profile_function(self):
        prof = self.data["profile"]
        kind = prof["kind"]
        if kind == "sech":
            return sech_profile(float(prof["amplitude"]), float(prof["width"]))
        if kind == "gaussian":
            return gaussian_profile(float(prof["amplitude"]), float(prof["width"]))
        xs, us = load_profile_csv(prof["path"])

        def f(x):
            return np.interp(x, xs, us, left=0.0, right=0.0)
        return f

    def scattering_potential(self) -> Potential:
        sc = self.data["scattering"]
        hw, dx = float(sc["half_width"]), float(sc["dx"])
        return Potential.from_function(self.profile_function(), SpatialGrid.from_interval(-hw, hw, dx))

    def solver_potential(self) -> Potential:
        return Potential.from_function(self.profile_function(), self.grid)


def load_profile_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0][:2]] != ["x", "u"]:
        raise ConfigError("profile CSV needs header x,u", path=str(path))
    arr = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r])
    order = np.argsort(arr[:, 0])
    return arr[order, 0], arr[order, 1]


# ---------------------------------------------------------------- sampling helpers

def spectral_sample(u, grid: SpatialGrid, x):
    """Trigonometric interpolant of a periodic field at arbitrary points."""
    u = np.asarray(u, dtype=float)
    n = grid.n
    v = sfft.rfft(u) / n
    xi = grid.wavenumbers()
    w = np.full(v.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    xx = np.atleast_1d(np.asarray(x, dtype=float)) - grid.x_min
    out = np.array([float(np.sum(w * (v * np.exp(1j * xi * p)).real)) for p in xx])
    return out if np.ndim(x) else float(out[0])


def local_amplitude(u, grid: SpatialGrid, x_center: float, half_window: float, samples: int = 401) -> float:
    xs = np.linspace(x_center - half_window, x_center + half_window, samples)
    return float(np.max(np.abs(spectral_sample(u, grid, xs))))


def zero_crossings(x, u):
    """Linearly interpolated sign changes of u sampled at x."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    s = np.signbit(u)
    idx = np.flatnonzero(s[:-1] != s[1:])
    return x[idx] - u[idx] * (x[idx + 1] - x[idx]) / (u[idx + 1] - u[idx])


def predicted_zeros(table, t: float, x_lo: float, x_hi: float, samples: int = 2001, convention="calibrated"):
    """Zeros of cos(Theta(x)) for the oscillatory leading term on [x_lo, x_hi] (x < 0)."""
    xs = np.linspace(x_lo, x_hi, samples)
    vals = np.array([region1_leading(make_geometry(v, t), table, convention) for v in xs])
    return zero_crossings(xs, vals)


# ---------------------------------------------------------------- fitting

@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    r_squared: float
    n_points: int


def fit_decay(series) -> DecayFit:
    pts = [(float(t), float(e)) for t, e in series]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    t = np.array([p[0] for p in pts])
    e = np.array([p[1] for p in pts])
    if np.any(t <= 0) or np.any(~(e > 0)):
        raise ValueError("times and errors must be positive")
    lx, ly = np.log(t), np.log(e)
    xm, ym = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    if sxx == 0:
        raise ValueError("times must not all coincide")
    slope = float(np.sum((lx - xm) * (ly - ym)) / sxx)
    icpt = float(ym - slope * xm)
    sst = float(np.sum((ly - ym) ** 2))
    sse = float(np.sum((ly - icpt - slope * lx) ** 2))
    r2 = 1.0 if sst <= 1e-30 * max(1.0, ym * ym) else max(0.0, min(1.0, 1.0 - sse / sst))
    return DecayFit(slope, icpt, r2, len(pts))


# ---------------------------------------------------------------- comparison

RESULT_COLUMNS = ("ray", "x", "t", "region", "u_num", "u_as", "err", "envelope")
FIT_COLUMNS = ("ray", "exponent", "r_squared")


@dataclass
class Report:
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    ray_names: list = field(default_factory=list)


def versions() -> dict:
    return {
        "mkdv_longtime": __version__,
        "kernel_backend": kernels.BACKEND,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run_compare(cfg: ExperimentConfig, threads: int = 1, snapshots=None, table=None) -> Report:
    """Solve, scatter, calibrate and compare at every (ray, time) probe."""
    times = cfg.times
    env_kw = cfg.envelope
    th = cfg.thresholds
    u_sc = cfg.scattering_potential()
    degenerate = u_sc.is_zero()
    sc = cfg.data["scattering"]
    if table is None:
        table = reflection_coefficient(u_sc, float(sc["z_max"]), float(sc["dz"]), threads=threads)
    if snapshots is None:
        snapshots = evolve(cfg.solver_potential(), cfg.solver_config)
    by_t = {s.t: s for s in snapshots}
    grid = snapshots[0].grid if snapshots else cfg.grid

    pv = cfg.data["painleve"]
    calib = None
    if degenerate:
        rho, branch = 0.0, "zero"
    else:
        origin = [(t, spectral_sample(by_t[t].field, grid, 0.0)) for t in times]
        calib = calibrate_rho(table, origin, s_min=float(pv["s_min"]), s_max=float(pv["s_max"]),
                              ds=float(pv["ds"]))
        rho, branch = calib.rho, calib.branch
    if calib is not None:
        sol = calib.solutions[branch]
    else:
        sol = painleve2_solve(0.0, float(pv["s_min"]), float(pv["s_max"]), float(pv["ds"]))

    rows = []
    for ray in cfg.rays:
        for t in times:
            x = float(ray.position(t))
            try:
                g = make_geometry(x, t)
                label = classify_region(g, th)
                u_num = spectral_sample(by_t[t].field, grid, x)
                if label is RegionLabel.I:
                    u_as = region1_leading(g, table)
                elif label is RegionLabel.V:
                    u_as = 0.0
                else:
                    u_as = region234_leading(g, sol)
                env = error_envelope(g, label, **env_kw)
            except MKdVError as exc:
                exc.context.update({"ray": ray.name, "x": x, "t": t})
                raise
            rows.append({"ray": ray.name, "x": x, "t": t, "region": label.value, "u_num": u_num,
                         "u_as": u_as, "err": abs(u_num - u_as), "envelope": env})

    fits = {}
    for ray in cfg.rays:
        series = [(r["t"], r["err"]) for r in rows if r["ray"] == ray.name]
        if len(series) >= 3 and all(e > 0 for _, e in series):
            fits[ray.name] = fit_decay(series)

    manifest = {
        "config": cfg.data,
        "versions": versions(),
        "degenerate": degenerate,
        "rho": {"value": rho, "branch": branch, "r0": float(table.r0().real),
                "residual_plus": None if calib is None else calib.residual_plus,
                "residual_minus": None if calib is None else calib.residual_minus,
                "ratio": None if calib is None or math.isinf(calib.ratio) else calib.ratio},
        "scattering": dict(table.meta),
        "painleve": dict(sol.meta),
        "solver": [{"t": s.t, **s.diagnostics} for s in snapshots],
    }
    return Report(rows, fits, manifest, [r.name for r in cfg.rays])


# ---------------------------------------------------------------- emission

def _fmt(v):
    if isinstance(v, str):
        return v
    return repr(float(v))


def results_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in report.rows:
        w.writerow([_fmt(r[c]) for c in RESULT_COLUMNS])
    return buf.getvalue()


def fits_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_COLUMNS)
    for name in report.ray_names:
        f = report.fits.get(name)
        if f is not None:
            w.writerow([name, _fmt(f.exponent), _fmt(f.r_squared)])
    return buf.getvalue()


def _slug(name):
    name = name.replace("+", "p").replace("=", "")
    keep = "".join(c if c.isalnum() or c in "-_" else "_" for c in name)
    return keep.strip("_") or "ray"


def _plot_ray(rows, name, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "mkdv-longtime"
    t = np.array([r["t"] for r in rows])
    un = np.abs([r["u_num"] for r in rows])
    ua = np.abs([r["u_as"] for r in rows])
    env = np.array([r["envelope"] for r in rows], dtype=float)
    tiny = 1e-300
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(t, np.maximum(un, tiny), "o-", label="|u_num|")
    ax.loglog(t, np.maximum(ua, tiny), "s--", label="|u_as|")
    if np.all(np.isfinite(env)):
        lo = np.maximum(ua - env, np.maximum(ua, tiny) * 1e-3)
        ax.fill_between(t, lo, ua + env, alpha=0.2, label="envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("|u|")
    ax.set_title(name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(report: Report, out_dir) -> list:
    try:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for name, text in (("results.csv", results_csv(report)), ("fits.csv", fits_csv(report))):
            p = os.path.join(out_dir, name)
            with open(p, "w", newline="") as fh:
                fh.write(text)
            written.append(p)
        p = os.path.join(out_dir, "manifest.json")
        with open(p, "w") as fh:
            json.dump(report.manifest, fh, indent=1, sort_keys=True, default=_json_default)
        written.append(p)
        for name in report.ray_names:
            rows = [r for r in report.rows if r["ray"] == name]
            if rows:
                p = os.path.join(out_dir, f"ray_{_slug(name)}.svg")
                _plot_ray(rows, name, p)
                written.append(p)
        return written
    except OSError as exc:
        raise MKdVError(f"cannot write report: {exc.strerror}", path=str(exc.filename or out_dir)) from None


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
