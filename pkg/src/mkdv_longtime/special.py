"""Gamma on the imaginary axis, the Airy function, and Ablowitz-Segur solutions of PII."""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .errors import BlowUp, OutOfRange, ToleranceFailure

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def loggamma(z: complex) -> complex:
    """Complex log-Gamma on the branch continuous in the right half plane.

    Left of Re z = 1/2 the reflection formula is avoided: the value is
    shifted up by the recurrence instead so no branch of log sin is needed.
    """
    z = complex(z)
    if z.real <= 0 and z.imag == 0 and z.real == int(z.real):
        raise ValueError("loggamma has a pole at non-positive integers")
    shift = 0j
    while z.real < 0.5:
        shift -= cmath.log(z)
        z += 1.0
    z -= 1.0
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc) + shift


def arg_gamma_i_kappa(kappa: float) -> float:
    """arg Gamma(i kappa), continuous in kappa > 0 and tending to -pi/2 as kappa -> 0."""
    kappa = float(kappa)
    if not kappa > 0 or not math.isfinite(kappa):
        raise ValueError("kappa must be positive and finite")
    return loggamma(1j * kappa).imag


def abs_gamma_i_kappa_sq(kappa: float) -> float:
    return math.exp(2.0 * loggamma(1j * float(kappa)).real)


# ---------------------------------------------------------------- Airy

AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
_ASY_START = 8.0


def _uk(n):
    u = [1.0]
    for k in range(1, n):
        num = 1.0
        for j in range(2 * k + 1, 6 * k, 2):
            num *= j
        u.append(num / (216.0 ** k * math.factorial(k)))
    return u


_U = _uk(40)
_V = [1.0] + [-(6 * k + 1) / (6 * k - 1) * _U[k] for k in range(1, 40)]


def _truncated(coef, zeta, sign_alt, parity=None):
    """Sum coef[k] (+-1)^.. / zeta^k stopping at the smallest term."""
    total, last = 0.0, math.inf
    ks = range(len(coef)) if parity is None else range(parity, len(coef), 2)
    for i, k in enumerate(ks):
        term = coef[k] / zeta ** k
        if abs(term) > last:
            break
        last = abs(term)
        sgn = (-1) ** (k if parity is None else i) if sign_alt else 1
        total += sgn * term
    return total


def _airy_asymptotic(s):
    if s > 0:
        zeta = 2.0 / 3.0 * s ** 1.5
        e = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
        q = s ** 0.25
        return e / q * _truncated(_U, zeta, True), -e * q * _truncated(_V, zeta, True)
    x = -s
    zeta = 2.0 / 3.0 * x ** 1.5
    q = x ** 0.25
    c, sn = math.cos(zeta - math.pi / 4), math.sin(zeta - math.pi / 4)
    ue, uo = _truncated(_U, zeta, True, 0), _truncated(_U, zeta, True, 1)
    ve, vo = _truncated(_V, zeta, True, 0), _truncated(_V, zeta, True, 1)
    ai = (c * ue + sn * uo) / (math.sqrt(math.pi) * q)
    aip = q * (sn * ve - c * vo) / math.sqrt(math.pi)
    return ai, aip


def _taylor_step(s0, y, dy, h, nterms=40):
    # y^(n+2) = s y^(n) + n y^(n-1)
    d = [y, dy, s0 * y]
    for n in range(1, nterms):
        d.append(s0 * d[n] + n * d[n - 1])
    val, der, fact, hp = 0.0, 0.0, 1.0, 1.0
    for n in range(nterms):
        val += d[n] * hp / fact
        der += d[n + 1] * hp / fact
        fact *= n + 1
        hp *= h
    return val, der


def _march(s0, y, dy, s1, hmax=0.25):
    n = max(1, int(math.ceil(abs(s1 - s0) / hmax)))
    h = (s1 - s0) / n
    s = s0
    for _ in range(n):
        y, dy = _taylor_step(s, y, dy, h)
        s += h
    return y, dy


def _airy_pair(s: float):
    s = float(s)
    if not math.isfinite(s):
        if s == math.inf:
            return 0.0, 0.0
        raise ValueError("Ai is not defined at -inf")
    if abs(s) >= _ASY_START:
        return _airy_asymptotic(s)
    if s >= 0:
        y, dy = _airy_asymptotic(_ASY_START)
        return _march(_ASY_START, y, dy, s)
    return _march(0.0, AI0, AIP0, s)


def airy_ai(s):
    """Ai(s); scalar or array."""
    if np.ndim(s) == 0:
        return _airy_pair(s)[0]
    return np.array([_airy_pair(v)[0] for v in np.ravel(s)]).reshape(np.shape(s))


def airy_ai_prime(s):
    if np.ndim(s) == 0:
        return _airy_pair(s)[1]
    return np.array([_airy_pair(v)[1] for v in np.ravel(s)]).reshape(np.shape(s))


# ---------------------------------------------------------------- Painleve II

@dataclass(frozen=True)
class PainleveSolution:
    rho: float
    s_grid: np.ndarray
    P: np.ndarray
    P_prime: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s_grid, dtype=float)
        P = np.asarray(self.P, dtype=float)
        D = np.asarray(self.P_prime, dtype=float)
        if not (s.ndim == 1 and s.shape == P.shape == D.shape and s.size >= 7):
            raise ValueError("s_grid, P, P_prime must be matching 1-d arrays")
        if np.any(np.diff(s) <= 0):
            raise ValueError("s_grid must be increasing")
        if not abs(self.rho) < 1:
            raise ValueError("|rho| must be < 1")
        for a in (s, P, D):
            a.setflags(write=False)
        object.__setattr__(self, "s_grid", s)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "P_prime", D)
        object.__setattr__(self, "_interp", CubicHermiteSpline(s, P, D))

    @property
    def s_min(self):
        return float(self.s_grid[0])

    @property
    def s_max(self):
        return float(self.s_grid[-1])

    @property
    def ds(self):
        return float(self.s_grid[1] - self.s_grid[0])

    def residual(self) -> np.ndarray:
        """|P'' - sP - 2P^3| at interior nodes, P'' by 6th-order differences of P'."""
        D, P, s = self.P_prime, self.P, self.s_grid
        h = np.diff(s).mean()
        d2 = (-D[:-6] + 9.0 * D[1:-5] - 45.0 * D[2:-4] + 45.0 * D[4:-2] - 9.0 * D[5:-1] + D[6:]) / (60.0 * h)
        rhs = s[3:-3] * P[3:-3] + 2.0 * P[3:-3] ** 3
        return np.abs(d2 - rhs)

    def __call__(self, s):
        return painleve_eval(self, s)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "P", "P_prime"])
        for row in zip(self.s_grid, self.P, self.P_prime):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text, rho: float) -> "PainleveSolution":
        s = str(path_or_text)
        if "\n" not in s:
            with open(s) as fh:
                s = fh.read()
        rows = list(csv.reader(io.StringIO(s)))
        if [c.strip() for c in rows[0]] != ["s", "P", "P_prime"]:
            raise ValueError("Painleve CSV must have header s,P,P_prime")
        arr = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        return cls(rho, arr[:, 0], arr[:, 1], arr[:, 2])


def painleve2_solve(
    rho: float,
    s_min: float = -12.0,
    s_max: float = 8.0,
    ds: float = 1e-3,
    rtol: float = 1e-13,
    atol: float = 1e-16,
    guard: float = 1e3,
    residual_tol: float = 1e-8,
    backend=None,
) -> PainleveSolution:
    """Solve P'' = sP + 2P^3 backward from s_max with P ~ rho Ai(s)."""
    rho = float(rho)
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    if not (ds > 0 and s_max > s_min):
        raise ValueError("need ds > 0 and s_max > s_min")
    nsteps = int(round((s_max - s_min) / ds))
    ds = (s_max - s_min) / nsteps
    p0 = rho * airy_ai(s_max)
    dp0 = rho * airy_ai_prime(s_max)
    P, D, status, k = kernels.painleve_march(p0, dp0, s_max, ds, nsteps, rtol, atol, guard, backend=backend)
    if status == 1:
        raise BlowUp("Painleve solution exceeded the guard", rho=rho, s=s_max - k * ds, guard=guard)
    if status == 2:
        raise ToleranceFailure("step-size control stalled", rho=rho, s=s_max - k * ds)
    s = s_max - ds * np.arange(nsteps + 1)
    sol = PainleveSolution(rho, s[::-1].copy(), np.asarray(P)[::-1].copy(), np.asarray(D)[::-1].copy(),
                           {"rtol": rtol, "atol": atol})
    res = sol.residual()
    worst = float(res.max()) if res.size else 0.0
    object.__setattr__(sol, "meta", {**sol.meta, "max_residual": worst})
    if worst > residual_tol:
        raise ToleranceFailure("Painleve residual above tolerance", rho=rho, max_residual=worst, tol=residual_tol)
    return sol


def painleve_eval(sol: PainleveSolution, s):
    ss = np.asarray(s, dtype=float)
    slack = 1e-12 * (sol.s_max - sol.s_min)
    if np.any(ss < sol.s_min - slack) or np.any(ss > sol.s_max + slack):
        raise OutOfRange("s outside the tabulated window", s_min=sol.s_min, s_max=sol.s_max)
    out = sol._interp(np.clip(ss, sol.s_min, sol.s_max))
    return float(out) if out.ndim == 0 else out
