"""Grids, stationary-phase geometry and region classification.

Everything here is an immutable value object or a pure function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float
    dx: float
    n: int
    periodic: bool = False

    def __post_init__(self):
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.periodic and (self.n & (self.n - 1)):
            raise ValueError("periodic grids need n to be a power of two")

    @classmethod
    def centered(cls, length: float, n: int, periodic: bool = True) -> "SpatialGrid":
        """Grid of n nodes covering [-length/2, length/2)."""
        return cls(-0.5 * length, length / n, n, periodic)

    @classmethod
    def from_interval(cls, x_min: float, x_max: float, dx: float) -> "SpatialGrid":
        """Non-periodic grid with nodes x_min, x_min + dx, ... up to x_max (inclusive)."""
        n = int(round((x_max - x_min) / dx)) + 1
        return cls(x_min, dx, n, False)

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def wavenumbers(self) -> np.ndarray:
        """Non-negative angular wavenumbers matching numpy's rfft layout."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)


@dataclass(frozen=True)
class PhaseGeometry:
    x: float
    t: float
    z0: complex
    tau: float

    @property
    def oscillatory(self) -> bool:
        """True when the stationary points are real (x < 0)."""
        return self.x < 0


class RegionLabel(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegionThresholds:
    M_prime: float = 1.0
    tau_I: float = 10.0
    tau_V: float = 10.0
    growth_exponent: float = 0.4

    def __post_init__(self):
        if self.M_prime <= 0 or self.tau_I <= 0 or self.tau_V <= 0:
            raise ValueError("thresholds must be positive")
        if not 0 < self.growth_exponent <= 0.4:
            raise ValueError("growth_exponent must lie in (0, 2/5]")
        if self.tau_I <= self.M_prime:
            raise ValueError("tau_I must exceed M_prime")
        if self.tau_V <= 1.0 / self.M_prime:
            raise ValueError("tau_V must exceed 1/M_prime")


def make_geometry(x: float, t: float) -> PhaseGeometry:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    x = float(x)
    t = float(t)
    if x < 0:
        z0 = math.sqrt(-x / (12.0 * t))
        return PhaseGeometry(x, t, complex(z0, 0.0), z0 ** 3 * t)
    if x > 0:
        m = math.sqrt(x / (12.0 * t))
        return PhaseGeometry(x, t, complex(0.0, m), m ** 3 * t)
    return PhaseGeometry(x, t, 0j, 0.0)


def phase_theta(g: PhaseGeometry, z):
    """theta(z; x, t) = 4 t z^3 + x z; accepts scalars or arrays."""
    if not g.t > 0:
        raise ValueError("t must be positive")
    return 4.0 * g.t * z ** 3 + g.x * z


def phase_theta_derivative(g: PhaseGeometry, z):
    return 12.0 * g.t * z ** 2 + g.x


def classify_region(g: PhaseGeometry, th: RegionThresholds = RegionThresholds()) -> RegionLabel:
    if not g.t > 0:
        raise ValueError("t must be positive")
    tau = g.tau
    if tau <= th.M_prime:
        return RegionLabel.III
    if g.x < 0:
        if tau >= th.tau_I:
            return RegionLabel.I
        # M' < tau < tau_I: Region II only while tau stays o(t^{2/5})
        if tau <= g.t ** th.growth_exponent:
            return RegionLabel.II
        return RegionLabel.I
    if tau <= th.tau_V:
        return RegionLabel.IV
    return RegionLabel.V


def classify(x: float, t: float, th: RegionThresholds = RegionThresholds()) -> RegionLabel:
    return classify_region(make_geometry(x, t), th)
