"""Reproducible initial data: rough random states and the smooth pulse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, SpectralField, StateU, sobolev_norm, to_spectral


@dataclass(frozen=True)
class RoughDatumSpec:
    """Random datum with Sobolev-type coefficient decay <l>^{-theta-1/2}.

    Coefficients are drawn uniformly on [0, 1] for modes 0..max_frequency-1
    (counter-based generator keyed by ``seed``) and mirrored to negative
    modes, giving a real function whose u component sits in H^theta and
    whose v component sits in H^{theta-1} and no better.
    """

    theta: float
    seed: int
    max_frequency: int
    grid: Grid
    scale: float = 1.0

    def __post_init__(self):
        if self.theta <= 0.5:
            raise ValueError(f"theta must exceed 1/2, got {self.theta}")
        if not 1 <= self.max_frequency <= self.grid.n:
            raise ValueError(
                f"max_frequency must be in [1, {self.grid.n}], got {self.max_frequency}"
            )


@dataclass(frozen=True)
class SolitonDatumSpec:
    """Smooth sech-profile datum with parameters a, b, c (amplitude ~ 1/10)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if self.a**2 <= self.c**2:
            raise ValueError(f"need a^2 > c^2, got a={self.a}, c={self.c}")

    @property
    def width(self) -> float:
        return float(np.sqrt(self.a / (self.a**2 - self.c**2)))


def _profiled_coeffs(weights: np.ndarray, draws: np.ndarray, grid: Grid) -> SpectralField:
    m = len(draws)
    c = np.zeros(grid.num_points, dtype=np.complex128)
    c[:m] = draws * weights
    if m > 1:
        c[grid.num_points - (m - 1) :] = np.conj(c[1:m])[::-1]
    return SpectralField(c, grid)


def rough_profile(spec: RoughDatumSpec) -> tuple[SpectralField, SpectralField]:
    """The unnormalized coefficient profiles (phi1, phi2) of the rough datum."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    ls = np.arange(spec.max_frequency, dtype=np.float64)
    ls[0] = 1.0  # bracket weight <0> = 1
    xi = rng.uniform(size=spec.max_frequency)
    zeta = rng.uniform(size=spec.max_frequency)
    phi1 = _profiled_coeffs(ls ** -(spec.theta + 0.5), xi, spec.grid)
    phi2 = _profiled_coeffs(ls ** -(spec.theta - 0.5), zeta, spec.grid)
    return phi1, phi2


def make_rough(spec: RoughDatumSpec) -> StateU:
    """Normalized rough datum: |u|_{H^1} = |v|_{L^2} = scale."""
    phi1, phi2 = rough_profile(spec)
    u = (spec.scale / sobolev_norm(phi1, 1.0)) * phi1
    v = (spec.scale / sobolev_norm(phi2, 0.0)) * phi2
    return StateU(u, v)


def make_soliton(spec: SolitonDatumSpec, grid: Grid) -> StateU:
    """Pointwise evaluation of the sech/tanh pulse, transformed to spectral form."""
    x = grid.points
    r = spec.width
    amp = 0.1 * np.sqrt(2.0 * spec.a / spec.b)
    u0 = amp / np.cosh(r * x)
    v0 = spec.c * amp * r * np.tanh(r * x) / np.cosh(r * x)
    return StateU(to_spectral(u0, grid), to_spectral(v0, grid))
