"""Torus grid, spectral transforms, and Sobolev-type norms for real periodic fields.

Fields live on the uniform grid x_j = j*pi/N, j = -N..N-1, and are stored as
2N complex Fourier coefficients in FFT order so that u(x) = sum_l c_l e^{ilx}.
All fields in this package represent real functions, hence the coefficients
are Hermitian-symmetric: c_{-l} = conj(c_l).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-12


class SymmetryError(ValueError):
    """Spectral coefficients are not Hermitian-symmetric within tolerance."""


class DimensionError(ValueError):
    """Array length or grid mismatch."""


@dataclass(frozen=True)
class Grid:
    """Uniform 2N-point grid on [-pi, pi) carrying Fourier modes l = -N..N-1.

    ``n`` is half the number of grid points; the spacing is exactly pi/n.
    ``dealias`` enables 2/3-rule truncation of nonlinear products (off by
    default; the pseudospectral evaluation accepts aliasing).
    """

    n: int
    dealias: bool = False

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"grid needs at least 8 points, got 2*{self.n}")

    @property
    def num_points(self) -> int:
        return 2 * self.n

    @property
    def spacing(self) -> float:
        return np.pi / self.n

    @property
    def points(self) -> np.ndarray:
        """Grid points x_j = j*pi/n for j = -n..n-1."""
        return np.arange(-self.n, self.n) * (np.pi / self.n)

    @property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in FFT storage order: 0..n-1, -n..-1."""
        return np.fft.fftfreq(2 * self.n, d=1.0 / (2 * self.n)).astype(np.int64)

    def bracket(self, s: float) -> np.ndarray:
        """Weights <l>^s with <0> = 1 and <l> = |l| otherwise."""
        k = np.abs(self.modes).astype(np.float64)
        k[0] = 1.0
        return k**s

    def dealias_keep(self) -> np.ndarray:
        """Boolean mask of modes kept by the 2/3 rule."""
        return np.abs(self.modes) <= (2 * self.n) // 3


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of one real periodic function (FFT mode order)."""

    coeffs: np.ndarray
    grid: Grid

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.num_points,):
            raise DimensionError(
                f"expected {self.grid.num_points} coefficients, got {c.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(np.zeros(grid.num_points, dtype=np.complex128), grid)

    def _check_same_grid(self, other: "SpectralField") -> None:
        if self.grid != other.grid:
            raise DimensionError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.coeffs + other.coeffs, self.grid)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.coeffs - other.coeffs, self.grid)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.coeffs * scalar, self.grid)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(-self.coeffs, self.grid)


@dataclass(frozen=True)
class StateU:
    """State pair (u, v) with v = du/dt, both in spectral form."""

    u: SpectralField
    v: SpectralField

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise DimensionError("u and v live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "StateU":
        return cls(SpectralField.zeros(grid), SpectralField.zeros(grid))

    def __add__(self, other: "StateU") -> "StateU":
        return StateU(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "StateU") -> "StateU":
        return StateU(self.u - other.u, self.v - other.v)

    def __mul__(self, scalar) -> "StateU":
        return StateU(self.u * scalar, self.v * scalar)

    __rmul__ = __mul__


def hermitian_violation(field: SpectralField) -> float:
    """Max |c_p - conj(c_{-p})| relative to the largest coefficient."""
    c = field.coeffs
    mirrored = np.conj(np.roll(c[::-1], 1))
    scale = max(float(np.max(np.abs(c))), 1e-300)
    return float(np.max(np.abs(c - mirrored))) / scale


def to_physical(field: SpectralField) -> np.ndarray:
    """Point values u(x_j) on [-pi, pi); requires Hermitian coefficients."""
    viol = hermitian_violation(field)
    if viol > HERMITIAN_RTOL:
        raise SymmetryError(
            f"coefficients deviate from Hermitian symmetry by {viol:.3e} (relative)"
        )
    n = field.grid.n
    half = field.coeffs[: n + 1] * field.grid.num_points
    values = np.fft.irfft(half, n=field.grid.num_points)
    # irfft yields samples ordered from x=0; rotate to x in [-pi, pi)
    return np.roll(values, n)


def to_spectral(values: np.ndarray, grid: Grid) -> SpectralField:
    """Forward transform of real point values given in [-pi, pi) order."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.shape != (grid.num_points,):
        raise DimensionError(f"expected {grid.num_points} values, got {vals.shape}")
    half = np.fft.rfft(np.roll(vals, -grid.n)) / grid.num_points
    return SpectralField(mirror_half_spectrum(half, grid.n), grid)


def mirror_half_spectrum(half: np.ndarray, n: int) -> np.ndarray:
    """Full Hermitian spectrum (FFT order) from the modes 0..n half-spectrum."""
    c = np.empty(2 * n, dtype=np.complex128)
    c[: n + 1] = half
    c[n + 1 :] = np.conj(half[1:n][::-1])
    return c


def physical_rows(fields: list[SpectralField]) -> np.ndarray:
    """Batched inverse transform; rows come back in FFT sample order.

    Point ordering differs from :func:`to_physical` by a half-turn of the
    torus, which is irrelevant for pointwise work (nonlinearities, sums).
    """
    grid = fields[0].grid
    half = np.stack([f.coeffs[: grid.n + 1] for f in fields]) * grid.num_points
    return np.fft.irfft(half, n=grid.num_points, axis=-1)


def spectral_rows(rows: np.ndarray, grid: Grid) -> list[SpectralField]:
    """Batched forward transform of real rows in FFT sample order."""
    half = np.fft.rfft(rows, axis=-1) / grid.num_points
    keep = grid.dealias_keep() if grid.dealias else None
    fields = []
    for h in half:
        c = mirror_half_spectrum(h, grid.n)
        if keep is not None:
            c = np.where(keep, c, 0.0)
        fields.append(SpectralField(c, grid))
    return fields


def sobolev_norm(field: SpectralField, s: float) -> float:
    """H^s-type norm (sum of <l>^{2s} |c_l|^2)^(1/2)."""
    w = field.grid.bracket(2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2)))


def state_norm(state: StateU, alpha: float, homogeneous: bool = False) -> float:
    """Energy-type norm of (u, v): u in (homogeneous) H^alpha, v in H^{alpha-1}."""
    if not 0.0 <= alpha <= 2.0:
        raise ValueError(f"alpha must be in [0, 2], got {alpha}")
    v_part = sobolev_norm(state.v, alpha - 1.0) ** 2
    if homogeneous:
        k = np.abs(state.grid.modes).astype(np.float64)
        u_part = float(np.sum(k ** (2.0 * alpha) * np.abs(state.u.coeffs) ** 2))
    else:
        u_part = sobolev_norm(state.u, alpha) ** 2
    return float(np.sqrt(u_part + v_part))


def spectral_derivative(field: SpectralField) -> SpectralField:
    """d/dx as the multiplier i*l; the unpaired Nyquist mode is zeroed.

    The Nyquist basis function cos(Nx) has an all-zero derivative on the
    grid, and keeping i*l there would break realness of the result.
    """
    c = field.coeffs * (1j * field.grid.modes)
    c[field.grid.n] = 0.0
    return SpectralField(c, field.grid)
