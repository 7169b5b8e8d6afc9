import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symkg.grid import (
    DimensionError,
    Grid,
    SpectralField,
    StateU,
    SymmetryError,
    hermitian_violation,
    sobolev_norm,
    spectral_derivative,
    state_norm,
    to_physical,
    to_spectral,
)

from oracles import direct_summation


@pytest.fixture
def grid():
    return Grid(16)


def random_hermitian_field(grid, rng):
    return to_spectral(rng.standard_normal(grid.num_points), grid)


def test_grid_invariants(grid):
    assert grid.num_points == 32
    assert grid.spacing == np.pi / 16
    assert grid.points[0] == -np.pi
    assert grid.points[-1] == np.pi - grid.spacing
    assert set(grid.modes) == set(range(-16, 16))
    with pytest.raises(ValueError):
        Grid(2)


def test_to_physical_zero_field(grid):
    assert np.all(to_physical(SpectralField.zeros(grid)) == 0.0)


def test_to_physical_dc_mode(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[0] = 1.0
    np.testing.assert_allclose(to_physical(SpectralField(c, grid)), 1.0, rtol=1e-14)


def test_to_physical_cosine_matches_direct_summation(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[1] = 0.5
    c[-1] = 0.5
    f = SpectralField(c, grid)
    vals = to_physical(f)
    np.testing.assert_allclose(vals, np.cos(grid.points), atol=1e-14)
    np.testing.assert_allclose(vals, direct_summation(f).real, atol=1e-13)


def test_to_physical_rejects_asymmetric(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[1] = 1.0  # no conjugate partner
    with pytest.raises(SymmetryError):
        to_physical(SpectralField(c, grid))


def test_to_spectral_zero(grid):
    f = to_spectral(np.zeros(grid.num_points), grid)
    assert np.all(f.coeffs == 0.0)


def test_to_spectral_sine_coefficients(grid):
    f = to_spectral(np.sin(grid.points), grid)
    assert f.coeffs[1] == pytest.approx(-0.5j, abs=1e-15)
    assert f.coeffs[-1] == pytest.approx(+0.5j, abs=1e-15)


def test_to_spectral_wrong_length(grid):
    with pytest.raises(DimensionError):
        to_spectral(np.zeros(7), grid)


def test_round_trip_many_random_fields(grid):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        f = random_hermitian_field(grid, rng)
        back = to_spectral(to_physical(f), grid)
        scale = np.max(np.abs(f.coeffs))
        assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-12 * scale


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_physical_first(seed):
    grid = Grid(8)
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-5, 5, grid.num_points)
    np.testing.assert_allclose(to_physical(to_spectral(vals, grid)), vals, atol=1e-12)


def test_to_spectral_output_hermitian(grid):
    rng = np.random.default_rng(5)
    f = random_hermitian_field(grid, rng)
    assert hermitian_violation(f) <= 1e-15
    assert f.coeffs[0].imag == 0.0
    assert f.coeffs[grid.n].imag == 0.0


def test_sobolev_norm_constant_field(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[0] = 1.0
    f = SpectralField(c, grid)
    for s in (-1.0, 0.0, 0.5, 1.0, 2.0):
        assert sobolev_norm(f, s) == pytest.approx(1.0, rel=1e-14)


def test_sobolev_norm_single_pair(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[3] = 1.0
    c[-3] = 1.0
    assert sobolev_norm(SpectralField(c, grid), 1.0) == pytest.approx(
        np.sqrt(18.0), rel=1e-14
    )


def test_sobolev_norm_s0_is_l2(grid):
    rng = np.random.default_rng(7)
    f = random_hermitian_field(grid, rng)
    assert sobolev_norm(f, 0.0) == pytest.approx(
        np.linalg.norm(f.coeffs), rel=1e-14
    )


def test_parseval(grid):
    rng = np.random.default_rng(11)
    vals = rng.standard_normal(grid.num_points)
    f = to_spectral(vals, grid)
    assert sobolev_norm(f, 0.0) ** 2 == pytest.approx(
        np.mean(vals**2), rel=1e-12
    )


@settings(max_examples=25, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(-1.0, 2.0),
    st.floats(0.0, 1.0),
)
def test_sobolev_norm_monotone_in_s(seed, s1, gap):
    grid = Grid(8)
    rng = np.random.default_rng(seed)
    f = to_spectral(rng.standard_normal(grid.num_points), grid)
    s2 = min(s1 + gap, 2.0)
    assert sobolev_norm(f, s1) <= sobolev_norm(f, s2) * (1 + 1e-12)


def test_state_norm_zero(grid):
    assert state_norm(StateU.zeros(grid), 1.0) == 0.0


def test_state_norm_constant_velocity(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[0] = 1.0
    st_ = StateU(SpectralField.zeros(grid), SpectralField(c, grid))
    assert state_norm(st_, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert state_norm(st_, 1.0, homogeneous=True) == pytest.approx(1.0, rel=1e-14)


def test_state_norm_cosine_homogeneous(grid):
    u = to_spectral(np.cos(grid.points), grid)
    st_ = StateU(u, SpectralField.zeros(grid))
    # mode +-1 at amplitude 1/2 each: sum |l|^2 |c_l|^2 = 1/2
    assert state_norm(st_, 1.0, homogeneous=True) == pytest.approx(
        np.sqrt(0.5), rel=1e-13
    )
    # homogeneous norm ignores the mean, inhomogeneous does not
    dc = np.zeros(grid.num_points, dtype=complex)
    dc[0] = 3.0
    shifted = StateU(u + SpectralField(dc, grid), SpectralField.zeros(grid))
    assert state_norm(shifted, 1.0, homogeneous=True) == pytest.approx(
        np.sqrt(0.5), rel=1e-13
    )
    assert state_norm(shifted, 1.0) > 3.0


def test_state_norm_alpha_range(grid):
    with pytest.raises(ValueError):
        state_norm(StateU.zeros(grid), 2.5)


def test_derivative_constant(grid):
    c = np.zeros(grid.num_points, dtype=complex)
    c[0] = 4.2
    d = spectral_derivative(SpectralField(c, grid))
    assert np.all(d.coeffs == 0.0)


def test_derivative_sine_gives_cosine(grid):
    f = to_spectral(np.sin(grid.points), grid)
    np.testing.assert_allclose(
        to_physical(spectral_derivative(f)), np.cos(grid.points), atol=1e-13
    )


def test_derivative_composition(grid):
    rng = np.random.default_rng(3)
    f = random_hermitian_field(grid, rng)
    second = spectral_derivative(spectral_derivative(f)).coeffs
    expected = -(grid.modes.astype(float) ** 2) * f.coeffs
    expected[grid.n] = 0.0  # unpaired Nyquist mode is dropped by d/dx
    np.testing.assert_allclose(second, expected, atol=1e-12)


def test_derivative_annihilates_only_dc_among_paired_modes(grid):
    c = np.ones(grid.num_points, dtype=complex)
    d = spectral_derivative(SpectralField(c, grid)).coeffs
    assert d[0] == 0.0
    paired = [p for p in range(grid.num_points) if p not in (0, grid.n)]
    assert np.all(np.abs(d[paired]) > 0.0)


def test_derivative_preserves_hermitian(grid):
    rng = np.random.default_rng(9)
    f = random_hermitian_field(grid, rng)
    assert hermitian_violation(spectral_derivative(f)) <= 1e-14


def test_dealias_mask(grid):
    keep = grid.dealias_keep()
    assert keep[0]
    k = np.abs(grid.modes)
    assert np.array_equal(keep, k <= (2 * grid.n) // 3)


def test_field_arithmetic_grid_mismatch(grid):
    other = Grid(8)
    with pytest.raises(DimensionError):
        SpectralField.zeros(grid) + SpectralField.zeros(other)
