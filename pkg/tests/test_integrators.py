import numpy as np
import pytest

from symkg.grid import (
    DimensionError,
    Grid,
    SpectralField,
    StateU,
    state_norm,
    to_spectral,
)
from symkg.integrators import (
    FILTERED_SPLITTING,
    LIE_SPLITTING,
    BlowUpError,
    OneStepScheme,
    TwoStepState,
    evolve,
    step_lri1,
    step_lri2,
    step_slri1,
    step_slri2,
    symmetrize,
)
from symkg.nonlinearity import CUBIC, SINE, ZERO, eval_F
from symkg.propagators import build_table

from oracles import random_real_state, rk4_reference


@pytest.fixture
def grid():
    return Grid(16)


def single_mode_state(grid, amp=0.5):
    u = to_spectral(amp * np.sin(grid.points), grid)
    v = to_spectral(0.2 * np.cos(grid.points), grid)
    return StateU(u, v)


def rel_err(a: StateU, b: StateU) -> float:
    return state_norm(a - b, 1.0) / max(state_norm(b, 1.0), 1e-300)


# ---------------------------------------------------------------------------
# one-step schemes


def test_lri1_linear_case_is_exact_propagator(grid):
    rng = np.random.default_rng(0)
    state = random_real_state(grid, rng)
    table = build_table(grid, 0.3)
    out = step_lri1(state, table, ZERO)
    exact = table.exp_tau(state)
    assert rel_err(out, exact) <= 1e-15


def test_lri1_tau_zero_identity(grid):
    state = single_mode_state(grid)
    table = build_table(grid, 0.0)
    out = step_lri1(state, table, SINE)
    assert rel_err(out, state) <= 1e-15


def test_lri1_one_step_defect(grid8=Grid(8)):
    state = single_mode_state(grid8)
    tau = 1e-3
    out = step_lri1(state, build_table(grid8, tau), SINE)
    ref = rk4_reference(state, tau, 50, SINE)
    assert state_norm(out - ref, 1.0) <= 5e-6


def test_lri2_linear_case(grid):
    rng = np.random.default_rng(1)
    state = random_real_state(grid, rng)
    table = build_table(grid, 0.25)
    out = step_lri2(state, table, ZERO)
    assert rel_err(out, table.exp_tau(state)) <= 1e-15


def test_lri2_tau_zero_identity(grid):
    state = single_mode_state(grid)
    out = step_lri2(state, build_table(grid, 0.0), SINE)
    assert rel_err(out, state) <= 1e-15


@pytest.mark.parametrize(
    "stepper,factor,tol",
    [(step_lri1, 4.0, 0.15), (step_lri2, 8.0, 0.20)],
    ids=["lri1", "lri2"],
)
def test_one_step_defect_order(stepper, factor, tol):
    grid = Grid(8)
    state = single_mode_state(grid)

    def defect(tau):
        out = stepper(state, build_table(grid, tau), SINE)
        return state_norm(out - rk4_reference(state, tau, 50, SINE), 1.0)

    ratio = defect(1e-3) / defect(5e-4)
    assert abs(ratio - factor) <= tol * factor


# ---------------------------------------------------------------------------
# two-step schemes


def window(state, table, nl, starter):
    first = starter(state, table, nl)
    return TwoStepState(state, first, 1, table.tau)


def test_slri1_linear_case(grid):
    rng = np.random.default_rng(2)
    state = random_real_state(grid, rng)
    table = build_table(grid, 0.2)
    ts = window(state, table, ZERO, step_lri1)
    out = step_slri1(ts, table, ZERO)
    assert rel_err(out.curr, table.exp_2tau(state)) <= 1e-15
    assert out.step_index == 2


def test_slri2_linear_case(grid):
    rng = np.random.default_rng(3)
    state = random_real_state(grid, rng)
    table = build_table(grid, 0.2)
    ts = window(state, table, ZERO, step_lri2)
    out = step_slri2(ts, table, ZERO)
    assert rel_err(out.curr, table.exp_2tau(state)) <= 1e-15


@pytest.mark.parametrize("stepper", [step_slri1, step_slri2], ids=["slri1", "slri2"])
def test_time_reversal_exchange(grid, stepper):
    # advancing with tau then swapping (U^{n+1}, U^{n-1}) and tau -> -tau
    # must return the original state: the reversibility identity
    rng = np.random.default_rng(4)
    for tau in (0.1, -0.1, 0.01, -0.01):
        table = build_table(grid, tau)
        neg_table = build_table(grid, -tau)
        prev = random_real_state(grid, rng)
        curr = random_real_state(grid, rng)
        ts = TwoStepState(prev, curr, 1, tau)
        advanced = stepper(ts, table, SINE)
        swapped = TwoStepState(advanced.curr, curr, 1, -tau)
        recovered = stepper(swapped, neg_table, SINE)
        assert rel_err(recovered.curr, prev) <= 1e-12


def test_slri1_explicit_reversal_identity(grid):
    # U^{n-1} = e^{-2 tau L} U^{n+1} - 2 tau e^{-tau L} F(U^n)
    rng = np.random.default_rng(5)
    tau = 0.07
    table = build_table(grid, tau)
    prev = random_real_state(grid, rng)
    curr = random_real_state(grid, rng)
    advanced = step_slri1(TwoStepState(prev, curr, 1, tau), table, SINE)
    f = eval_F(curr, SINE)
    rebuilt = table.exp_neg_tau(
        table.exp_neg_tau(advanced.curr)
    ) - (2.0 * tau) * table.exp_neg_tau(f)
    assert rel_err(rebuilt, prev) <= 1e-12


@pytest.mark.parametrize(
    "scheme,order", [("slri1", 2.0), ("slri2", 2.0)], ids=["slri1", "slri2"]
)
def test_two_step_global_order_smooth(scheme, order):
    grid = Grid(8)
    state = single_mode_state(grid)
    ref = rk4_reference(state, 1.0, 2000, SINE)

    def err(tau):
        return rel_err(evolve(state, scheme, tau, round(1.0 / tau), SINE), ref)

    ratio = err(2.0**-6) / err(2.0**-7)
    assert abs(np.log2(ratio) - order) <= 0.25


def test_interior_two_step_defect_is_third_order():
    # with exact window data the symmetric quadrature gains one order
    grid = Grid(8)
    state = single_mode_state(grid)

    def defect(tau):
        # window (U(0), U(tau)) advanced once must match U(2 tau)
        mid = rk4_reference(state, tau, 50, SINE)
        end = rk4_reference(state, 2 * tau, 100, SINE)
        ts = TwoStepState(state, mid, 1, tau)
        out = step_slri1(ts, build_table(grid, tau), SINE)
        return state_norm(out.curr - end, 1.0)

    ratio = defect(1e-3) / defect(5e-4)
    assert abs(ratio - 8.0) <= 0.2 * 8.0


# ---------------------------------------------------------------------------
# symmetrization combinator


def test_symmetrize_zero_psi_is_two_step_propagator(grid):
    rng = np.random.default_rng(6)
    null = OneStepScheme("null", lambda state, table, nl: StateU.zeros(state.grid))
    scheme = symmetrize(null)
    tau = 0.15
    table = build_table(grid, tau)
    neg = build_table(grid, -tau)
    prev = random_real_state(grid, rng)
    curr = random_real_state(grid, rng)
    out = scheme.step(TwoStepState(prev, curr, 1, tau), table, neg, SINE)
    assert rel_err(out.curr, table.exp_2tau(prev)) <= 1e-15


@pytest.mark.parametrize(
    "base,direct,starter",
    [
        (LIE_SPLITTING, step_slri1, step_lri1),
        (FILTERED_SPLITTING, step_slri2, step_lri2),
    ],
    ids=["slri1", "slri2"],
)
def test_symmetrize_reproduces_two_step_schemes(grid, base, direct, starter):
    rng = np.random.default_rng(7)
    tau = 0.05
    table = build_table(grid, tau)
    neg = build_table(grid, -tau)
    scheme = symmetrize(base)
    for _ in range(10):
        prev = random_real_state(grid, rng)
        curr = random_real_state(grid, rng)
        ts = TwoStepState(prev, curr, 1, tau)
        combined = scheme.step(ts, table, neg, SINE)
        handwritten = direct(ts, table, SINE)
        assert rel_err(combined.curr, handwritten.curr) <= 1e-12
    # the starting rules coincide as well
    state = random_real_state(grid, rng)
    assert rel_err(scheme.start(state, table, SINE), starter(state, table, SINE)) <= 1e-15


# ---------------------------------------------------------------------------
# evolve


def test_evolve_rejects_bad_input(grid):
    state = single_mode_state(grid)
    with pytest.raises(ValueError):
        evolve(state, "rk4", 0.1, 10, SINE)
    with pytest.raises(ValueError):
        evolve(state, "lri1", 0.1, 0, SINE)


def test_evolve_single_step_is_starting_rule(grid):
    state = single_mode_state(grid)
    tau = 0.02
    table = build_table(grid, tau)
    out = evolve(state, "slri1", tau, 1, SINE)
    start = step_lri1(state, table, SINE)
    np.testing.assert_array_equal(out.u.coeffs, start.u.coeffs)
    np.testing.assert_array_equal(out.v.coeffs, start.v.coeffs)


def test_evolve_matches_manual_stepping(grid):
    state = single_mode_state(grid)
    tau = 0.02
    table = build_table(grid, tau)
    ts = TwoStepState(state, step_lri2(state, table, SINE), 1, tau)
    for _ in range(7):
        ts = step_slri2(ts, table, SINE)
    out = evolve(state, "slri2", tau, 8, SINE)
    np.testing.assert_array_equal(out.u.coeffs, ts.curr.u.coeffs)
    np.testing.assert_array_equal(out.v.coeffs, ts.curr.v.coeffs)


@pytest.mark.parametrize("scheme", ["lri1", "slri1", "lri2", "slri2"])
def test_evolve_linear_composition(grid, scheme):
    rng = np.random.default_rng(8)
    state = random_real_state(grid, rng)
    tau, n = 0.05, 40
    out = evolve(state, scheme, tau, n, ZERO)
    exact = build_table(grid, n * tau).exp_tau(state)
    assert rel_err(out, exact) <= 1e-11


@pytest.mark.parametrize("scheme,starter,stepper", [
    ("slri1", step_lri1, step_slri1),
    ("slri2", step_lri2, step_slri2),
])
def test_forward_backward_recovery(grid, scheme, starter, stepper):
    # run forward, then drive the window backwards with -tau: time
    # reversibility brings the trajectory back to the initial state
    state = single_mode_state(grid)
    tau, n = 0.01, 128
    table = build_table(grid, tau)
    ts = TwoStepState(state, starter(state, table, SINE), 1, tau)
    for _ in range(n - 1):
        ts = stepper(ts, table, SINE)
    neg_table = build_table(grid, -tau)
    back = TwoStepState(ts.curr, ts.prev, 1, -tau)
    for _ in range(n - 1):
        back = stepper(back, neg_table, SINE)
    assert rel_err(back.curr, state) <= 1e-9


@pytest.mark.parametrize("scheme", ["lri1", "slri1", "lri2", "slri2"])
def test_consistency_richardson(grid, scheme):
    # (one step - identity)/tau converges to the vector field L U + F(U)
    rng = np.random.default_rng(9)
    state = random_real_state(grid, rng, amplitude=0.5)
    k2 = grid.modes.astype(float) ** 2
    rhs = StateU(
        state.v,
        SpectralField(-k2 * state.u.coeffs, grid) + eval_F(state, SINE).v * 1.0,
    )

    def quotient(tau):
        if scheme in ("lri1", "lri2"):
            out = evolve(state, scheme, tau, 1, SINE)
            return (1.0 / tau) * (out - state)
        # two-step map applied to the duplicated window (U, U)
        table = build_table(grid, tau)
        stepper = step_slri1 if scheme == "slri1" else step_slri2
        out = stepper(TwoStepState(state, state, 1, tau), table, SINE)
        return (1.0 / (2.0 * tau)) * (out.curr - state)

    d1 = state_norm(quotient(1e-6) - rhs, 1.0)
    d2 = state_norm(quotient(1e-7) - rhs, 1.0)
    assert d2 <= 0.2 * d1
    assert d1 <= 1e-4 * state_norm(rhs, 1.0)


def test_blow_up_detection(grid):
    # cubic runaway: large data and a big step overflow quickly
    big = to_spectral(np.full(grid.num_points, 50.0), grid)
    state = StateU(big, big)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(BlowUpError) as info:
            evolve(state, "lri1", 10.0, 50, CUBIC)
    assert 1 <= info.value.step <= 50


def test_evolve_callback_stride(grid):
    state = single_mode_state(grid)
    seen = []
    evolve(state, "lri1", 0.1, 10, SINE, callback=lambda k, t, s: seen.append((k, t)), stride=4)
    assert [k for k, _ in seen] == [0, 4, 8, 10]
    assert seen[-1][1] == pytest.approx(1.0)


def test_step_grid_mismatch(grid):
    table = build_table(Grid(8), 0.1)
    with pytest.raises(DimensionError):
        step_lri1(single_mode_state(grid), table, SINE)
