"""Exponential time steppers and the generic two-step symmetrization.

Four schemes are provided, selected by identifier:

  lri1   one-step:  U -> e^{tau L} (U + tau F(U))
  lri2   one-step:  lri1 plus the filtered correction S2(tau) H(U)
  slri1  two-step:  U^{n+1} = e^{2 tau L} U^{n-1} + 2 tau e^{tau L} F(U^n)
  slri2  two-step:  slri1 plus the odd-filtered correction S(tau) H(U^n)

The two-step schemes are time-reversible: exchanging U^{n+1} <-> U^{n-1}
together with tau <-> -tau leaves the update rule unchanged. Both arise
from the one-step schemes through `symmetrize`, which turns a correction
map Psi_tau into U^{n+1} = e^{2 tau L} U^{n-1} + Psi_tau(U^n)
- e^{2 tau L} Psi_{-tau}(U^n). Each symmetric scheme starts with one step
of its parent one-step scheme.

All mode matrices are real and the states Hermitian, so the steppers do
their arithmetic on the rfft half-spectrum (modes 0..N) and mirror the
result; this is exactly equivalent to full-spectrum arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import (
    DimensionError,
    Grid,
    SpectralField,
    StateU,
    mirror_half_spectrum,
)
from .nonlinearity import Nonlinearity, eval_F, eval_F_H
from .propagators import ModeOperator, PropagatorTable, build_table

SCHEME_IDS = ("lri1", "slri1", "lri2", "slri2")
TWO_STEP_IDS = ("slri1", "slri2")


class BlowUpError(RuntimeError):
    """A time step produced non-finite coefficients."""

    def __init__(self, step: int):
        super().__init__(f"non-finite coefficients detected at step {step}")
        self.step = step


@dataclass(frozen=True)
class TwoStepState:
    """Rolling window (U^{n-1}, U^n) of a two-step scheme."""

    prev: StateU
    curr: StateU
    step_index: int
    tau: float

    def __post_init__(self):
        if self.prev.grid != self.curr.grid:
            raise DimensionError("window states live on different grids")


def _check(state: StateU, table: PropagatorTable) -> None:
    if state.grid != table.grid:
        raise DimensionError("state grid does not match table grid")


# ---------------------------------------------------------------------------
# half-spectrum kernels


def _halves(state: StateU):
    n = state.grid.n
    return state.u.coeffs[: n + 1], state.v.coeffs[: n + 1]


def _lift(grid: Grid, u_half: np.ndarray, v_half: np.ndarray) -> StateU:
    return StateU(
        SpectralField(mirror_half_spectrum(u_half, grid.n), grid),
        SpectralField(mirror_half_spectrum(v_half, grid.n), grid),
    )


def _op(operator: ModeOperator, n: int):
    return (
        operator.a11[: n + 1],
        operator.a12[: n + 1],
        operator.a21[: n + 1],
        operator.a22[: n + 1],
    )


def _nl_terms(u_half, v_half, grid: Grid, nl: Nonlinearity, with_h: bool):
    """Half-spectra of f(u) and (when requested) f'(u) v."""
    scale = grid.num_points
    if with_h:
        phys = np.fft.irfft(
            np.stack([u_half, v_half]) * scale, n=scale, axis=-1
        )
        rows = np.stack([nl.f(phys[0]), nl.fprime(phys[0]) * phys[1]])
        out = np.fft.rfft(rows, axis=-1) / scale
        fu, fpv = out[0], out[1]
    else:
        u_phys = np.fft.irfft(u_half * scale, n=scale)
        fu = np.fft.rfft(nl.f(u_phys)) / scale
        fpv = None
    if grid.dealias:
        keep = grid.dealias_keep()[: grid.n + 1]
        fu = np.where(keep, fu, 0.0)
        if fpv is not None:
            fpv = np.where(keep, fpv, 0.0)
    return fu, fpv


def _kernel_lri1(u, v, table, nl, n):
    fu, _ = _nl_terms(u, v, table.grid, nl, with_h=False)
    e11, e12, e21, e22 = _op(table.exp_tau, n)
    t = v + table.tau * fu
    return e11 * u + e12 * t, e21 * u + e22 * t


def _kernel_lri2(u, v, table, nl, n):
    fu, fpv = _nl_terms(u, v, table.grid, nl, with_h=True)
    e11, e12, e21, e22 = _op(table.exp_tau, n)
    s11, s12, s21, s22 = _op(table.filter2, n)
    t = v + table.tau * fu
    # H(U) = (-f(u), f'(u) v)
    return (
        e11 * u + e12 * t + (s12 * fpv - s11 * fu),
        e21 * u + e22 * t + (s22 * fpv - s21 * fu),
    )


def _kernel_slri1(pu, pv, cu, cv, table, nl, n):
    fu, _ = _nl_terms(cu, cv, table.grid, nl, with_h=False)
    g11, g12, g21, g22 = _op(table.exp_2tau, n)
    e11, e12, e21, e22 = _op(table.exp_tau, n)
    two_tau = 2.0 * table.tau
    return (
        g11 * pu + g12 * pv + two_tau * (e12 * fu),
        g21 * pu + g22 * pv + two_tau * (e22 * fu),
    )


def _kernel_slri2(pu, pv, cu, cv, table, nl, n):
    fu, fpv = _nl_terms(cu, cv, table.grid, nl, with_h=True)
    g11, g12, g21, g22 = _op(table.exp_2tau, n)
    e11, e12, e21, e22 = _op(table.exp_tau, n)
    s11, s12, s21, s22 = _op(table.sym_filter, n)
    two_tau = 2.0 * table.tau
    return (
        g11 * pu + g12 * pv + two_tau * (e12 * fu) + (s12 * fpv - s11 * fu),
        g21 * pu + g22 * pv + two_tau * (e22 * fu) + (s22 * fpv - s21 * fu),
    )


# ---------------------------------------------------------------------------
# public steppers


def step_lri1(state: StateU, table: PropagatorTable, nl: Nonlinearity) -> StateU:
    _check(state, table)
    u, v = _halves(state)
    return _lift(state.grid, *_kernel_lri1(u, v, table, nl, state.grid.n))


def step_lri2(state: StateU, table: PropagatorTable, nl: Nonlinearity) -> StateU:
    _check(state, table)
    u, v = _halves(state)
    return _lift(state.grid, *_kernel_lri2(u, v, table, nl, state.grid.n))


def step_slri1(ts: TwoStepState, table: PropagatorTable, nl: Nonlinearity) -> TwoStepState:
    _check(ts.curr, table)
    pu, pv = _halves(ts.prev)
    cu, cv = _halves(ts.curr)
    new = _lift(ts.curr.grid, *_kernel_slri1(pu, pv, cu, cv, table, nl, ts.curr.grid.n))
    return TwoStepState(ts.curr, new, ts.step_index + 1, ts.tau)


def step_slri2(ts: TwoStepState, table: PropagatorTable, nl: Nonlinearity) -> TwoStepState:
    _check(ts.curr, table)
    pu, pv = _halves(ts.prev)
    cu, cv = _halves(ts.curr)
    new = _lift(ts.curr.grid, *_kernel_slri2(pu, pv, cu, cv, table, nl, ts.curr.grid.n))
    return TwoStepState(ts.curr, new, ts.step_index + 1, ts.tau)


# ---------------------------------------------------------------------------
# symmetrization combinator


@dataclass(frozen=True)
class OneStepScheme:
    """One step U -> e^{tau L} U + Psi_tau(U); psi must accept negative tau."""

    name: str
    psi: Callable[[StateU, PropagatorTable, Nonlinearity], StateU]


def _psi_lie(state: StateU, table: PropagatorTable, nl: Nonlinearity) -> StateU:
    return table.tau * table.exp_tau(eval_F(state, nl))


def _psi_filtered(state: StateU, table: PropagatorTable, nl: Nonlinearity) -> StateU:
    f, h = eval_F_H(state, nl)
    return table.tau * table.exp_tau(f) + table.filter2(h)


LIE_SPLITTING = OneStepScheme("lri1", _psi_lie)
FILTERED_SPLITTING = OneStepScheme("lri2", _psi_filtered)
ONE_STEP_SCHEMES = {"lri1": LIE_SPLITTING, "lri2": FILTERED_SPLITTING}


class SymmetrizedScheme:
    """Two-step symmetrization of a one-step exponential integrator."""

    def __init__(self, base: OneStepScheme):
        self.base = base
        self.name = "s" + base.name

    def start(self, state: StateU, table: PropagatorTable, nl: Nonlinearity) -> StateU:
        """Starting rule U^1 = e^{tau L} U^0 + Psi_tau(U^0)."""
        return table.exp_tau(state) + self.base.psi(state, table, nl)

    def step(
        self,
        ts: TwoStepState,
        table: PropagatorTable,
        neg_table: PropagatorTable,
        nl: Nonlinearity,
    ) -> TwoStepState:
        new = (
            table.exp_2tau(ts.prev)
            + self.base.psi(ts.curr, table, nl)
            - table.exp_2tau(self.base.psi(ts.curr, neg_table, nl))
        )
        return TwoStepState(ts.curr, new, ts.step_index + 1, ts.tau)


def symmetrize(scheme: OneStepScheme) -> SymmetrizedScheme:
    return SymmetrizedScheme(scheme)


# ---------------------------------------------------------------------------
# time loop


def _require_finite(step: int, *arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError(step)


def evolve(
    initial: StateU,
    scheme: str,
    tau: float,
    n_steps: int,
    nl: Nonlinearity,
    callback: Optional[Callable[[int, float, StateU], None]] = None,
    stride: int = 1,
) -> StateU:
    """Advance n_steps of the chosen scheme; returns the final state.

    The two-step schemes take their first step with the parent one-step
    rule. ``callback(step, time, state)`` fires at step 0, every ``stride``
    steps, and at the final step. Non-finite coefficients raise
    :class:`BlowUpError` with the offending step index.
    """
    if scheme not in SCHEME_IDS:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEME_IDS}")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    grid = initial.grid
    n = grid.n
    table = build_table(grid, tau)

    def emit(step: int, u_half, v_half) -> None:
        if callback is not None and (step % stride == 0 or step == n_steps):
            callback(step, step * tau, _lift(grid, u_half, v_half))

    u, v = _halves(initial)
    emit(0, u, v)
    if scheme in ("lri1", "lri2"):
        kernel = _kernel_lri1 if scheme == "lri1" else _kernel_lri2
        for k in range(1, n_steps + 1):
            u, v = kernel(u, v, table, nl, n)
            _require_finite(k, u, v)
            emit(k, u, v)
        return _lift(grid, u, v)

    start_kernel = _kernel_lri1 if scheme == "slri1" else _kernel_lri2
    kernel = _kernel_slri1 if scheme == "slri1" else _kernel_slri2
    cu, cv = start_kernel(u, v, table, nl, n)
    _require_finite(1, cu, cv)
    emit(1, cu, cv)
    pu, pv = u, v
    for k in range(2, n_steps + 1):
        pu, pv, cu, cv = cu, cv, *kernel(pu, pv, cu, cv, table, nl, n)
        _require_finite(k, cu, cv)
        emit(k, cu, cv)
    return _lift(grid, cu, cv)
