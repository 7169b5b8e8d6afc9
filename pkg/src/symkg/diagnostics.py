"""Energy functional, relative-error metric, order fitting, drift summaries."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import StateU, physical_rows, sobolev_norm, spectral_derivative
from .nonlinearity import Nonlinearity


class DegenerateReferenceError(ValueError):
    """Reference state has a zero norm; relative errors are undefined."""


@dataclass(frozen=True)
class EnergySample:
    time: float
    energy: float
    relative_error: float


@dataclass(frozen=True)
class ConvergenceRow:
    tau: float
    err: float
    wall_clock_seconds: float


@dataclass(frozen=True)
class OrderFit:
    slope: float
    pairwise: tuple[float, ...]


@dataclass(frozen=True)
class DriftSummary:
    max_abs: float
    trend: float


def energy(state: StateU, nl: Nonlinearity) -> float:
    """Total energy: integral of v^2/2 + (u_x)^2/2 + V(u) over the torus.

    The rectangle rule on the 2N-point grid is spectrally exact here.
    """
    du = spectral_derivative(state.u)
    u_phys, v_phys, du_phys = physical_rows([state.u, state.v, du])
    density = 0.5 * v_phys**2 + 0.5 * du_phys**2 + nl.potential(u_phys)
    return float(state.grid.spacing * np.sum(density))


def err_metric(numerical: StateU, reference: StateU) -> float:
    """Relative H^1 error of u plus relative L^2 error of v."""
    nu = sobolev_norm(reference.u, 1.0)
    nv = sobolev_norm(reference.v, 0.0)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateReferenceError("reference norms must be nonzero")
    return (
        sobolev_norm(numerical.u - reference.u, 1.0) / nu
        + sobolev_norm(numerical.v - reference.v, 0.0) / nv
    )


def fit_order(rows, zero_floor: float = 0.0) -> OrderFit:
    """Least-squares slope of log(err) vs log(tau), plus pairwise slopes.

    Rows whose error is non-finite or <= zero_floor are excluded with an
    exact-solution warning; at least two distinct taus must survive.
    """
    kept = []
    for row in rows:
        if not np.isfinite(row.err) or row.err <= zero_floor:
            warnings.warn(
                f"excluding tau={row.tau}: error {row.err} is at the exact-solution floor",
                stacklevel=2,
            )
            continue
        kept.append(row)
    if len(kept) < 2 or len({row.tau for row in kept}) < 2:
        raise ValueError("need at least two rows with distinct tau and positive err")
    kept.sort(key=lambda row: -row.tau)
    lt = np.log([row.tau for row in kept])
    le = np.log([row.err for row in kept])
    slope = float(np.polyfit(lt, le, 1)[0])
    pairwise = tuple(
        float((le[i] - le[i + 1]) / (lt[i] - lt[i + 1])) for i in range(len(kept) - 1)
    )
    return OrderFit(slope, pairwise)


def drift_series(samples, window: tuple[float, float]) -> DriftSummary:
    """Max |relative energy error| and its least-squares trend over a window."""
    if not samples:
        raise ValueError("empty sample series")
    times = np.array([s.time for s in samples])
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    lo, hi = window
    sel = (times >= lo) & (times <= hi)
    if not np.any(sel):
        raise ValueError(f"no samples in window [{lo}, {hi}]")
    rel = np.abs(np.array([s.relative_error for s in samples]))[sel]
    t = times[sel]
    if len(t) < 2:
        trend = 0.0
    else:
        trend = float(np.polyfit(t, rel, 1)[0])
    return DriftSummary(float(np.max(rel)), trend)
