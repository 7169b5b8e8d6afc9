"""Pointwise nonlinear terms and their pseudospectral lifting.

A nonlinearity bundles f, its derivative, and the potential V with f = -V';
the wave equation reads u_tt - u_xx = f(u). Nonlinear terms are evaluated
pointwise on the physical grid and transformed back (aliasing accepted
unless the grid's 2/3-rule flag is set).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import SpectralField, StateU, physical_rows, spectral_rows


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], np.ndarray]
    lipschitz_certified: bool


SINE = Nonlinearity("sine", np.sin, np.cos, np.cos, lipschitz_certified=True)
CUBIC = Nonlinearity(
    "cubic",
    lambda u: u**3,
    lambda u: 3.0 * u**2,
    lambda u: -0.25 * u**4,
    lipschitz_certified=False,
)
# f and f' both vanish, so the filtered correction terms drop out exactly
ZERO = Nonlinearity("zero", np.zeros_like, np.zeros_like, np.zeros_like, True)

BUILTIN = {nl.name: nl for nl in (SINE, CUBIC, ZERO)}


def get_nonlinearity(name: str) -> Nonlinearity:
    try:
        return BUILTIN[name]
    except KeyError:
        raise ValueError(
            f"unknown nonlinearity {name!r}; available: {sorted(BUILTIN)}"
        ) from None


def derivative_consistency(nl: Nonlinearity, xs: np.ndarray, h: float = 1e-5):
    """Max deviations of (fprime vs central difference of f, f vs -V')."""
    xs = np.asarray(xs, dtype=np.float64)
    df = (nl.f(xs + h) - nl.f(xs - h)) / (2.0 * h)
    dv = (nl.potential(xs + h) - nl.potential(xs - h)) / (2.0 * h)
    return float(np.max(np.abs(nl.fprime(xs) - df))), float(np.max(np.abs(nl.f(xs) + dv)))


def eval_F(state: StateU, nl: Nonlinearity) -> StateU:
    """F(U) = (0, f(u)) evaluated pseudospectrally; first component exactly zero."""
    (u_phys,) = physical_rows([state.u])
    (fu,) = spectral_rows(nl.f(u_phys)[np.newaxis, :], state.grid)
    return StateU(SpectralField.zeros(state.grid), fu)


def eval_H(state: StateU, nl: Nonlinearity) -> StateU:
    """H(U) = (-f(u), f'(u) v) evaluated pseudospectrally."""
    u_phys, v_phys = physical_rows([state.u, state.v])
    fu, fpv = spectral_rows(
        np.stack([nl.f(u_phys), nl.fprime(u_phys) * v_phys]), state.grid
    )
    return StateU(-fu, fpv)


def eval_F_H(state: StateU, nl: Nonlinearity) -> tuple[StateU, StateU]:
    """Fused evaluation of F(U) and H(U) sharing one transform pair."""
    u_phys, v_phys = physical_rows([state.u, state.v])
    fu, fpv = spectral_rows(
        np.stack([nl.f(u_phys), nl.fprime(u_phys) * v_phys]), state.grid
    )
    return StateU(SpectralField.zeros(state.grid), fu), StateU(-fu, fpv)
