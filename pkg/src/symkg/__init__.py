"""Spectral solver and symmetric exponential integrators for the 1-D
semilinear Klein-Gordon equation on the torus, plus an experiment harness.
"""

__version__ = "0.1.0"

from .grid import (
    Grid,
    SpectralField,
    StateU,
    sobolev_norm,
    spectral_derivative,
    state_norm,
    to_physical,
    to_spectral,
)
from .initial_data import RoughDatumSpec, SolitonDatumSpec, make_rough, make_soliton
from .integrators import (
    SCHEME_IDS,
    BlowUpError,
    TwoStepState,
    evolve,
    step_lri1,
    step_lri2,
    step_slri1,
    step_slri2,
    symmetrize,
)
from .nonlinearity import Nonlinearity, eval_F, eval_H, get_nonlinearity
from .propagators import (
    PropagatorTable,
    build_table,
    exp_mode,
    phi2_filter_mode,
    sym_filter_mode,
)

__all__ = [
    "__version__",
    "Grid",
    "SpectralField",
    "StateU",
    "sobolev_norm",
    "state_norm",
    "spectral_derivative",
    "to_physical",
    "to_spectral",
    "RoughDatumSpec",
    "SolitonDatumSpec",
    "make_rough",
    "make_soliton",
    "SCHEME_IDS",
    "BlowUpError",
    "TwoStepState",
    "evolve",
    "step_lri1",
    "step_lri2",
    "step_slri1",
    "step_slri2",
    "symmetrize",
    "Nonlinearity",
    "eval_F",
    "eval_H",
    "get_nonlinearity",
    "PropagatorTable",
    "build_table",
    "exp_mode",
    "phi2_filter_mode",
    "sym_filter_mode",
]
