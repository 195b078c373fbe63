"""Dirac-Coulomb problem with a singular position-dependent mass."""

from .errors import *  # noqa: F401,F403
from .model import MINUS, PLUS, ChannelSpec, ModelParams, ValidatedChannel, validate
from .rotation import RotationSolution, rotate, solve_rotation, unrotate
from .spectrum import EnergyLevel, effective_ell, energy_level, level_for, limit_suite, nonrel_energy
from .special import integrate_radial, laguerre, laguerre_derivative, log_gamma
from .wavefunction import (
    BoundState,
    compatibility_residual,
    make_bound_state,
    nonrel_radial,
    normalization,
    ode_residual,
    sample_grid,
    spinor_component,
)

__version__ = "0.1.0"
