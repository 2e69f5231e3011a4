"""Single-photon transport through tripod-atom chains on an optical nanofiber.

Natural units throughout: c = 1, k0 = omega0 = 1 (lengths in lambda0 / 2 pi)
and rates or detunings in units of the free-space decay rate gamma.
"""

__version__ = "0.1.0"

from .atoms import ChainConfig, build_chain, dipole_component, enumerate_basis
from .estimator import TwoChannelResonance, WaveguideQEDScatterer
from .green import FiberGreen, GaussianFit, gaussian_fit, vacuum_green
from .modes import FiberSpec, GuidedMode, mode_field, mode_overlap, solve_dispersion
from .pulse import propagate, shape_input, storage_efficiency
from .resolvent import ControlField, DecayRates, control_dressing, decay_rates, resolvent_columns
from .scattering import Channel, ScatteringResult, ScatteringSystem
from .two_channel import TwoChannelParams, fit_pole, fit_resonance, two_channel_s

__all__ = [
    "ChainConfig", "Channel", "ControlField", "DecayRates", "FiberGreen", "FiberSpec", "GaussianFit",
    "GuidedMode", "ScatteringResult", "ScatteringSystem", "TwoChannelParams", "TwoChannelResonance",
    "WaveguideQEDScatterer", "build_chain", "control_dressing", "decay_rates", "dipole_component",
    "enumerate_basis", "fit_pole", "fit_resonance", "gaussian_fit", "mode_field", "mode_overlap",
    "propagate", "resolvent_columns", "shape_input", "solve_dispersion", "storage_efficiency",
    "two_channel_s", "vacuum_green",
]
