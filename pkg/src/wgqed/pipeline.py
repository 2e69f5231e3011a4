"""Glue between fiber, chain, scattering, resonance fit and pulse stages."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .atoms import build_chain
from .green import FiberGreen, GaussianFit, gaussian_fit
from .modes import FiberSpec, GuidedMode, solve_dispersion
from .pulse import PulseResult, propagate_system, shape_input
from .resolvent import ControlField, decay_rates
from .scattering import ScatteringSystem
from .two_channel import TwoChannelParams, fit_pole, fit_resonance


@dataclass(frozen=True)
class FiberModel:
    spec: FiberSpec
    mode: GuidedMode
    fit: GaussianFit
    green: FiberGreen


@lru_cache(maxsize=16)
def fiber_model(spec: FiberSpec = FiberSpec()) -> FiberModel:
    mode = solve_dispersion(spec)
    fit, _ = gaussian_fit(mode)
    return FiberModel(spec, mode, fit, FiberGreen(mode, fit))


def make_chain(model: FiberModel, n_atoms: int, spacing=None, order: str = "ordered", seed: int = 0,
               rho_over_a: float = 1.5, phi0: float = 0.0):
    """Chain on ``model``'s fiber; ``spacing`` in natural units, default lambda_wg / 2."""
    a = model.spec.radius
    if spacing is None:
        spacing = model.mode.wavelength / 2
    return build_chain(n_atoms, spacing, order, seed, rho=rho_over_a * a, phi0=phi0, fiber_radius=a)


def make_system(model: FiberModel, n_atoms: int, rho_over_a: float = 1.5, order: str = "ordered",
                seed: int = 0, spacing=None, control: ControlField = ControlField(),
                include_raman: bool = False, phi0: float = 0.0, ground=None) -> ScatteringSystem:
    chain = make_chain(model, n_atoms, spacing, order, seed, rho_over_a, phi0)
    return ScatteringSystem(chain, model.green, include_raman, control, ground)


def atom_rates(model: FiberModel, rho_over_a: float = 1.5):
    return decay_rates([rho_over_a * model.spec.radius, 0.0, 0.0], model.green)


def dressed_roots(control: ControlField):
    """Bare-atom dressed lines (Delta_c -+ sqrt(Delta_c^2 + Omega^2)) / 2, narrow one first."""
    d, om = control.detuning, control.rabi
    r = np.sqrt(d * d + om * om)
    roots = np.array([(d + r) / 2, (d - r) / 2])
    return roots[np.argsort(np.abs(roots - d))]


def at_window(control: ControlField, span: float = 4.0, guard: float = 0.02):
    """Fit window around the narrow dressed line, stopping short of the transparency point."""
    narrow = dressed_roots(control)[0]
    dist = abs(narrow - control.detuning)
    if narrow < control.detuning:
        return narrow - span * dist, control.detuning - guard
    return control.detuning + guard, narrow + span * dist


def resonance(system: ScatteringSystem, control: ControlField | None = None, points: int = 801,
              window=None, method: str = "pole") -> TwoChannelParams:
    """Fit the reflection line of ``system``: the dressed line with control, the bare line without.

    ``method="pole"`` fits the complex f->b amplitude, ``"lorentzian"`` its modulus squared.
    """
    control = system.ham.control if control is None else control
    if window is None:
        if control.active:
            window = at_window(control)
        else:
            window = (-6.0, 6.0)
    d = np.linspace(window[0], window[1], points)
    s12 = system.single_entry(d).channel(-1, -1)
    if method == "pole":
        return fit_pole(d, s12)
    if method == "lorentzian":
        return fit_resonance(d, np.abs(s12) ** 2)
    raise ValueError(f"method must be 'pole' or 'lorentzian', got {method!r}")


def storage(system: ScatteringSystem, params: TwoChannelParams, geometry: str = "single",
            theta="crest", samples: int = 2**14, truncation: float = 10.0, workers: int = 1) -> PulseResult:
    """Optimally shaped pulse at the fitted line, propagated through the chain."""
    rate = params.width
    pulse = shape_input(rate, carrier=params.omega_star, t_trunc=truncation / rate, n_samples=samples)
    return propagate_system(pulse, system, geometry, theta, workers=workers)


def efficiencies(model: FiberModel, n_atoms, rho_over_a: float, control: ControlField, samples: int = 2**14):
    """(single, symmetric) storage efficiency for each N in ``n_atoms``."""
    out = {}
    for n in n_atoms:
        sys_ = make_system(model, n, rho_over_a, control=control)
        p = resonance(sys_)
        out[n] = (storage(sys_, p, "single", samples=samples).efficiency,
                  storage(sys_, p, "symmetric", samples=samples).efficiency)
    return out


# published storage efficiencies (single, symmetric) used as calibration targets
TARGET_EFFICIENCIES = {10: (0.08, 0.16), 100: (0.38, 0.76)}


def calibrate_rho(model: FiberModel, control: ControlField, grid=None, targets=TARGET_EFFICIENCIES,
                  samples: int = 2**14):
    """Scan rho / a and return the value minimizing the worst miss against ``targets``."""
    grid = np.round(np.linspace(1.2, 2.0, 9), 6) if grid is None else np.asarray(grid, dtype=float)
    rows = []
    for roa in grid:
        eff = efficiencies(model, tuple(targets), float(roa), control, samples)
        miss = max(abs(eff[n][k] - targets[n][k]) for n in targets for k in (0, 1))
        rows.append((float(roa), miss, eff))
    best = min(rows, key=lambda r: r[1])
    return best, rows
