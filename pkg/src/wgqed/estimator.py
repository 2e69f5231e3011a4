"""Estimator-style front end: fit on a geometry, predict spectra."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .atoms import ChainConfig
from .modes import FiberSpec
from .pipeline import fiber_model
from .resolvent import ControlField
from .scattering import ScatteringSystem
from .two_channel import TwoChannelParams, fit_pole, fit_resonance, lorentzian, two_channel_s
from .validation import check_complex_1d, check_detunings, check_positions


class WaveguideQEDScatterer(BaseEstimator):
    """Microscopic chain scatterer.

    ``fit`` takes atom positions (z values in units of 1/k0, or full
    cylindrical rows, or a ChainConfig) and builds the effective
    Hamiltonian; ``predict`` returns columns (T, R, L) over detunings.
    """

    def __init__(self, radius_nm=250.0, n_core=1.45, n_clad=1.0, lambda0_nm=780.0, rho_over_a=1.5,
                 phi0=0.0, control_rabi=0.0, control_detuning=0.0, include_raman=False,
                 geometry="single", theta="crest", workers=1):
        self.radius_nm = radius_nm
        self.n_core = n_core
        self.n_clad = n_clad
        self.lambda0_nm = lambda0_nm
        self.rho_over_a = rho_over_a
        self.phi0 = phi0
        self.control_rabi = control_rabi
        self.control_detuning = control_detuning
        self.include_raman = include_raman
        self.geometry = geometry
        self.theta = theta
        self.workers = workers

    def fit(self, X, y=None):
        spec = FiberSpec(self.radius_nm, self.n_core, self.n_clad, self.lambda0_nm)
        model = fiber_model(spec)
        a = spec.radius
        if isinstance(X, ChainConfig):
            chain = X
        else:
            pos = check_positions(X, a, self.rho_over_a * a, self.phi0)
            chain = ChainConfig(pos, spacing=float("nan"), fiber_radius=a)
        control = ControlField(self.control_rabi, self.control_detuning, self.control_rabi != 0)
        self.model_ = model
        self.system_ = ScatteringSystem(chain, model.green, self.include_raman, control)
        self.n_atoms_ = chain.n_atoms
        self.k_wg_ = model.mode.k_wg
        self.v_g_ = model.mode.v_g
        return self

    def s_matrix(self, X):
        check_is_fitted(self, "system_")
        d = check_detunings(X)
        if self.geometry == "single":
            return self.system_.s_matrix(d, 1, workers=self.workers)
        return self.system_.symmetric(d, self.theta, workers=self.workers).s

    def predict(self, X):
        check_is_fitted(self, "system_")
        d = check_detunings(X)
        if self.geometry == "single":
            res = self.system_.single_entry(d, workers=self.workers)
        elif self.geometry == "symmetric":
            res = self.system_.symmetric(d, self.theta, workers=self.workers)
        else:
            raise ValueError(f"geometry must be 'single' or 'symmetric', got {self.geometry!r}")
        return np.column_stack([res.transmission, res.reflection, res.loss])


class TwoChannelResonance(BaseEstimator):
    """Isolated-resonance fit of a reflection line.

    ``fit(deltas, y)`` accepts the complex f->b amplitude (pole fit) or
    its modulus squared (Lorentzian fit); ``predict`` returns the model
    |S12|^2.
    """

    def __init__(self, method="pole", window=None, background=1):
        self.method = method
        self.window = window
        self.background = background

    def fit(self, X, y):
        d = check_detunings(X)
        y = check_complex_1d(y)
        if len(y) != len(d):
            raise ValueError("X and y lengths differ")
        if self.method == "pole":
            p = fit_pole(d, y.astype(complex), self.window, self.background)
        elif self.method == "lorentzian":
            p = fit_resonance(d, np.real(y), self.window)
        else:
            raise ValueError(f"method must be 'pole' or 'lorentzian', got {self.method!r}")
        self.params_ = p
        self.gamma_c_ = p.gamma_c
        self.gamma_total_ = p.width
        self.omega_star_ = p.omega_star
        self.residual_ = p.residual
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        d = check_detunings(X)
        amp = (self.gamma_c_ / self.gamma_total_) ** 2
        return lorentzian(d, amp, self.omega_star_, self.gamma_total_)

    def lossless_s(self, X, sign=1):
        """Two-channel S-matrix with the fitted cooperative width and no losses."""
        check_is_fitted(self, "params_")
        d = check_detunings(X)
        p = TwoChannelParams(omega_star=self.omega_star_, gamma_c=self.gamma_c_, sign=sign)
        return two_channel_s(d - p.omega_star, p)
