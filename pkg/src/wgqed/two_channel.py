"""Isolated-resonance two-channel S-matrix and Lorentzian fits to microscopic spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal


class FitError(RuntimeError):
    """Raised when a resonance cannot be fitted in the requested window."""


@dataclass(frozen=True)
class TwoChannelParams:
    """Mixing angle, background phase, resonance centre and width.

    ``gamma_c`` is the radiative (cooperative) width; ``gamma_total`` adds
    the incoherent losses and sets the observed line width.
    """

    alpha: float = np.pi / 4
    delta2: float = 0.0
    omega_star: float = 0.0
    gamma_c: float = 1.0
    sign: int = 1
    gamma_total: float | None = None
    residual: float | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"branch sign must be +1 or -1, got {self.sign}")
        if not self.gamma_c > 0:
            raise ValueError(f"gamma_c must be positive, got {self.gamma_c}")

    @property
    def width(self) -> float:
        return self.gamma_total if self.gamma_total is not None else self.gamma_c


def resonant_phase(dw, gamma_c, sign=1):
    """exp(2 i delta_1) = sign * (dw - i G/2) / (dw + i G/2)."""
    dw = np.asarray(dw, dtype=float)
    return sign * (dw - 0.5j * gamma_c) / (dw + 0.5j * gamma_c)


def two_channel_s(dw, params: TwoChannelParams):
    """R(alpha) diag(e^{2i d1}, e^{2i d2}) R(alpha)^T at detuning dw from the resonance.

    Returns shape (..., 2, 2).
    """
    dw = np.asarray(dw, dtype=float)
    c, s = np.cos(params.alpha), np.sin(params.alpha)
    rot = np.array([[c, -s], [s, c]])
    e1 = resonant_phase(dw, params.gamma_c, params.sign)
    e2 = np.exp(2j * params.delta2) * np.ones_like(e1)
    diag = np.zeros(dw.shape + (2, 2), dtype=complex)
    diag[..., 0, 0] = e1
    diag[..., 1, 1] = e2
    return rot @ diag @ rot.T


def lorentzian(delta, amplitude, omega_star, gamma_total):
    return amplitude * (gamma_total**2 / 4) / ((delta - omega_star) ** 2 + gamma_total**2 / 4)


def fit_resonance(deltas, intensity, window=None, prominence=0.1, max_peaks=1) -> TwoChannelParams:
    """Least-squares Lorentzian fit of a reflection-type line |S12|^2.

    ``window`` = (lo, hi) restricts the data.  More than ``max_peaks``
    peaks with relative prominence above ``prominence`` is rejected.
    The radiative width is gamma_c = sqrt(peak) * gamma_total, which is
    exact for a lossy isolated resonance.
    """
    x = np.asarray(deltas, dtype=float)
    y = np.asarray(intensity, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("deltas and intensity must be 1-D arrays of equal length")
    if window is not None:
        sel = (x >= window[0]) & (x <= window[1])
        x, y = x[sel], y[sel]
    if len(x) < 5:
        raise FitError("fewer than five points in the fit window")
    ymax = float(np.max(y))
    if not ymax > 0:
        raise FitError("no resonance signal in the fit window")
    peaks, _ = signal.find_peaks(y, prominence=prominence * ymax)
    if len(peaks) > max_peaks:
        raise FitError(f"{len(peaks)} resolved peaks in the window; expected one")
    i0 = int(peaks[np.argmax(y[peaks])]) if len(peaks) else int(np.argmax(y))
    above = np.nonzero(y >= 0.5 * y[i0])[0]
    width0 = max(float(x[above.max()] - x[above.min()]), 2 * float(np.mean(np.diff(x))))

    def resid(p):
        return (lorentzian(x, *p) - y) / ymax

    sol = optimize.least_squares(resid, [y[i0], x[i0], width0],
                                 bounds=([0, x.min(), 1e-12], [np.inf, x.max(), np.inf]),
                                 x_scale="jac", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not sol.success:
        raise FitError(f"resonance fit did not converge: {sol.message}")
    amp, w0, gtot = sol.x
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return TwoChannelParams(omega_star=float(w0), gamma_c=float(np.sqrt(amp) * gtot),
                            gamma_total=float(gtot), residual=rms)


def fit_pole(deltas, amplitude, window=None, background: int = 1) -> TwoChannelParams:
    """Fit S12(Delta) = poly(Delta) + r / (Delta - omega* + i G/2) to complex data.

    The background polynomial (degree ``background``) absorbs the tails of
    neighbouring lines, so the pole is recovered even when the resonance
    sits on a broad shoulder.  Linear coefficients are eliminated by
    least squares at every trial pole.  gamma_c = 2 |r|.
    """
    x = np.asarray(deltas, dtype=float)
    y = np.asarray(amplitude, dtype=complex)
    if window is not None:
        sel = (x >= window[0]) & (x <= window[1])
        x, y = x[sel], y[sel]
    if len(x) < background + 4:
        raise FitError("too few points in the fit window")
    x0 = 0.5 * (x[0] + x[-1])
    scale = max(np.max(np.abs(y)), 1e-300)

    def design(p):
        cols = [(x - x0) ** k for k in range(background + 1)]
        cols.append(1.0 / (x - p[0] + 0.5j * p[1]))
        return np.column_stack(cols)

    def resid(p):
        a = design(p)
        coef = np.linalg.lstsq(a, y, rcond=None)[0]
        r = (a @ coef - y) / scale
        return np.concatenate([r.real, r.imag])

    i0 = int(np.argmax(np.abs(y - np.median(y))))
    span = float(x[-1] - x[0])
    best = None
    for g0 in (span / 20, span / 5, span):
        sol = optimize.least_squares(resid, [x[i0], g0], bounds=([x[0] - span, 1e-9], [x[-1] + span, 10 * span]),
                                     xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
    w0, gtot = best.x
    coef = np.linalg.lstsq(design(best.x), y, rcond=None)[0]
    rms = float(np.sqrt(np.mean(best.fun**2) * 2))
    return TwoChannelParams(omega_star=float(w0), gamma_c=float(2 * abs(coef[-1])),
                            gamma_total=float(gtot), residual=rms)


def linear_scaling(n_atoms, widths):
    """Least-squares line through (N, Gamma_C); returns slope, intercept, R^2."""
    n = np.asarray(n_atoms, dtype=float)
    w = np.asarray(widths, dtype=float)
    slope, intercept = np.polyfit(n, w, 1)
    pred = slope * n + intercept
    ss_res = np.sum((w - pred) ** 2)
    ss_tot = np.sum((w - w.mean()) ** 2)
    return float(slope), float(intercept), float(1 - ss_res / ss_tot)
