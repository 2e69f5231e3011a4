"""Optimally shaped input pulses and their delayed re-emission.

Envelopes are baseband amplitudes around the carrier detuning Delta*:
the physical field is f(t) exp(-i Delta* t) and the transfer function is
S evaluated at Delta* + delta.  Outputs are summed over orthogonal guided
channels grouped by propagation direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import interpolate


class BandwidthError(ValueError):
    """Raised when the pulse spectrum reaches past a tabulated S grid."""


@dataclass(frozen=True)
class PulseSpec:
    carrier: float
    rate: float
    t_off: float
    t_trunc: float
    times: np.ndarray
    envelope: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.envelope) ** 2) * self.dt)

    def detunings(self):
        """Baseband offsets delta_k on the FFT grid of ``times``."""
        return 2 * np.pi * np.fft.fftfreq(len(self.times), self.dt)


@dataclass
class PulseResult:
    pulse: PulseSpec
    forward: np.ndarray
    backward: np.ndarray
    t_gate: float

    @property
    def times(self):
        return self.pulse.times

    def power(self, direction: int):
        out = self.forward if direction == 1 else self.backward
        return np.sum(np.abs(out) ** 2, axis=1)

    def _energy(self, direction, after=None):
        p = self.power(direction)
        if after is not None:
            p = np.where(self.times > after, p, 0.0)
        return float(np.sum(p) * self.pulse.dt)

    @property
    def output_energy(self) -> float:
        return self._energy(1) + self._energy(-1)

    @property
    def delayed_forward(self) -> float:
        return self._energy(1, self.t_gate) / self.pulse.energy

    @property
    def delayed_backward(self) -> float:
        return self._energy(-1, self.t_gate) / self.pulse.energy

    @property
    def efficiency(self) -> float:
        return self.delayed_forward + self.delayed_backward

    @property
    def leaked(self) -> float:
        """Output energy that leaves with the input, before the gate."""
        return self.output_energy / self.pulse.energy - self.efficiency


def shape_input(rate: float, carrier: float = 0.0, t_off: float = 0.0, t_trunc: float | None = None,
                n_samples: int = 2**14, span=(-20.0, 40.0)) -> PulseSpec:
    """Time-reversed decay: f(t) = exp(rate (t - t_off) / 2) on [t_off - T, t_off].

    ``rate`` is the full width of the target resonance; the grid covers
    t_off + span / rate.  Energy is normalized to one.
    """
    if not rate > 0:
        raise ValueError(f"rise rate must be positive, got {rate}")
    if t_trunc is None:
        t_trunc = 10.0 / rate
    t = t_off + np.linspace(span[0], span[1], n_samples, endpoint=False) / rate
    if t_off - t_trunc < t[0]:
        raise ValueError("truncation length exceeds the time window")
    on = (t >= t_off - t_trunc) & (t <= t_off)
    f = np.where(on, np.exp(0.5 * rate * (t - t_off)), 0.0).astype(complex)
    dt = t[1] - t[0]
    f /= np.sqrt(np.sum(np.abs(f) ** 2) * dt)
    return PulseSpec(float(carrier), float(rate), float(t_off), float(t_trunc), t, f)


def tabulated_transfer(deltas, s_table, coverage: float = 10.0, rate: float | None = None):
    """Cubic interpolant of a tabulated S(Delta), shape (n_freq, n_channels).

    Values outside the table are held at the edge.  When ``rate`` is
    given the table must span ``coverage * rate`` on both sides of the
    carrier; this is checked when the transfer is applied.
    """
    deltas = np.asarray(deltas, dtype=float)
    s_table = np.asarray(s_table, dtype=complex)
    spline = interpolate.CubicSpline(deltas, s_table, axis=0)

    def transfer(d, carrier):
        if rate is not None:
            lo, hi = carrier - coverage * rate, carrier + coverage * rate
            if lo < deltas[0] or hi > deltas[-1]:
                raise BandwidthError(f"S table [{deltas[0]:g}, {deltas[-1]:g}] does not cover "
                                     f"[{lo:g}, {hi:g}]")
        return spline(np.clip(d, deltas[0], deltas[-1]))

    return transfer


def propagate(pulse: PulseSpec, transfer, directions, t_gate: float | None = None) -> PulseResult:
    """Filter the pulse through S channel by channel.

    ``transfer(delta_abs)`` returns S at absolute detunings, shape
    (n_freq, n_channels); ``directions`` lists +1 / -1 per channel.
    """
    dk = pulse.detunings()
    s = np.asarray(transfer(pulse.carrier + dk))
    spec = np.fft.ifft(pulse.envelope)
    out = np.fft.fft(s * spec[:, None], axis=0)
    directions = np.asarray(directions)
    return PulseResult(pulse, out[:, directions == 1], out[:, directions == -1],
                       pulse.t_off if t_gate is None else float(t_gate))


def propagate_system(pulse: PulseSpec, system, geometry: str = "single", theta="crest",
                     t_gate: float | None = None, workers: int = 1) -> PulseResult:
    """Evaluate S of a ScatteringSystem directly on the FFT grid and propagate."""
    if geometry not in ("single", "symmetric"):
        raise ValueError(f"geometry must be 'single' or 'symmetric', got {geometry!r}")
    directions = [c.direction for c in system.channels]

    def transfer(d):
        if geometry == "single":
            return system.s_matrix(d, 1, workers=workers, method="schur")
        return system.symmetric(d, theta, workers=workers, method="schur").s

    return propagate(pulse, transfer, directions, t_gate)


def storage_efficiency(result: PulseResult, t_gate: float | None = None) -> float:
    if t_gate is None:
        return result.efficiency
    return (result._energy(1, t_gate) + result._energy(-1, t_gate)) / result.pulse.energy


def time_symmetry(result: PulseResult) -> float:
    """Correlation between input+delayed power and its mirror image about t_off."""
    t = result.times
    delayed = np.where(t > result.t_gate, result.power(1) + result.power(-1), 0.0)
    trace = np.abs(result.pulse.envelope) ** 2 + delayed
    mirror = np.interp(2 * result.pulse.t_off - t, t, trace, left=0.0, right=0.0)
    return float(np.dot(trace, mirror) / np.sqrt(np.dot(trace, trace) * np.dot(mirror, mirror)))
