"""S-matrix elements, single-entry spectra and the symmetric geometry."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .atoms import RAMAN_LEVELS, ChainConfig, enumerate_basis
from .green import FiberGreen
from .resolvent import (LEVEL_SLOT, ControlField, control_dressing, coupling_amplitudes,
                        resolvent_columns, self_energy)

SIGMA_SLOT = {1: 0, -1: 1}
DIR_SLOT = {1: 0, -1: 1}
PROBE_SIGMA = -1


@dataclass(frozen=True)
class Channel:
    """Outgoing guided mode plus the final spin record."""

    sigma: int
    direction: int
    flip_atom: int | None = None
    flip_level: int | None = None

    @property
    def elastic(self) -> bool:
        return self.flip_atom is None


@dataclass
class ScatteringResult:
    """S-matrix rows over a detuning grid.

    ``s`` has shape (n_freq, n_channels).  For the symmetric geometry the
    rows are already the superposed amplitudes and ``theta`` is set.
    """

    deltas: np.ndarray
    channels: list
    s: np.ndarray
    theta: float | None = None
    meta: dict = field(default_factory=dict)

    def _mask(self, direction):
        return np.array([c.direction == direction for c in self.channels])

    @property
    def transmission(self):
        return np.sum(np.abs(self.s[:, self._mask(1)]) ** 2, axis=1)

    @property
    def reflection(self):
        return np.sum(np.abs(self.s[:, self._mask(-1)]) ** 2, axis=1)

    @property
    def loss(self):
        return 1.0 - self.transmission - self.reflection

    def channel(self, sigma, direction, flip_atom=None, flip_level=None):
        return self.s[:, self.channels.index(Channel(sigma, direction, flip_atom, flip_level))]

    def table(self):
        """Columns (delta, T, R, L); for symmetric runs T and R read T_fwd, T_bwd."""
        return np.column_stack([self.deltas, self.transmission, self.reflection, self.loss])


class ScatteringSystem:
    """Chain, fiber Green's tensor and effective Hamiltonian bundled for solves."""

    def __init__(self, chain: ChainConfig, green: FiberGreen, include_raman: bool = False,
                 control: ControlField = ControlField(), ground=None, table=None):
        self.chain = chain
        self.green = green
        self.mode = green.mode
        self.include_raman = include_raman
        n = chain.n_atoms
        self.g = coupling_amplitudes(chain, self.mode) if n else np.zeros((2, 2, 0, 3), complex)
        if n:
            basis = enumerate_basis(n, include_raman)
            self.ham = self_energy(basis, chain, green, ground=ground, control=control, table=table)
            self.ground = self.ham.ground
        else:
            self.ham = None
            self.ground = np.ones(0, dtype=int)
        self.channels = self._channels()
        self._weights = self._output_weights()

    @property
    def n_atoms(self):
        return self.chain.n_atoms

    @property
    def v_g(self):
        return self.mode.v_g

    def _channels(self):
        out = [Channel(s, d) for d in (1, -1) for s in (1, -1)]
        if self.include_raman:
            out += [Channel(s, d, j, m) for j in range(self.n_atoms) for m in RAMAN_LEVELS
                    for d in (1, -1) for s in (1, -1)]
        return out

    def _amp(self, sigma, direction, atoms, level):
        level = np.broadcast_to(np.asarray(level), np.shape(atoms))
        slots = np.array([LEVEL_SLOT[int(x)] for x in level.ravel()], dtype=int).reshape(level.shape)
        return self.g[SIGMA_SLOT[sigma], DIR_SLOT[direction], atoms, slots]

    def _output_weights(self):
        n = self.n_atoms
        if n == 0:
            return np.zeros((0, len(self.channels)), complex)
        basis = self.ham.basis
        w = np.zeros((len(basis), len(self.channels)), dtype=complex)
        idx = np.arange(n)
        for k, c in enumerate(self.channels):
            if c.elastic:
                w[:n, k] = self._amp(c.sigma, c.direction, idx, self.ground)
            else:
                j, m = c.flip_atom, c.flip_level
                w[j, k] = self._amp(c.sigma, c.direction, j, m)
                others = idx[idx != j]
                w[basis.raman_index(others, j, m), k] = self._amp(c.sigma, c.direction, others, 1)
        return w

    def source_vector(self, direction: int = 1, sigma: int = PROBE_SIGMA):
        """Absorption amplitudes of the incoming guided photon on every basis state."""
        if self.n_atoms == 0:
            return np.zeros(0, complex)
        b = np.zeros(self.ham.dim, dtype=complex)
        b[: self.n_atoms] = self._amp(sigma, direction, np.arange(self.n_atoms), self.ground)
        return b

    def incident_index(self, direction: int, sigma: int = PROBE_SIGMA):
        return self.channels.index(Channel(sigma, direction))

    def amplitudes(self, deltas, directions=(1,), sigma: int = PROBE_SIGMA, workers: int = 1,
                   method: str = "lu"):
        """Resolvent columns X for each requested incoming direction, (n_freq, dim, k)."""
        src = np.column_stack([self.source_vector(d, sigma) for d in directions])
        return resolvent_columns(self.ham, deltas, src, workers=workers, method=method)

    def t_matrix(self, deltas, direction: int = 1, sigma: int = PROBE_SIGMA, workers: int = 1,
                 method: str = "lu"):
        """T-matrix rows <w_c | X>, (n_freq, n_channels)."""
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        if self.n_atoms == 0:
            return np.zeros((len(deltas), len(self.channels)), complex)
        x = self.amplitudes(deltas, (direction,), sigma, workers, method)[..., 0]
        return x @ self._weights.conj()

    def s_matrix(self, deltas, direction: int = 1, sigma: int = PROBE_SIGMA, workers: int = 1,
                 method: str = "lu"):
        """S = delta - (i / v_g) T for one incoming guided mode."""
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        s = -1j / self.v_g * self.t_matrix(deltas, direction, sigma, workers, method)
        s[:, self.incident_index(direction, sigma)] += 1.0
        return s

    def node_phase(self, site: int = 0, sigma: int = PROBE_SIGMA):
        """Relative input phase that puts ``site`` on a node of the standing wave."""
        if self.n_atoms == 0:
            return np.pi
        gf = self._amp(sigma, 1, site, self.ground[site])
        gb = self._amp(sigma, -1, site, self.ground[site])
        return float(np.mod(np.pi + np.angle(gf) - np.angle(gb), 2 * np.pi))

    def crest_phase(self, site: int = 0, sigma: int = PROBE_SIGMA):
        return float(np.mod(self.node_phase(site, sigma) + np.pi, 2 * np.pi))

    def single_entry(self, deltas, workers: int = 1, method: str = "lu") -> ScatteringResult:
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        return ScatteringResult(deltas, self.channels, self.s_matrix(deltas, 1, workers=workers, method=method))

    def resolve_theta(self, theta):
        if isinstance(theta, str):
            if theta not in ("node", "crest"):
                raise ValueError(f"theta must be a phase, 'node' or 'crest'; got {theta!r}")
            return self.node_phase() if theta == "node" else self.crest_phase()
        return float(theta)

    def symmetric(self, deltas, theta: float | str = "crest", workers: int = 1,
                  method: str = "lu") -> ScatteringResult:
        """Equal split between the two ends with relative phase theta.

        ``theta`` may be a number or one of "node" / "crest".
        """
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        theta = self.resolve_theta(theta)
        fwd = self.s_matrix(deltas, 1, workers=workers, method=method)
        bwd = self.s_matrix(deltas, -1, workers=workers, method=method)
        amp = (fwd + np.exp(1j * theta) * bwd) / np.sqrt(2)
        return ScatteringResult(deltas, self.channels, amp, theta=float(theta))


def spectrum_single_entry(system: ScatteringSystem, deltas, workers: int = 1) -> ScatteringResult:
    return system.single_entry(deltas, workers)


def spectrum_symmetric(system: ScatteringSystem, deltas, theta="crest", workers: int = 1) -> ScatteringResult:
    return system.symmetric(deltas, theta, workers)


def single_atom_s(delta, gamma_tot, g_in, g_out, v_g, control: ControlField = ControlField(), same=False):
    """Closed-form one-atom S element: delta_io - (i/v_g) g_out^* g_in / (Delta + i gamma/2 - Sigma_c)."""
    delta = np.asarray(delta, dtype=float)
    shift = control_dressing(delta, control.detuning, control.rabi) if control.active else 0.0
    return float(same) - 1j / v_g * np.conj(g_out) * g_in / (delta + 0.5j * gamma_tot - shift)


def default_grid(control: ControlField = ControlField(), points: int = 801):
    """Scan windows: [-8, 8] gamma bare, [Delta_c - 2, Delta_c + 2] around the dressed line."""
    if control.active:
        return np.linspace(control.detuning - 2.0, control.detuning + 2.0, points)
    return np.linspace(-8.0, 8.0, points)
