"""Effective Hamiltonian on the truncated basis and its resolvent.

Energies are detunings from the (Lamb-shifted) atomic resonance in units
of the free-space rate gamma.  The self-energy is evaluated once at the
carrier frequency (pole approximation), so the scan variable enters only
through the scalar ``Delta - Sigma_c(Delta)`` on the diagonal.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .atoms import GROUND_LEVELS, RAMAN_LEVELS, Basis, ChainConfig, absorption_vector, enumerate_basis
from .green import FiberGreen

# level -> row of the coupling table
LEVEL_SLOT = {1: 0, 0: 1, -1: 2}
DIPOLES = np.array([absorption_vector(m) for m in GROUND_LEVELS[::-1]])  # ordered +1, 0, -1


@dataclass(frozen=True)
class DecayRates:
    """Partial emission rates of one atom, in units of gamma.

    Totals run over the three ground legs; ``legs_wg`` and ``legs_ext``
    keep the per-leg split ordered (+1, 0, -1).  The signal transition is
    the M0 = +1 leg.
    """

    gamma_wg: float
    gamma_ext: float
    legs_wg: tuple = (0.0, 0.0, 0.0)
    legs_ext: tuple = (0.0, 0.0, 0.0)

    @property
    def signal_wg(self) -> float:
        return self.legs_wg[0]

    @property
    def gamma_tot(self) -> float:
        return self.gamma_wg + self.gamma_ext

    @property
    def beta(self) -> float:
        return self.gamma_wg / self.gamma_tot


@dataclass(frozen=True)
class ControlField:
    """Static pi-polarized control on the M0 = 0 leg."""

    rabi: float = 0.0
    detuning: float = 0.0
    enabled: bool = False

    @property
    def active(self) -> bool:
        return self.enabled and self.rabi != 0.0


def control_dressing(delta, detuning: float, rabi: float, eta: float = 0.0):
    """Sigma_c = (Omega^2 / 4) / (Delta - Delta_c + i eta).

    Subtracting it from ``Delta`` on the diagonal puts the transparency
    point at Delta = Delta_c and the dressed lines at the roots of
    Delta (Delta - Delta_c) = Omega^2 / 4.
    """
    delta = np.asarray(delta, dtype=float)
    if rabi == 0:
        return np.zeros_like(delta, dtype=complex)
    den = delta - detuning + 1j * eta
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den == 0, np.inf + 0j, (abs(rabi) ** 2 / 4) / np.where(den == 0, 1.0, den))


def leg_coupling(g_obs, g_src):
    """Dipole-contracted coupling -(3 pi / k) d(m_b) . G . d(m_a)^* for all legs.

    ``g_obs`` tensors are (N, N, 3, 3); returns (3, 3, N, N) indexed by
    (absorber level slot, emitter level slot, b, a).
    """
    return -3 * np.pi * np.einsum("pi,baij,qj->pqba", DIPOLES, g_obs + g_src, DIPOLES.conj())


def _diag_rate(coupling_diag):
    # gamma from the radiative (imaginary) part, summed over the three legs
    return -2 * np.sum(np.imag(coupling_diag), axis=0)


def decay_rates(position, green: FiberGreen) -> DecayRates:
    """Guided and external emission rates of an atom at (rho, phi, z)."""
    pos = np.asarray(position, dtype=float).reshape(1, 3)
    g_wg, g_ext = green.coincident(pos)
    legs = []
    for tensor in (g_wg, g_ext):
        c = -3 * np.pi * np.einsum("pi,ij,pj->p", DIPOLES, tensor[0], DIPOLES.conj())
        legs.append(tuple(float(x) for x in -2 * np.imag(c)))
    return DecayRates(sum(legs[0]), sum(legs[1]), legs[0], legs[1])


def coupling_amplitudes(chain: ChainConfig, mode):
    """g[sigma_slot, dir_slot, atom, level_slot], guided absorption amplitudes.

    sigma slots are (+1, -1), direction slots (+1, -1), level slots (+1, 0, -1).
    The longitudinal phase exp(i dir k_wg z) is included.
    """
    pref = np.sqrt(3 * np.pi / (2 * mode.omega * mode.omega))
    out = np.empty((2, 2, chain.n_atoms, 3), dtype=complex)
    for i, s in enumerate((1, -1)):
        for j, d in enumerate((1, -1)):
            m = mode.with_sigma(s)
            if m.direction != d:
                m = m.reversed()
            e = m.field(chain.rho, chain.phi) * np.exp(1j * d * mode.k_wg * chain.z)[:, None]
            out[i, j] = pref * np.einsum("li,ni->nl", DIPOLES, e)
    return out


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Dense non-Hermitian matrix H0 with the scan-independent self-energy.

    The control dressing is a scalar on the diagonal and is added at
    solve time.
    """

    matrix: np.ndarray
    basis: Basis
    gamma_tot: np.ndarray
    ground: np.ndarray
    control: ControlField = ControlField()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvals(self.matrix)


def _resolve_ground(n, ground):
    if ground is None:
        return np.ones(n, dtype=int)
    ground = np.asarray(ground, dtype=int)
    if ground.shape != (n,) or not np.all(np.isin(ground, GROUND_LEVELS)):
        raise ValueError("ground configuration must list one level in {-1, 0, 1} per atom")
    return ground


def self_energy(basis: Basis, chain: ChainConfig, green: FiberGreen, ground=None,
                control: ControlField = ControlField(), table=None) -> EffectiveHamiltonian:
    """Assemble H0 on ``basis`` from the pair Green's tensors.

    ``ground`` sets the initial sublevel of every atom (default all +1);
    a non-default background is supported in the elastic sector only.
    ``table`` may pass a precomputed (guided, external) pair table.
    """
    n = chain.n_atoms
    if basis.n_atoms != n:
        raise ValueError("basis and chain disagree on the atom count")
    ground = _resolve_ground(n, ground)
    if basis.include_raman and np.any(ground != 1):
        raise ValueError("Raman sector assumes all spectators start in M0 = +1")
    g_wg, g_ext = green.pair_table(chain.positions) if table is None else table
    cpl = leg_coupling(g_wg, g_ext)
    idx = np.arange(n)
    gamma = _diag_rate(cpl[[0, 1, 2], [0, 1, 2]][:, idx, idx])

    h = np.zeros((len(basis), len(basis)), dtype=complex)
    slots = np.array([LEVEL_SLOT[m] for m in ground])
    b, a = np.meshgrid(idx, idx, indexing="ij")
    off = b != a
    bb, aa = b[off], a[off]
    h[bb, aa] = cpl[slots[bb], slots[aa], bb, aa]

    if basis.include_raman:
        for m in RAMAN_LEVELS:
            ls = LEVEL_SLOT[m]
            # E(a) -> R(b; a, m): a decays into m, b absorbs from +1
            h[basis.raman_index(bb, aa, m), aa] = cpl[0, ls, bb, aa]
            # R(a; b, m) -> E(b): a decays back to +1, b absorbs from m
            h[bb, basis.raman_index(aa, bb, m)] = cpl[ls, 0, bb, aa]
            for m2 in RAMAN_LEVELS:
                h[basis.raman_index(bb, aa, m2), basis.raman_index(aa, bb, m)] = cpl[ls, LEVEL_SLOT[m2], bb, aa]
        # spectator j stays flipped while the excitation hops a -> b
        bj, aj, jj = np.meshgrid(idx, idx, idx, indexing="ij")
        sel = (bj != aj) & (jj != aj) & (jj != bj)
        bj, aj, jj = bj[sel], aj[sel], jj[sel]
        for m in RAMAN_LEVELS:
            h[basis.raman_index(bj, jj, m), basis.raman_index(aj, jj, m)] = cpl[0, 0, bj, aj]

    excited = np.array([s.excited for s in basis.states])
    h[np.arange(len(basis)), np.arange(len(basis))] = -0.5j * gamma[excited]
    return EffectiveHamiltonian(h, basis, gamma, ground, control)


def _solve_chunk(h, deltas, shift, rhs):
    # an infinite dressing (Delta = Delta_c exactly) blocks the excitation: X = 0
    z = deltas - shift
    ok = np.isfinite(z)
    out = np.zeros((len(deltas),) + rhs.shape, dtype=complex)
    if np.any(ok):
        mats = z[ok][:, None, None] * np.eye(h.shape[0]) - h
        out[ok] = np.linalg.solve(mats, np.broadcast_to(rhs, (int(ok.sum()),) + rhs.shape))
    return out


def _solve_chunk_schur(t, qhb, q, deltas, shift):
    out = np.zeros((len(deltas), q.shape[0], qhb.shape[1]), dtype=complex)
    eye = np.eye(t.shape[0])
    for i, z in enumerate(deltas - shift):
        if np.isfinite(z):
            out[i] = q @ linalg.solve_triangular(z * eye - t, qhb)
    return out


def resolvent_columns(ham: EffectiveHamiltonian, deltas, sources, workers: int = 1,
                      chunk: int = 32, method: str = "lu"):
    """Solve (Delta - Sigma_c - H0) X = B at every detuning.

    ``sources`` is (dim, k); returns X with shape (n_freq, dim, k).  With
    ``method="lu"`` each frequency is factorized once and reused for all
    k columns.  ``method="schur"`` reduces H0 once to triangular form, which
    makes very dense grids cheap.  Chunks are independent, so serial and
    threaded runs agree bit for bit.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    rhs = np.asarray(sources, dtype=complex)
    if rhs.ndim == 1:
        rhs = rhs[:, None]
    if rhs.shape[0] != ham.dim:
        raise ValueError(f"source block has {rhs.shape[0]} rows, basis has {ham.dim}")
    c = ham.control
    shift = control_dressing(deltas, c.detuning, c.rabi) if c.active else np.zeros(len(deltas), complex)
    starts = range(0, len(deltas), chunk)
    if method == "lu":
        fn = _solve_chunk
        jobs = [(ham.matrix, deltas[i:i + chunk], shift[i:i + chunk], rhs) for i in starts]
    elif method == "schur":
        fn = _solve_chunk_schur
        t, q = linalg.schur(ham.matrix, output="complex")
        qhb = q.conj().T @ rhs
        jobs = [(t, qhb, q, deltas[i:i + chunk], shift[i:i + chunk]) for i in starts]
    else:
        raise ValueError(f"method must be 'lu' or 'schur', got {method!r}")
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: fn(*j), jobs))
    else:
        parts = [fn(*j) for j in jobs]
    if not parts:
        return np.empty((0, ham.dim, rhs.shape[1]), dtype=complex)
    return np.concatenate(parts, axis=0)


def build_hamiltonian(chain: ChainConfig, green: FiberGreen, include_raman: bool = False,
                      control: ControlField = ControlField(), ground=None) -> EffectiveHamiltonian:
    basis = enumerate_basis(chain.n_atoms, include_raman)
    return self_energy(basis, chain, green, ground=ground, control=control)
