"""Tripod atoms, chain geometry and the truncated single-excitation basis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GROUND_LEVELS = (-1, 0, 1)
SIGNAL_LEVEL = 1


def spherical_unit(q: int) -> np.ndarray:
    """Spherical basis vector e_q (e_{+-1} = -+(x +- i y)/sqrt(2), e_0 = z)."""
    if q == 1:
        return -np.array([1.0, 1j, 0.0]) / np.sqrt(2)
    if q == -1:
        return np.array([1.0, -1j, 0.0]) / np.sqrt(2)
    if q == 0:
        return np.array([0.0, 0.0, 1.0], dtype=complex)
    raise ValueError(f"spherical index must be -1, 0 or +1, got {q}")


def dipole_component(q: int, m0: int) -> float:
    """Amplitude for absorbing a q-polarized photon from ground sublevel m0.

    This is the Clebsch-Gordan coefficient <1 m0; 1 q | 0 0> so the
    three legs share the unit total strength equally.
    """
    if q not in (-1, 0, 1) or m0 not in GROUND_LEVELS:
        raise ValueError(f"invalid indices q={q}, m0={m0}")
    if m0 + q != 0:
        return 0.0
    return (-1.0) ** (1 - m0) / np.sqrt(3.0)


def absorption_vector(m0: int) -> np.ndarray:
    """Cartesian vector d with absorption amplitude d . E from sublevel m0.

    The emission vector for decay into m0 is its complex conjugate.
    """
    q = -m0
    return dipole_component(q, m0) * np.conj(spherical_unit(q))


@dataclass(frozen=True)
class ChainConfig:
    """Atom positions in cylindrical coordinates (natural units).

    ``positions`` has shape (N, 3) with columns (rho, phi, z).
    """

    positions: np.ndarray
    spacing: float
    order: str = "ordered"
    seed: int | None = None
    fiber_radius: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if pos.size and np.any(pos[:, 0] <= self.fiber_radius):
            raise ValueError("all atoms must sit outside the fiber (rho > a)")
        object.__setattr__(self, "positions", pos)

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    @property
    def rho(self):
        return self.positions[:, 0]

    @property
    def phi(self):
        return self.positions[:, 1]

    @property
    def z(self):
        return self.positions[:, 2]

    def cartesian(self) -> np.ndarray:
        rho, phi, z = self.positions.T
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def build_chain(n_atoms: int, spacing: float, order: str = "ordered", seed: int | None = 0,
                rho: float = 1.0, phi0: float = 0.0, fiber_radius: float = 0.0) -> ChainConfig:
    """Place ``n_atoms`` on a line parallel to the fiber axis.

    Disordered chains add a uniform jitter in [-spacing/2, spacing/2) to
    every lattice site, drawn from ``numpy.random.default_rng(seed)``.
    """
    if n_atoms < 0:
        raise ValueError(f"atom count must be >= 0, got {n_atoms}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if rho <= fiber_radius:
        raise ValueError(f"atoms at rho={rho} would sit inside the fiber (a={fiber_radius})")
    z = spacing * np.arange(n_atoms, dtype=float)
    if order == "disordered":
        rng = np.random.default_rng(seed)
        z = z + rng.uniform(-0.5 * spacing, 0.5 * spacing, size=n_atoms)
    elif order != "ordered":
        raise ValueError(f"order must be 'ordered' or 'disordered', got {order!r}")
    pos = np.column_stack([np.full(n_atoms, rho), np.full(n_atoms, phi0), z])
    return ChainConfig(pos, spacing, order, seed if order == "disordered" else None, fiber_radius)


@dataclass(frozen=True)
class BasisState:
    """One excited atom; optionally one spectator moved off M0 = +1."""

    excited: int
    flip_atom: int | None = None
    flip_level: int | None = None

    def __post_init__(self):
        if self.flip_atom is not None and self.flip_atom == self.excited:
            raise ValueError("the flipped spectator cannot be the excited atom")


@dataclass(frozen=True)
class Basis:
    """Ordered enumeration of the truncated Hilbert space.

    Elastic states come first (index = excited atom), followed by the
    single-Raman block ordered by (excited, flipped atom, level).
    """

    n_atoms: int
    include_raman: bool
    states: tuple = field(repr=False)

    def __len__(self):
        return len(self.states)

    def index(self, state: BasisState) -> int:
        return _index_of(self.n_atoms, state)

    @property
    def n_elastic(self) -> int:
        return self.n_atoms

    def raman_index(self, excited, flip_atom, flip_level):
        """Vectorized index of Raman states; arrays broadcast."""
        n = self.n_atoms
        excited = np.asarray(excited)
        flip_atom = np.asarray(flip_atom)
        slot = flip_atom - (flip_atom > excited)
        lvl = np.where(np.asarray(flip_level) == 0, 0, 1)
        return n + (excited * (n - 1) + slot) * 2 + lvl


RAMAN_LEVELS = (0, -1)


def _index_of(n, state: BasisState) -> int:
    if state.flip_atom is None:
        return state.excited
    j = state.flip_atom
    slot = j - (j > state.excited)
    return n + (state.excited * (n - 1) + slot) * 2 + RAMAN_LEVELS.index(state.flip_level)


def enumerate_basis(n_atoms: int, include_raman: bool = False) -> Basis:
    if n_atoms < 1:
        raise ValueError("basis needs at least one atom")
    states = [BasisState(a) for a in range(n_atoms)]
    if include_raman:
        for a in range(n_atoms):
            for j in range(n_atoms):
                if j == a:
                    continue
                for m in RAMAN_LEVELS:
                    states.append(BasisState(a, j, m))
    return Basis(n_atoms, include_raman, tuple(states))


def basis_dimension(n_atoms: int, include_raman: bool = True, degeneracy: int = 3) -> int:
    """N + N(N-1)(d-1) with the single-Raman rule, N otherwise."""
    if not include_raman:
        return n_atoms
    return n_atoms + n_atoms * (n_atoms - 1) * (degeneracy - 1)
