"""Electric-field Green's tensor near the nanofiber.

The tensor G solves ``curl curl G - k^2 eps G = delta`` in natural units
(c = 1, k0 = 1), so that ``Im G_vac(r, r) = k / (6 pi)``.  It is split into
a guided part, from the residues of the HE11 poles, and an external part,
the vacuum tensor minus the emission into the paraxial Gaussian beam that
mimics the guided mode.

Points are cylindrical triples (rho, phi, z) in the last axis; tensors
come back with two trailing 3-axes ordered (observation, source).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .modes import GuidedMode, _radial_nodes, displacement_profiles, transverse_amplitude

SIGMAS = (1, -1)
TRANSVERSE = np.diag([1.0, 1.0, 0.0])


class GreenError(ValueError):
    """Raised for singular or unsupported Green's-function evaluations."""


def _as_points(r):
    r = np.asarray(r, dtype=float)
    if r.shape[-1] != 3:
        raise ValueError("points must have a trailing axis of length 3 (rho, phi, z)")
    return r


def _to_cartesian(r):
    return np.stack([r[..., 0] * np.cos(r[..., 1]), r[..., 0] * np.sin(r[..., 1]), r[..., 2]], axis=-1)


def vacuum_green(R, k: float = 1.0):
    """Free-space dyadic Green's tensor for a Cartesian displacement R."""
    R = np.asarray(R, dtype=float)
    dist = np.linalg.norm(R, axis=-1)
    if np.any(dist == 0):
        raise GreenError("vacuum Green's tensor is singular at R = 0; use vacuum_coincident()")
    kr = k * dist
    rhat = R / dist[..., None]
    pref = np.asarray(np.exp(1j * kr) / (4 * np.pi * dist))
    a = np.asarray(1 + 1j / kr - 1 / kr**2)
    b = np.asarray(-1 - 3j / kr + 3 / kr**2)
    outer = rhat[..., :, None] * rhat[..., None, :]
    eye = np.eye(3)
    return pref[..., None, None] * (a[..., None, None] * eye + b[..., None, None] * outer)


def vacuum_coincident(k: float = 1.0):
    """Radiative (imaginary) part of the vacuum tensor at R -> 0."""
    return 1j * k / (6 * np.pi) * np.eye(3)


@dataclass(frozen=True)
class TransverseSpectrum:
    """Order-0 Hankel transform of the paraxial profile D_perp."""

    q: np.ndarray
    d_perp_q: np.ndarray


@dataclass(frozen=True)
class GaussianFit:
    """Paraxial Gaussian beam matched to the guided mode."""

    waist: float
    rayleigh_range: float
    inv_variance: float
    q_cut: float


def hankel_d_perp(mode: GuidedMode, q, n_radial: int = 64):
    """D_perp(q) = 2 pi int rho J0(q rho) D_perp(rho) drho by Gauss-Legendre."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    rho, wts = _radial_nodes(mode, n_radial)
    d_perp = displacement_profiles(mode, rho)[0]
    kernel = special.j0(np.outer(q, rho))
    return 2 * np.pi * kernel @ (wts * rho * d_perp)


def gaussian_fit(mode: GuidedMode, n_q: int = 801, q_max: float | None = None,
                 q_cut: float | None = None):
    """Fit waist and Rayleigh range from the spread of D_perp(q).

    D_perp jumps at the fiber surface, so its full second moment in q
    diverges; the variance is taken over the propagating band
    q <= q_cut (default omega / c).
    """
    if q_cut is None:
        q_cut = mode.omega
    if q_max is None:
        q_max = max(q_cut, 10 * mode.decay_constant)
    q = np.linspace(0.0, q_max, n_q)
    spec_q = hankel_d_perp(mode, q)

    xg, wg = np.polynomial.legendre.leggauss(200)
    qq = 0.5 * q_cut * (xg + 1)
    ww = 0.5 * q_cut * wg
    dq = hankel_d_perp(mode, qq)
    p = np.abs(dq) ** 2 * qq * ww
    inv_var = float(np.sum(qq**2 * p) / np.sum(p))
    waist = 1.0 / np.sqrt(inv_var)
    lambda0 = 2 * np.pi / mode.omega
    z_r = np.pi * waist**2 / lambda0
    return GaussianFit(waist, z_r, inv_var, q_cut), TransverseSpectrum(q, spec_q)


class FiberGreen:
    """Green's tensor of the fiber for one guided-mode solution.

    Mode fields and beam parameters are computed once; evaluations are
    pure functions and thread-safe.
    """

    def __init__(self, mode: GuidedMode, fit: GaussianFit | None = None, blend=(1.8, 2.2)):
        self.mode = mode
        self.fit = fit
        self.blend = blend
        rho, wts = _radial_nodes(mode, 64)
        u = transverse_amplitude(mode, rho)
        # zeroth moment of eps * u, the on-axis far-field weight
        self._u_moment = complex(2 * np.pi * np.sum(wts * rho * mode.epsilon(rho) * u))

    @property
    def k0(self):
        return self.mode.omega

    def mode_fields(self, r, sigma, direction):
        r = _as_points(r)
        m = self.mode.with_sigma(sigma)
        if m.direction != direction:
            m = m.reversed()
        return m.field(r[..., 0], r[..., 1])

    @staticmethod
    def _dir_weights(dz):
        fwd = np.where(dz > 0, 1.0, np.where(dz == 0, 0.5, 0.0))
        return {1: fwd, -1: 1.0 - fwd}

    def guided(self, r, rp):
        r, rp = _as_points(r), _as_points(rp)
        dz = r[..., 2] - rp[..., 2]
        m = self.mode
        pref = 1j / (2 * m.omega * m.v_g) * np.exp(1j * m.k_wg * np.abs(dz))
        out = 0
        for d, wd in self._dir_weights(dz).items():
            for s in SIGMAS:
                e_r = self.mode_fields(r, s, d)
                e_p = self.mode_fields(rp, s, d)
                out = out + wd[..., None, None] * e_r[..., :, None] * np.conj(e_p)[..., None, :]
        return pref[..., None, None] * out

    def _beam_terms(self, r, rp):
        # near and far forms of the subtracted paraxial beam, (..., 3, 3) each.
        # Both ends use the transverse l = 0 part u(rho) e_sigma; summing the
        # two helicities leaves the transverse projector.
        dz = r[..., 2] - rp[..., 2]
        adz = np.abs(dz)
        k0 = self.k0
        phase = np.exp(1j * k0 * adz)
        u_obs = transverse_amplitude(self.mode, r[..., 0])
        u_src = transverse_amplitude(self.mode, rp[..., 0])
        with np.errstate(divide="ignore", invalid="ignore"):
            far_scale = np.where(adz > 0, 1.0 / (4 * np.pi * adz), 0.0)
        near_w = -0.5j / k0 * u_obs * np.conj(u_src) * phase
        far_w = -0.5 * (u_obs * np.conj(self._u_moment) + self._u_moment * np.conj(u_src)) * far_scale * phase
        return near_w[..., None, None] * TRANSVERSE, far_w[..., None, None] * TRANSVERSE

    def subtraction(self, r, rp):
        """Beam term removed from the vacuum tensor (returned with its sign)."""
        if self.fit is None:
            raise GreenError("external Green's tensor needs a GaussianFit")
        r, rp = _as_points(r), _as_points(rp)
        near, far = self._beam_terms(r, rp)
        z_r = self.fit.rayleigh_range
        lo, hi = self.blend
        x = np.abs(r[..., 2] - rp[..., 2]) / z_r
        w = np.clip((x - lo) / (hi - lo), 0.0, 1.0)[..., None, None]
        return (1 - w) * near + w * far

    def external(self, r, rp):
        r, rp = _as_points(r), _as_points(rp)
        if np.any(r[..., 0] <= self.mode.spec.radius) or np.any(rp[..., 0] <= self.mode.spec.radius):
            raise GreenError("external Green's tensor is defined outside the fiber only")
        R = _to_cartesian(r) - _to_cartesian(rp)
        return vacuum_green(R, self.k0) + self.subtraction(r, rp)

    def total(self, r, rp):
        return self.guided(r, rp) + self.external(r, rp)

    def coincident(self, r):
        """(guided, external) tensors at r = r'; external keeps the radiative vacuum part."""
        r = _as_points(r)
        g = self.guided(r, r)
        ext = vacuum_coincident(self.k0) + self.subtraction(r, r)
        return g, ext

    def pair_table(self, positions):
        """Guided and external tensors for all ordered pairs (obs b, source a).

        Diagonal entries hold the coincident-point limits.
        """
        pos = _as_points(positions)
        n = len(pos)
        rb = np.broadcast_to(pos[:, None, :], (n, n, 3))
        ra = np.broadcast_to(pos[None, :, :], (n, n, 3))
        guided = self.guided(rb, ra)
        same = np.eye(n, dtype=bool)
        R = _to_cartesian(rb) - _to_cartesian(ra)
        R = np.where(same[..., None], 1.0, R)
        vac = vacuum_green(R, self.k0)
        vac[same] = vacuum_coincident(self.k0)
        ext = vac + self.subtraction(rb, ra)
        return guided, ext


def guided_green(r, rp, mode: GuidedMode):
    return FiberGreen(mode).guided(r, rp)


def external_green(r, rp, mode: GuidedMode, fit: GaussianFit | None):
    if fit is None:
        raise GreenError("external Green's tensor needs a GaussianFit")
    return FiberGreen(mode, fit).external(r, rp)


def total_green(r, rp, mode: GuidedMode, fit: GaussianFit):
    return FiberGreen(mode, fit).total(r, rp)
