"""Fundamental HE11 mode of a step-index nanofiber.

All quantities are in natural units: c = 1 and lengths measured in
units of 1/k0 = lambda0 / (2 pi), so the reference angular frequency
is omega = 1.  The radial profiles follow the quasi-circular HE11
construction (Bessel J inside the core, modified Bessel K outside) with

    E_rho  = i * real,   E_phi = real,   E_z = real,

and the mode with azimuthal number ``sigma`` and direction ``f`` is

    E(rho, phi, z) = (E_rho r^ + sigma E_phi phi^ + f E_z z^)
                     * exp(i sigma phi) exp(i f k_wg z) / sqrt(2 pi)

per unit quantization length.  The radial functions are normalized so
that ``int rho * eps(rho) * |E(rho)|^2 drho = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize, special

# first zero of J0; the HE11 transverse parameter U stays below it
_J0_ZERO = 2.404825557695773


class DispersionError(ValueError):
    """Raised when no guided HE11 root can be found."""


@dataclass(frozen=True)
class FiberSpec:
    """Step-index fiber geometry and the vacuum reference wavelength."""

    radius_nm: float = 250.0
    n_core: float = 1.45
    n_clad: float = 1.0
    lambda0_nm: float = 780.0

    def __post_init__(self):
        if not self.radius_nm > 0:
            raise ValueError(f"fiber radius must be positive, got {self.radius_nm}")
        if not self.lambda0_nm > 0:
            raise ValueError(f"wavelength must be positive, got {self.lambda0_nm}")
        if self.n_clad < 1.0:
            raise ValueError(f"cladding index must be >= 1, got {self.n_clad}")

    @property
    def radius(self) -> float:
        """Fiber radius in units of 1/k0."""
        return 2.0 * np.pi * self.radius_nm / self.lambda0_nm

    def to_nm(self, length):
        return np.asarray(length) * self.lambda0_nm / (2.0 * np.pi)

    def from_nm(self, length_nm):
        return np.asarray(length_nm) * 2.0 * np.pi / self.lambda0_nm

    def v_number(self, omega: float = 1.0) -> float:
        return omega * self.radius * np.sqrt(self.n_core**2 - self.n_clad**2)


def _kp1_over_k1(w):
    # K1'(W) / K1(W), evaluated with exponentially scaled Bessels
    k0 = special.k0e(w)
    k1 = special.k1e(w)
    return -(k0 / k1) - 1.0 / w


def characteristic(beta, spec: FiberSpec, omega: float = 1.0):
    """HE11 eigenvalue function; zero at the propagation constant.

    Written as ``J0(U)/(U J1(U)) - rhs`` which is free of poles for
    ``0 < U < 2.405``.
    """
    a = spec.radius
    n1, n2 = spec.n_core, spec.n_clad
    beta = np.asarray(beta, dtype=float)
    u = a * np.sqrt(n1**2 * omega**2 - beta**2)
    w = a * np.sqrt(beta**2 - n2**2 * omega**2)
    eta2 = _kp1_over_k1(w) / w
    inv = 1.0 / u**2 + 1.0 / w**2
    rad = ((n1**2 - n2**2) / (2 * n1**2)) ** 2 * eta2**2 + (beta / (n1 * omega)) ** 2 * inv**2
    rhs = -((n1**2 + n2**2) / (2 * n1**2)) * eta2 + 1.0 / u**2 - np.sqrt(rad)
    return special.j0(u) / (u * special.j1(u)) - rhs


def solve_propagation_constant(spec: FiberSpec, omega: float = 1.0) -> float:
    """Return k_wg of the HE11 mode at angular frequency ``omega``."""
    n1, n2 = spec.n_core, spec.n_clad
    if n1 <= n2:
        raise DispersionError(f"no guided mode: n_core={n1} <= n_clad={n2}")
    a = spec.radius
    v = omega * a * np.sqrt(n1**2 - n2**2)
    # parametrize by W = a sqrt(beta^2 - n2^2 omega^2); thin fibers put the
    # root at exponentially small W, so the bracket scan is logarithmic
    w_max = v * (1 - 1e-12)
    w_min_u = np.sqrt(max(v**2 - _J0_ZERO**2, 0.0)) * (1 + 1e-12)

    def beta_of_w(w):
        return np.sqrt(n2**2 * omega**2 + (w / a) ** 2)

    def func(logw):
        return characteristic(beta_of_w(np.exp(logw)), spec, omega)

    lo = np.log(max(w_min_u, 1e-300))
    logs = np.linspace(lo, np.log(w_max), 4001)
    with np.errstate(all="ignore"):
        vals = func(logs)
    ok = np.isfinite(vals)
    idx = np.nonzero(ok[:-1] & ok[1:] & (np.sign(vals[:-1]) != np.sign(vals[1:])))[0]
    if idx.size == 0:
        raise DispersionError("HE11 root bracketing failed")
    i = idx[-1]
    try:
        lw = optimize.brentq(func, logs[i], logs[i + 1], xtol=1e-15,
                             rtol=4 * np.finfo(float).eps, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise DispersionError(f"HE11 root did not converge: {exc}") from exc
    return float(beta_of_w(np.exp(lw)))


def _fd_group_velocity(spec: FiberSpec, omega: float, step: float) -> float:
    # Richardson-extrapolated centered difference of omega(k)
    def slope(h):
        bp = solve_propagation_constant(spec, omega * (1 + h))
        bm = solve_propagation_constant(spec, omega * (1 - h))
        return (bp - bm) / (2 * h * omega)

    d1 = slope(step)
    d2 = slope(step / 2)
    dbeta = (4 * d2 - d1) / 3
    return float(1.0 / dbeta)


@dataclass(frozen=True)
class GuidedMode:
    """HE11 solution at one frequency, for azimuthal number ``sigma``.

    ``direction`` is +1 for propagation towards +z and -1 otherwise.
    Instances are immutable and safe to share between threads.
    """

    spec: FiberSpec
    k_wg: float
    omega: float
    v_g: float
    norm_const: float
    s_param: float
    u: float
    w: float
    sigma: int = -1
    direction: int = 1
    _outer_scale: float = field(default=0.0, repr=False)

    @property
    def n_eff(self) -> float:
        return self.k_wg / self.omega

    @property
    def wavelength(self) -> float:
        """Guided wavelength 2 pi / k_wg in units of 1/k0."""
        return 2 * np.pi / self.k_wg

    @property
    def decay_constant(self) -> float:
        """Evanescent decay constant q = W / a outside the core."""
        return self.w / self.spec.radius

    def with_sigma(self, sigma: int) -> "GuidedMode":
        if sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {sigma}")
        return replace(self, sigma=sigma)

    def reversed(self) -> "GuidedMode":
        return replace(self, direction=-self.direction)

    def epsilon(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.where(rho < self.spec.radius, self.spec.n_core**2, self.spec.n_clad**2)

    def profiles(self, rho):
        """Basic radial functions (E_rho, E_phi, E_z), independent of sigma."""
        rho = np.asarray(rho, dtype=float)
        a = self.spec.radius
        h = self.u / a
        q = self.w / a
        b, s = self.k_wg, self.s_param
        inside = rho < a
        r_in = np.where(inside, rho, 0.0)
        r_out = np.where(inside, a, rho)

        j0, j1, j2 = (special.jv(n, h * r_in) for n in (0, 1, 2))
        e_rho_in = 1j * b / (2 * h) * ((1 - s) * j0 - (1 + s) * j2)
        e_phi_in = -b / (2 * h) * ((1 - s) * j0 + (1 + s) * j2)
        e_z_in = j1

        # exp-scaled K functions keep the far tail finite
        damp = np.exp(-q * (r_out - a))
        k0, k1, k2 = (special.kve(n, q * r_out) * damp for n in (0, 1, 2))
        c = self._outer_scale
        e_rho_out = 1j * c * b / (2 * q) * ((1 - s) * k0 + (1 + s) * k2)
        e_phi_out = -c * b / (2 * q) * ((1 - s) * k0 - (1 + s) * k2)
        e_z_out = c * k1

        n = self.norm_const
        e_rho = n * np.where(inside, e_rho_in, e_rho_out)
        e_phi = n * np.where(inside, e_phi_in, e_phi_out)
        e_z = n * np.where(inside, e_z_in, e_z_out)
        return e_rho, e_phi, e_z.astype(complex)

    def field(self, rho, phi):
        """Cartesian field (..., 3) at (rho, phi), z = 0, incl. 1/sqrt(2 pi)."""
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        e_rho, e_phi, e_z = self.profiles(rho)
        e_phi = self.sigma * e_phi
        e_z = self.direction * e_z
        c, s = np.cos(phi), np.sin(phi)
        phase = np.exp(1j * self.sigma * phi) / np.sqrt(2 * np.pi)
        ex = (e_rho * c - e_phi * s) * phase
        ey = (e_rho * s + e_phi * c) * phase
        ez = e_z * phase
        return np.stack(np.broadcast_arrays(ex, ey, ez), axis=-1)


def _build_mode(spec: FiberSpec, omega: float, k_wg: float, v_g: float, sigma: int) -> GuidedMode:
    a = spec.radius
    n1, n2 = spec.n_core, spec.n_clad
    u = a * np.sqrt(n1**2 * omega**2 - k_wg**2)
    w = a * np.sqrt(k_wg**2 - n2**2 * omega**2)
    j1p = special.jvp(1, u) / (u * special.j1(u))
    k1p = _kp1_over_k1(w) / w
    s = (1 / u**2 + 1 / w**2) / (j1p + k1p)
    outer = special.j1(u) / special.kve(1, w)  # K1 scaled: kve(1,w) = K1(w) e^w
    proto = GuidedMode(spec, k_wg, omega, v_g, 1.0, s, u, w, sigma, 1, outer)
    # the exp(w) from kve is absorbed in `outer`; profiles use kve * exp(-q(r-a))

    def density(r):
        er, ep, ez = proto.profiles(r)
        return r * proto.epsilon(r) * (abs(er) ** 2 + abs(ep) ** 2 + abs(ez) ** 2)

    q = w / a
    inner, _ = integrate.quad(density, 0.0, a, epsabs=0, epsrel=1e-13, limit=200)
    outer_int = 0.0
    lo = a
    for span in (1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
        hi = a + span * 4.0 / q
        part, _ = integrate.quad(density, lo, hi, epsabs=0, epsrel=1e-13, limit=400)
        outer_int += part
        lo = hi
    norm = 1.0 / np.sqrt(inner + outer_int)
    return replace(proto, norm_const=float(norm))


def solve_dispersion(spec: FiberSpec, omega: float = 1.0, sigma: int = -1,
                     fd_step: float = 1e-4) -> GuidedMode:
    """Solve the HE11 eigenproblem and return the normalized forward mode."""
    if sigma not in (1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    k_wg = solve_propagation_constant(spec, omega)
    try:
        v_g = _fd_group_velocity(spec, omega, fd_step)
    except DispersionError as exc:
        raise DispersionError(f"group-velocity stencil failed: {exc}") from exc
    return _build_mode(spec, omega, k_wg, v_g, sigma)


def group_velocity(mode: GuidedMode, step: float = 1e-4) -> float:
    """d omega / d k of the HE11 branch by a Richardson-refined central stencil."""
    return _fd_group_velocity(mode.spec, mode.omega, step)


@dataclass(frozen=True)
class ModeField:
    """Cartesian field at one point plus its angular-momentum decomposition.

    ``terms`` maps the orbital number l to the Cartesian vector of that
    term; the three terms sum to ``cartesian``.
    """

    cartesian: np.ndarray
    terms: dict
    d_perp: float
    d_prime: float
    d_dprime: float


def circular_unit(sigma: int) -> np.ndarray:
    """Unit polarization (x + i sigma y)/sqrt(2)."""
    return np.array([1.0, 1j * sigma, 0.0]) / np.sqrt(2)


def displacement_profiles(mode: GuidedMode, rho):
    """Real profiles (D_perp, D', D'') of the three angular terms."""
    rho = np.asarray(rho, dtype=float)
    e_rho, e_phi, e_z = mode.profiles(rho)
    eps = mode.epsilon(rho)
    d_perp = eps * (-1j * e_rho - e_phi) / (2 * np.sqrt(np.pi))
    d_prime = eps * (-1j * e_rho + e_phi) / (2 * np.sqrt(np.pi))
    d_dprime = eps * e_z / np.sqrt(2 * np.pi)
    return d_perp.real, d_prime.real, d_dprime.real


def transverse_amplitude(mode: GuidedMode, rho):
    """Amplitude u(rho) of the paraxial l = 0 term, u * e_sigma."""
    e_rho, e_phi, _ = mode.profiles(rho)
    return (e_rho - 1j * e_phi) / (2 * np.sqrt(np.pi))


def mode_field(mode: GuidedMode, rho: float, phi: float) -> ModeField:
    if rho < 0:
        raise ValueError("rho must be non-negative")
    sig, f = mode.sigma, mode.direction
    e_rho, e_phi, e_z = (complex(x) for x in mode.profiles(rho))
    u = (e_rho - 1j * e_phi) / (2 * np.sqrt(np.pi))
    v = (e_rho + 1j * e_phi) / (2 * np.sqrt(np.pi))
    terms = {
        0: u * circular_unit(sig),
        2 * sig: v * np.exp(2j * sig * phi) * circular_unit(-sig),
        sig: np.array([0, 0, f * e_z * np.exp(1j * sig * phi) / np.sqrt(2 * np.pi)]),
    }
    total = sum(terms.values())
    d_perp, d_prime, d_dprime = (float(x) for x in displacement_profiles(mode, rho))
    return ModeField(total, terms, d_perp, d_prime, d_dprime)


def _radial_nodes(mode: GuidedMode, n: int):
    a = mode.spec.radius
    q = mode.decay_constant
    x, wts = np.polynomial.legendre.leggauss(n)
    edges = [0.0, a]
    step = 2.0 / q
    while edges[-1] < a + 40.0 / q:
        edges.append(edges[-1] + step)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * wts)
    return np.concatenate(nodes), np.concatenate(weights)


def mode_overlap(mode_a: GuidedMode, mode_b: GuidedMode, n_radial: int = 48,
                 n_phi: int = 64) -> complex:
    """Transverse overlap int dA D_b^* . E_a (per unit length)."""
    if mode_a.spec != mode_b.spec:
        raise ValueError("modes belong to different fibers")
    rho, wr = _radial_nodes(mode_a, n_radial)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    rr, pp = np.meshgrid(rho, phi, indexing="ij")
    ea = mode_a.field(rr, pp)
    db = mode_b.epsilon(rr)[..., None] * mode_b.field(rr, pp)
    integrand = np.sum(np.conj(db) * ea, axis=-1)
    return complex(np.sum(wr[:, None] * rr * integrand) * (2 * np.pi / n_phi))
