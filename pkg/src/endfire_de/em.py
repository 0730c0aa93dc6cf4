"""Physical primitives for arrays of parallel thin-wire dipoles.

Self and mutual impedances follow the induced-EMF method with a sinusoidal
current on every element.  Impedances are referenced to the input (feed-point)
current.  Positions, lengths and radii are in meters; angles in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate
from scipy import constants as sc
from scipy.special import sici

__all__ = [
    "C0",
    "ModelParams",
    "Direction",
    "ENDFIRE",
    "sin_cos_integrals",
    "self_impedance",
    "self_resistance",
    "mutual_impedance",
    "mutual_impedance_quadrature",
    "impedance_between",
    "loss_resistance",
    "element_factor",
    "array_response",
    "far_field",
]

C0 = sc.c

_SELF_REACTANCE = ("resonant", "induced_emf")
_ACTIVE_REFLECTION = ("standard", "mutual_only")
_REFLECTION_WEIGHTING = ("current", "power", "uniform")


@dataclass(frozen=True)
class ModelParams:
    """Frequency, dipole geometry, material constants and model conventions.

    Parameters
    ----------
    f : float
        Carrier frequency [Hz].
    l : float
        Dipole length [m].
    rho : float
        Wire radius [m].
    sigma_c : float
        Conductor conductivity [S/m].  ``math.inf`` for a perfect conductor.
    P_t : float
        Per-element maximum input power [W].
    Z0 : float
        Port (transmission line) reference impedance [ohm].
    self_reactance : {"resonant", "induced_emf"}
        ``"resonant"`` treats every element as tuned to resonance, so the
        diagonal of the coupling matrix carries only the self resistance.
        ``"induced_emf"`` keeps the induced-EMF self reactance.
    active_reflection : {"standard", "mutual_only"}
        ``"standard"`` builds the per-port active reflection coefficient from
        the full scattering row, ``"mutual_only"`` drops the S_nn term.
    reflection_weighting : {"current", "power", "uniform"}
        How per-port reflection efficiencies of a driven array are combined.
    """

    f: float = 3.5e9
    l: float = field(default=None)  # type: ignore[assignment]
    rho: float = field(default=None)  # type: ignore[assignment]
    sigma_c: float = 5.8e7
    P_t: float = 0.5
    Z0: float = 73.0
    mu: float = sc.mu_0
    self_reactance: str = "resonant"
    active_reflection: str = "standard"
    reflection_weighting: str = "current"

    def __post_init__(self):
        if not (self.f > 0 and math.isfinite(self.f)):
            raise ValueError(f"frequency must be positive and finite, got {self.f}")
        lam = C0 / self.f
        if self.l is None:
            object.__setattr__(self, "l", lam / 2)
        if self.rho is None:
            object.__setattr__(self, "rho", lam / 200)
        if not self.l > 0:
            raise ValueError(f"dipole length must be positive, got {self.l}")
        if not self.rho > 0:
            raise ValueError(f"wire radius must be positive, got {self.rho}")
        if self.rho > self.l / 10:
            raise ValueError(
                f"wire radius {self.rho:g} m exceeds l/10; thin-wire model does not apply"
            )
        if not self.sigma_c > 0:
            raise ValueError(f"conductivity must be positive, got {self.sigma_c}")
        if not self.P_t > 0:
            raise ValueError(f"P_t must be positive, got {self.P_t}")
        if not self.Z0 > 0:
            raise ValueError(f"Z0 must be positive, got {self.Z0}")
        if self.self_reactance not in _SELF_REACTANCE:
            raise ValueError(f"self_reactance must be one of {_SELF_REACTANCE}")
        if self.active_reflection not in _ACTIVE_REFLECTION:
            raise ValueError(f"active_reflection must be one of {_ACTIVE_REFLECTION}")
        if self.reflection_weighting not in _REFLECTION_WEIGHTING:
            raise ValueError(f"reflection_weighting must be one of {_REFLECTION_WEIGHTING}")

    @classmethod
    def from_wavelengths(cls, f=3.5e9, length=0.5, radius=1 / 200, **kw) -> "ModelParams":
        """Build parameters with the dipole length and radius in wavelengths."""
        lam = C0 / f
        return cls(f=f, l=length * lam, rho=radius * lam, **kw)

    @property
    def lam(self) -> float:
        return C0 / self.f

    @property
    def k(self) -> float:
        return 2 * math.pi / self.lam

    @property
    def eta(self) -> float:
        return self.mu * C0

    def scaled(self, f: float) -> "ModelParams":
        """Same electrical geometry at another frequency."""
        s = self.f / f
        return replace(self, f=f, l=self.l * s, rho=self.rho * s)


@dataclass(frozen=True)
class Direction:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not -math.pi <= self.phi <= math.pi:
            raise ValueError(f"phi must lie in [-pi, pi], got {self.phi}")

    @property
    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


ENDFIRE = Direction(math.pi / 2, 0.0)


def sin_cos_integrals(x):
    """Sine and cosine integrals Si(x), Ci(x) for x >= 0.

    Ci(0) is returned as ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("sine/cosine integrals are only defined here for x >= 0")
    si, ci = sici(x)
    if x.ndim == 0:
        return float(si), float(ci)
    return si, ci


def _expint_seg(k, x):
    # antiderivative of exp(-j k x)/x in x > 0: Ci(kx) - j Si(kx)
    si, ci = sici(k * x)
    return ci - 1j * si


def _coupling_max_ref(d, k, h, eta):
    """Mutual impedance of side-by-side dipoles, referenced to current maxima.

    Closed form of the induced-EMF integral for two equal filaments of
    half-length ``h`` at separation ``d`` (array-valued, d > 0).  Each term
    exp(-jkR)/R * exp(-+jkz) integrates exactly to differences of
    Ci - j Si under the substitution t = R +- (z - z0).
    """
    d = np.asarray(d, dtype=float)
    d2 = d * d
    ekh = np.exp(1j * k * h)
    total = np.zeros(d.shape, dtype=complex)
    for z0, coef in ((h, 1.0), (-h, 1.0), (0.0, -2.0 * math.cos(k * h))):
        ua, ub = -z0, h - z0
        Ra, Rb = np.sqrt(d2 + ua * ua), np.sqrt(d2 + ub * ub)
        # t = R + u and s = R - u, evaluated without cancellation
        ta = Ra + ua if ua >= 0 else d2 / (Ra - ua)
        tb = Rb + ub if ub >= 0 else d2 / (Rb - ub)
        sa = Ra - ua if ua <= 0 else d2 / (Ra + ua)
        sb = Rb - ub if ub <= 0 else d2 / (Rb + ub)
        j_plus = np.exp(-1j * k * z0) * (_expint_seg(k, tb) - _expint_seg(k, ta))
        j_minus = np.exp(1j * k * z0) * (_expint_seg(k, sa) - _expint_seg(k, sb))
        total += coef * (ekh * j_plus - np.conj(ekh) * j_minus)
    return eta / (4 * math.pi) * total


def _check_reference(p: ModelParams) -> float:
    s = math.sin(p.k * p.l / 2)
    if abs(s) < 1e-9:
        raise ValueError("dipole length is a multiple of one wavelength; input current vanishes")
    return s * s


def mutual_impedance(d, p: ModelParams):
    """Mutual impedance between two parallel side-by-side dipoles.

    Parameters
    ----------
    d : float or array_like
        Center-to-center separation [m], strictly positive.
    p : ModelParams

    Returns
    -------
    complex or ndarray of complex
        Impedance in ohms, referenced to the input currents.
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0)):
        raise ValueError("separation must be positive; use self_impedance for d = 0")
    s2 = _check_reference(p)
    z = _coupling_max_ref(d_arr, p.k, p.l / 2, p.eta) / s2
    return complex(z) if z.ndim == 0 else z


def mutual_impedance_quadrature(d: float, p: ModelParams, rtol: float = 1e-11) -> complex:
    """Mutual impedance by adaptive quadrature of the induced-EMF integral.

    Slow reference path, independent of the Si/Ci closed form.
    """
    if not d > 0:
        raise ValueError("separation must be positive")
    k, h, eta = p.k, p.l / 2, p.eta
    ckh = math.cos(k * h)

    def kernel(z):
        r1 = math.hypot(d, z - h)
        r2 = math.hypot(d, z + h)
        r = math.hypot(d, z)
        g = (
            np.exp(-1j * k * r1) / r1
            + np.exp(-1j * k * r2) / r2
            - 2 * ckh * np.exp(-1j * k * r) / r
        )
        return 1j * eta / (4 * math.pi) * g * math.sin(k * (h - abs(z)))

    opts = dict(limit=400, epsabs=0.0, epsrel=rtol)
    # even integrand: integrate one half and double it
    re = integrate.quad(lambda z: kernel(z).real, 0.0, h, **opts)[0]
    im = integrate.quad(lambda z: kernel(z).imag, 0.0, h, **opts)[0]
    return 2 * complex(re, im) / _check_reference(p)


def self_resistance(p: ModelParams) -> float:
    """Radiation resistance of an isolated dipole at its input terminals."""
    kl = p.k * p.l
    si1, ci1 = sici(kl)
    si2, ci2 = sici(2 * kl)
    g = np.euler_gamma
    r_max = (p.eta / (2 * math.pi)) * (
        g
        + math.log(kl)
        - ci1
        + 0.5 * math.sin(kl) * (si2 - 2 * si1)
        + 0.5 * math.cos(kl) * (g + math.log(kl / 2) + ci2 - 2 * ci1)
    )
    return float(r_max / _check_reference(p))


def self_impedance(p: ModelParams) -> complex:
    """Induced-EMF driving-point impedance of an isolated center-fed dipole.

    The resistance is that of a filament; the radius enters only through the
    reactance, evaluated as the coupling to a filament one radius away.
    """
    x = _coupling_max_ref(np.asarray(p.rho), p.k, p.l / 2, p.eta).imag
    return complex(self_resistance(p), float(x) / _check_reference(p))


def _diagonal_impedance(p: ModelParams) -> complex:
    z = self_impedance(p)
    if p.self_reactance == "resonant":
        return complex(z.real, 0.0)
    return z


def impedance_between(positions, p: ModelParams) -> np.ndarray:
    """Lossless coupling matrix for parallel dipoles at the given x positions."""
    x = np.asarray(positions, dtype=float)
    sep = np.abs(x[:, None] - x[None, :])
    off = ~np.eye(x.size, dtype=bool)
    if np.any(sep[off] <= 0):
        raise ValueError("element positions must be distinct")
    Z = np.empty(sep.shape, dtype=complex)
    iu = np.triu_indices(x.size, 1)
    if iu[0].size:
        zu = mutual_impedance(sep[iu], p)
        Z[iu] = zu
        Z[iu[1], iu[0]] = zu
    np.fill_diagonal(Z, _diagonal_impedance(p))
    return Z


def loss_resistance(p: ModelParams) -> float:
    """Ohmic loss resistance referred to the input current.

    Uses the surface resistance sqrt(pi f mu / sigma) spread over the wire
    circumference and the sinusoidal current distribution.
    """
    if math.isinf(p.sigma_c):
        return 0.0
    s2 = _check_reference(p)
    k, h = p.k, p.l / 2
    rs = math.sqrt(math.pi * p.f * p.mu / p.sigma_c)
    # integral over the wire of sin^2(k(h - |z|)) dz
    line = h - math.sin(2 * k * h) / (2 * k)
    return rs / (2 * math.pi * p.rho) * line / s2


def element_factor(theta, p: ModelParams):
    """Pattern of one dipole along theta-hat, ``(cos(kh cos t) - cos(kh)) / sin t``."""
    th = np.asarray(theta, dtype=float)
    kh = p.k * p.l / 2
    st = np.sin(th)
    small = np.abs(st) < 1e-9
    safe = np.where(small, 1.0, st)
    F = np.where(small, 0.0, (np.cos(kh * np.cos(th)) - math.cos(kh)) / safe)
    return float(F) if F.ndim == 0 else F


def array_response(direction: Direction, positions, p: ModelParams) -> np.ndarray:
    """Far-field response vector ``exp(-j k d_n sin(theta) cos(phi))``."""
    x = np.asarray(positions, dtype=float)
    u = math.sin(direction.theta) * math.cos(direction.phi)
    return np.exp(-1j * p.k * x * u)


def far_field(direction: Direction, r: float, positions, currents, p: ModelParams) -> complex:
    """Theta-component of the far electric field [V/m] at distance ``r``."""
    if not r > 0:
        raise ValueError("observation distance must be positive")
    i = np.asarray(currents, dtype=complex)
    a = array_response(direction, positions, p)
    F = element_factor(direction.theta, p) / math.sin(p.k * p.l / 2)
    return complex(
        1j * p.eta * np.exp(-1j * p.k * r) / (2 * math.pi * r) * F * np.vdot(a, i)
    )
