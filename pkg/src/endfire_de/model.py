"""Coupling matrices and performance figures for driven and parasitic arrays."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .em import (
    ENDFIRE,
    Direction,
    ModelParams,
    array_response,
    element_factor,
    far_field,
    impedance_between,
    loss_resistance,
)

__all__ = [
    "InfeasibleDesign",
    "ArrayLayout",
    "ExcitationState",
    "CouplingMatrices",
    "PerformanceReport",
    "z_to_s",
    "s_to_z",
    "assemble_active",
    "assemble_parasitic",
    "optimal_excitation",
    "driving_impedances",
    "solve_parasitic_currents",
    "loads_from_active",
    "gain",
    "radiation_efficiency",
    "combined_reflection",
    "parasitic_reflection",
    "evaluate",
    "directivity_oracle",
    "to_db",
]


class InfeasibleDesign(ValueError):
    """Candidate has no physical operating point (e.g. negative input resistance)."""


def to_db(x):
    with np.errstate(divide="ignore"):
        return 10 * np.log10(x)


@dataclass(frozen=True, eq=False)
class ArrayLayout:
    """Element positions along the x-axis [m], strictly increasing."""

    positions: np.ndarray

    def __post_init__(self):
        x = np.array(self.positions, dtype=float).reshape(-1)
        if x.size < 1:
            raise ValueError("layout needs at least one element")
        if not np.all(np.isfinite(x)):
            raise ValueError("positions must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("positions must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @classmethod
    def from_wavelengths(cls, positions, p: ModelParams) -> "ArrayLayout":
        return cls(np.asarray(positions, dtype=float) * p.lam)

    @classmethod
    def from_gaps(cls, gaps, p: Optional[ModelParams] = None) -> "ArrayLayout":
        """Cumulative layout starting at the origin; gaps in wavelengths if ``p`` is given."""
        g = np.asarray(gaps, dtype=float)
        if p is not None:
            g = g * p.lam
        return cls(np.concatenate([[0.0], np.cumsum(g)]))

    @property
    def N(self) -> int:
        return self.positions.size

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.positions)

    @property
    def size(self) -> float:
        return float(self.positions[-1] - self.positions[0])

    def in_wavelengths(self, p: ModelParams) -> np.ndarray:
        return self.positions / p.lam

    def __repr__(self):
        return f"ArrayLayout({np.array2string(self.positions, precision=5)})"


@dataclass(frozen=True, eq=False)
class CouplingMatrices:
    """Impedance and scattering description of an array at one frequency.

    ``Z_total`` includes ohmic loss on every element and, for a parasitic
    array, the reactive loads on the diagonal.
    """

    Z_lossless: np.ndarray
    Z_total: np.ndarray
    S: np.ndarray
    R_loss: float
    Z0: float
    feed: Optional[int] = None
    loads: Optional[np.ndarray] = None

    @property
    def N(self) -> int:
        return self.Z_total.shape[0]

    @property
    def parasitic(self) -> bool:
        return self.feed is not None


@dataclass(frozen=True, eq=False)
class ExcitationState:
    mode: str
    currents: np.ndarray
    voltages: np.ndarray
    feed_index: Optional[int] = None
    loads: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class PerformanceReport:
    """Figures of merit in one direction.  Gains and directivity are linear."""

    direction: Direction
    mode: str
    feasible: bool
    directivity: float = float("nan")
    gain: float = float("nan")
    realized_gain: float = 0.0
    e_cd: float = float("nan")
    e_r: float = float("nan")
    driving_impedances: np.ndarray = field(default_factory=lambda: np.array([], complex))
    currents: np.ndarray = field(default_factory=lambda: np.array([], complex))
    reflection: np.ndarray = field(default_factory=lambda: np.array([], complex))
    P_rad: float = float("nan")
    P_loss: float = float("nan")
    P_in: float = float("nan")
    reason: str = ""

    @property
    def e_t(self) -> float:
        return self.e_cd * self.e_r

    @property
    def directivity_dbi(self) -> float:
        return float(to_db(self.directivity))

    @property
    def gain_dbi(self) -> float:
        return float(to_db(self.gain))

    @property
    def realized_gain_db(self) -> float:
        return float(to_db(self.realized_gain)) if self.feasible else -math.inf


def z_to_s(Z: np.ndarray, Z0: float) -> np.ndarray:
    """Scattering matrix for a common real reference impedance."""
    eye = np.eye(Z.shape[0])
    # S = (Z - Z0 I)(Z + Z0 I)^-1, computed as a solve on the transpose
    return np.linalg.solve((Z + Z0 * eye).T, (Z - Z0 * eye).T).T


def s_to_z(S: np.ndarray, Z0: float) -> np.ndarray:
    eye = np.eye(S.shape[0])
    return Z0 * np.linalg.solve((eye - S).T, (eye + S).T).T


def _finish(Zl, p, feed=None, loads=None) -> CouplingMatrices:
    rl = loss_resistance(p)
    Z = Zl + rl * np.eye(Zl.shape[0])
    if loads is not None:
        Z = Z + np.diag(1j * np.nan_to_num(loads))
    try:
        S = z_to_s(Z, p.Z0)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("Z + Z0 I is singular") from exc
    for a in (Zl, Z, S):
        a.setflags(write=False)
    return CouplingMatrices(Zl, Z, S, rl, p.Z0, feed, loads)


def assemble_active(layout: ArrayLayout, p: ModelParams) -> CouplingMatrices:
    return _finish(impedance_between(layout.positions, p), p)


def _normalize_loads(loads, N: int, feed: int) -> np.ndarray:
    x = np.asarray(loads, dtype=float).reshape(-1)
    if x.size == N - 1:
        return np.insert(x, feed, np.nan)
    if x.size != N:
        raise ValueError(f"expected {N - 1} loads (or {N} with NaN at the feed), got {x.size}")
    if not np.isnan(x[feed]):
        raise ValueError(f"port {feed} is the feed and cannot carry a load")
    if np.any(np.isnan(np.delete(x, feed))):
        raise ValueError("every non-feed port needs a load reactance")
    return x.copy()


def assemble_parasitic(
    layout: ArrayLayout,
    feed: int,
    loads,
    p: ModelParams,
    Z_lossless: Optional[np.ndarray] = None,
) -> CouplingMatrices:
    """Coupling matrices with reactances ``X_n`` (ohm) on every port except ``feed``.

    ``loads`` is either the N-1 reactances of the non-feed ports in order, or
    a length-N vector holding NaN at the feed.  A precomputed lossless matrix
    for the same layout may be passed as ``Z_lossless``.
    """
    N = layout.N
    if not 0 <= feed < N:
        raise ValueError(f"feed index {feed} out of range for {N} elements")
    x = _normalize_loads(loads, N, feed)
    x.setflags(write=False)
    if Z_lossless is None:
        Z_lossless = impedance_between(layout.positions, p)
    return _finish(Z_lossless, p, feed=feed, loads=x)


def optimal_excitation(
    cm: CouplingMatrices,
    direction: Direction,
    layout: ArrayLayout,
    p: ModelParams,
) -> np.ndarray:
    """Currents maximizing gain toward ``direction`` at total input power N*P_t/2.

    Raises
    ------
    InfeasibleDesign
        If the real part of the impedance matrix is not positive definite.
    """
    R = cm.Z_total.real
    R = 0.5 * (R + R.T)
    try:
        L = np.linalg.cholesky(R)
    except np.linalg.LinAlgError as exc:
        raise InfeasibleDesign("Re{Z} is not positive definite") from exc
    a = array_response(direction, layout.positions, p)
    w = np.linalg.solve(L.T, np.linalg.solve(L, a))
    scale = math.sqrt(layout.N * p.P_t / np.vdot(a, w).real)
    return scale * w


def driving_impedances(cm: CouplingMatrices, currents) -> np.ndarray:
    """Active input impedance of every port; NaN where the port current is zero."""
    i = np.asarray(currents, dtype=complex)
    v = cm.Z_total @ i
    out = np.full(i.shape, np.nan + 1j * np.nan, dtype=complex)
    nz = i != 0
    out[nz] = v[nz] / i[nz]
    return out


def solve_parasitic_currents(cm: CouplingMatrices, feed: Optional[int] = None) -> ExcitationState:
    """Unit current at ``feed``; every other port sees zero terminal voltage."""
    if feed is None:
        feed = cm.feed
    if feed is None:
        raise ValueError("no feed port given")
    N = cm.N
    i = np.zeros(N, dtype=complex)
    i[feed] = 1.0
    passive = np.array([n for n in range(N) if n != feed], dtype=int)
    Z = cm.Z_total
    if passive.size:
        try:
            i[passive] = -np.linalg.solve(Z[np.ix_(passive, passive)], Z[passive, feed])
        except np.linalg.LinAlgError as exc:
            raise InfeasibleDesign("passive sub-network is singular") from exc
    v = Z @ i
    return ExcitationState("parasitic", i, v, feed, cm.loads)


def loads_from_active(Z_act, feed: int) -> np.ndarray:
    """Reactances cancelling the active input reactance of each non-feed port.

    Returns a length-N vector with NaN at the feed.
    """
    z = np.asarray(Z_act, dtype=complex)
    X = -z.imag.astype(float)
    X[feed] = np.nan
    return X


def _quad(i, M) -> float:
    return float(np.vdot(i, M @ i).real)


def gain(
    direction: Direction,
    layout: ArrayLayout,
    currents,
    cm: CouplingMatrices,
    p: ModelParams,
) -> float:
    i = np.asarray(currents, dtype=complex)
    den = _quad(i, cm.Z_total.real)
    if not den > 0:
        raise ValueError("input power must be positive (zero or non-physical currents)")
    a = array_response(direction, layout.positions, p)
    F = element_factor(direction.theta, p) / math.sin(p.k * p.l / 2)
    return p.eta / math.pi * F * F * abs(np.vdot(a, i)) ** 2 / den


def radiation_efficiency(currents, cm: CouplingMatrices) -> float:
    i = np.asarray(currents, dtype=complex)
    return _quad(i, cm.Z_lossless.real) / _quad(i, cm.Z_total.real)


def combined_reflection(
    S: np.ndarray,
    currents,
    *,
    include_self: bool = True,
    weighting: str = "current",
    Z: Optional[np.ndarray] = None,
):
    """Per-port active reflection coefficients and the aggregate efficiency.

    With ``include_self`` the coefficient of port n is (S i)_n / i_n;
    otherwise the S_nn term is left out of the sum.  ``weighting`` selects how
    per-port efficiencies 1 - |Gamma_n|^2 are averaged: by |i_n|^2
    ("current"), by accepted port power Re{v_n conj(i_n)} ("power", needs
    ``Z``) or uniformly.

    Returns
    -------
    gamma : ndarray of complex
    e_r : float
    """
    i = np.asarray(currents, dtype=complex)
    if np.any(i == 0):
        raise ValueError("every port current must be nonzero")
    Sx = S if include_self else S - np.diag(np.diag(S))
    gamma = (Sx @ i) / i
    ern = 1.0 - np.abs(gamma) ** 2
    if weighting == "current":
        w = np.abs(i) ** 2
    elif weighting == "power":
        if Z is None:
            raise ValueError("power weighting needs the impedance matrix")
        w = 0.5 * (np.conj(i) * (Z @ i)).real
    elif weighting == "uniform":
        w = np.ones(i.size)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return gamma, float(np.sum(ern * w) / np.sum(w))


def parasitic_reflection(Z_in: complex, p: ModelParams) -> float:
    if not Z_in.real > 0:
        raise InfeasibleDesign(f"input resistance {Z_in.real:.4g} ohm is not positive")
    g = (Z_in - p.Z0) / (Z_in + p.Z0)
    return 1.0 - abs(g) ** 2


def _report(direction, mode, layout, i, cm, p, e_r, gamma) -> PerformanceReport:
    P_rad = 0.5 * _quad(i, cm.Z_lossless.real)
    P_in = 0.5 * _quad(i, cm.Z_total.real)
    G = gain(direction, layout, i, cm, p)
    e_cd = P_rad / P_in
    return PerformanceReport(
        direction=direction,
        mode=mode,
        feasible=True,
        directivity=G / e_cd,
        gain=G,
        realized_gain=e_r * G,
        e_cd=e_cd,
        e_r=e_r,
        driving_impedances=driving_impedances(cm, i),
        currents=i,
        reflection=gamma,
        P_rad=P_rad,
        P_loss=P_in - P_rad,
        P_in=P_in,
    )


def _infeasible(direction, mode, reason, i=None, zact=None) -> PerformanceReport:
    return PerformanceReport(
        direction=direction,
        mode=mode,
        feasible=False,
        reason=reason,
        currents=np.array([], complex) if i is None else i,
        driving_impedances=np.array([], complex) if zact is None else zact,
    )


def evaluate(
    layout: ArrayLayout,
    p: ModelParams,
    mode: str = "active",
    *,
    direction: Direction = ENDFIRE,
    currents: Optional[Sequence[complex]] = None,
    feed: Optional[int] = None,
    loads=None,
    cm: Optional[CouplingMatrices] = None,
) -> PerformanceReport:
    """Full analysis of one design.

    Active mode drives every port, with the gain-optimal currents toward
    ``direction`` unless ``currents`` are given.  Parasitic mode drives
    ``feed`` with 1 A and terminates the other ports in ``loads``.

    Constraint violations (negative input resistance, singular networks) come
    back as a report with ``feasible=False`` rather than an exception.
    """
    if mode == "active":
        if cm is None:
            cm = assemble_active(layout, p)
        if currents is None:
            try:
                i = optimal_excitation(cm, direction, layout, p)
            except InfeasibleDesign as exc:
                return _infeasible(direction, mode, str(exc))
        else:
            i = np.asarray(currents, dtype=complex)
            if i.shape != (layout.N,):
                raise ValueError(f"expected {layout.N} currents, got shape {i.shape}")
        zact = driving_impedances(cm, i)
        if np.any(np.isnan(zact)) or np.any(zact.real <= 0):
            return _infeasible(direction, mode, "active input resistance not positive", i, zact)
        gamma, e_r = combined_reflection(
            cm.S,
            i,
            include_self=p.active_reflection == "standard",
            weighting=p.reflection_weighting,
            Z=cm.Z_total,
        )
        return _report(direction, mode, layout, i, cm, p, e_r, gamma)

    if mode == "parasitic":
        if cm is None:
            if feed is None or loads is None:
                raise ValueError("parasitic mode needs feed and loads")
            cm = assemble_parasitic(layout, feed, loads, p)
        try:
            st = solve_parasitic_currents(cm)
            zin = complex(st.voltages[cm.feed] / st.currents[cm.feed])
            e_r = parasitic_reflection(zin, p)
        except InfeasibleDesign as exc:
            return _infeasible(direction, mode, str(exc))
        g = (zin - p.Z0) / (zin + p.Z0)
        gamma = np.full(cm.N, np.nan + 0j)
        gamma[cm.feed] = g
        return _report(direction, mode, layout, st.currents, cm, p, e_r, gamma)

    raise ValueError(f"unknown mode {mode!r}")


def gain_pattern(theta, phi, layout: ArrayLayout, currents, cm: CouplingMatrices, p: ModelParams):
    """Gain (linear) on a broadcastable grid of angles."""
    th, ph = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    i = np.asarray(currents, dtype=complex)
    u = np.sin(th) * np.cos(ph)
    af = np.exp(1j * p.k * u[..., None] * layout.positions) @ i
    F = element_factor(th, p) / math.sin(p.k * p.l / 2)
    return p.eta / math.pi * F**2 * np.abs(af) ** 2 / _quad(i, cm.Z_total.real)


def directivity_oracle(
    layout: ArrayLayout,
    currents,
    p: ModelParams,
    direction: Direction = ENDFIRE,
    n_theta: int = 96,
    n_phi: int = 192,
    rtol: float = 1e-6,
) -> float:
    """Directivity from the far field integrated over the sphere.

    Gauss-Legendre in cos(theta), trapezoid in phi.  The grid is doubled once
    and the two radiated powers must agree to ``rtol``.
    """
    r = 1.0
    i = np.asarray(currents, dtype=complex)

    def radiated(nt, nph):
        x, w = np.polynomial.legendre.leggauss(nt)
        th = np.arccos(x)
        ph = np.linspace(-math.pi, math.pi, nph, endpoint=False)
        T, P = np.meshgrid(th, ph, indexing="ij")
        u = np.sin(T) * np.cos(P)
        af = np.exp(1j * p.k * u[..., None] * layout.positions) @ i
        F = element_factor(T, p) / math.sin(p.k * p.l / 2)
        E = p.eta / (2 * math.pi * r) * F * af
        U = np.abs(E) ** 2 * r * r / (2 * p.eta)
        return float(np.sum(w[:, None] * U) * (2 * math.pi / nph))

    P1 = radiated(n_theta, n_phi)
    P2 = radiated(2 * n_theta, 2 * n_phi)
    if abs(P1 - P2) > rtol * abs(P2):
        raise ArithmeticError(f"sphere quadrature not converged ({P1} vs {P2})")
    E0 = far_field(direction, r, layout.positions, i, p)
    U0 = abs(E0) ** 2 * r * r / (2 * p.eta)
    return 4 * math.pi * U0 / P2
