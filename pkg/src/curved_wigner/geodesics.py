"""Schwarzschild orbits: conserved quantities, circular orbits, radial infall, integration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry as geo
from .errors import DomainError, IntegrationFailure, NoCircularOrbit, PhotonSphereError
from .geometry import ChartPoint, SchwarzschildMetric


@dataclass(frozen=True)
class OrbitConstants:
    e: float
    l: float
    Omega: float
    OmegaPrime: float
    M: float = 1.0
    R: float = float("nan")

    def velocity(self) -> np.ndarray:
        """Contravariant 4-velocity of the circular orbit."""
        return np.array([self.Omega / self.OmegaPrime, 0.0, 0.0, self.Omega**2 / self.OmegaPrime])

    @property
    def period(self) -> float:
        return 2 * np.pi / self.Omega

    @property
    def proper_period(self) -> float:
        return self.period * self.OmegaPrime / self.Omega


def circular_orbit_constants(M: float, R: float) -> OrbitConstants:
    if R <= 3 * M:
        raise PhotonSphereError(f"no circular orbit at R = {R} <= 3M")
    k = 1 - 3 * M / R
    Omega = np.sqrt(M / R**3)
    return OrbitConstants(
        e=(1 - 2 * M / R) / np.sqrt(k),
        l=np.sqrt(M * R) / np.sqrt(k),
        Omega=Omega,
        OmegaPrime=Omega * np.sqrt(k),
        M=M,
        R=R,
    )


@dataclass(frozen=True)
class EffectivePotential:
    M: float
    l: float
    radii: tuple          # (stable, unstable); equal for the marginal orbit
    isco: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        M, l = self.M, self.l
        return -M / r + l * l / (2 * r * r) - M * l * l / r**3

    def derivative(self, r):
        M, l = self.M, self.l
        return M / r**2 - l * l / r**3 + 3 * M * l * l / r**4


def effective_potential_extrema(M: float, l: float, rtol: float = 1e-12) -> EffectivePotential:
    if M <= 0 or l <= 0:
        raise DomainError("mass and angular momentum must be positive")
    q = (l / M) ** 2
    disc = 1 - 12 / q
    if disc < -rtol:
        raise NoCircularOrbit(f"(l/M)^2 = {q} < 12 admits no circular orbit")
    root = np.sqrt(max(disc, 0.0))
    if disc <= rtol:
        root = 0.0
    base = l * l / (2 * M)
    return EffectivePotential(M, l, (base * (1 + root), base * (1 - root)), 6 * M)


def specific_energy(e: float) -> float:
    return (e * e - 1) / 2


@dataclass(frozen=True)
class GeodesicState:
    x: ChartPoint
    u: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))


def radial_infall_velocity(M: float, r: float) -> np.ndarray:
    if r <= 2 * M:
        raise DomainError(f"r = {r} is not outside the horizon")
    return np.array([1 / (1 - 2 * M / r), -np.sqrt(2 * M / r), 0.0, 0.0])


def killing_constants(M: float, x: ChartPoint, u) -> tuple:
    """(e, l) = (f u^t, r^2 sin^2(theta) u^phi)."""
    f = 1 - 2 * M / x.r
    return f * u[0], (x.r * np.sin(x.theta)) ** 2 * u[3]


def radial_energy_residual(M: float, r: float, ur: float, e: float, l: float) -> float:
    V = EffectivePotential(M, l, (np.nan, np.nan), 6 * M) if l > 0 else None
    pot = V(r) if V is not None else -M / r
    return float(0.5 * ur * ur + pot - specific_energy(e))


@dataclass(frozen=True)
class GeodesicTrajectory:
    tau: np.ndarray
    points: np.ndarray
    velocities: np.ndarray


def integrate_geodesic(field, init: GeodesicState, tau_span, samples: Optional[Sequence[float]] = None,
                       rtol: float = 1e-12, atol: float = 1e-12) -> GeodesicTrajectory:
    """Integrate du^a/dtau = -Gamma^a_{mn} u^m u^n with an 8(5,3) Runge-Kutta scheme."""
    def rhs(tau, y):
        x = ChartPoint(y[:4])
        u = y[4:]
        G = geo.christoffel(field, x).gamma
        return np.concatenate([u, -np.einsum("amn,m,n->a", G, u, u)])

    y0 = np.concatenate([init.x.array, init.u])
    t0, t1 = tau_span
    t_eval = np.asarray(samples) if samples is not None else np.array([t0, t1])
    if t1 == t0:
        return GeodesicTrajectory(np.array([t0]), y0[None, :4], y0[None, 4:])
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(sol.message)
    return GeodesicTrajectory(sol.t, sol.y[:4].T, sol.y[4:].T)


def geodesic_residual(field, x: ChartPoint, u, du_dtau) -> float:
    G = geo.christoffel(field, x).gamma
    return float(np.max(np.abs(du_dtau + np.einsum("amn,m,n->a", G, u, u))))


def action_phase(constants: OrbitConstants, x: ChartPoint) -> float:
    return -(constants.e * x.t + constants.l * x.phi)


def hamilton_jacobi_residual(field, x: ChartPoint, p_lower, m: float = 1.0) -> float:
    gi = np.linalg.inv(field.components(x))
    p = np.asarray(p_lower)
    return float(p @ gi @ p - m * m)
