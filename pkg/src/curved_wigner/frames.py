"""Orthonormal tetrads, spin connection, frame rotation rates and transport."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry as geo
from .errors import (DomainError, FrameMismatch, IntegrationFailure,
                     PhotonSphereError, SingularTetrad)
from .geometry import ETA, ChartPoint, SchwarzschildMetric


@dataclass(frozen=True)
class FourVector:
    components: np.ndarray
    base_point: ChartPoint
    variance: str = "upper"   # upper | lower
    frame: str = "world"      # world | local

    def __post_init__(self):
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))


@dataclass(frozen=True)
class Tetrad:
    """Row a holds the world components e_a^mu of frame vector a."""
    e: np.ndarray
    base_point: ChartPoint

    def __post_init__(self):
        object.__setattr__(self, "e", np.asarray(self.e, dtype=float))

    @property
    def inverse(self) -> np.ndarray:
        """inverse[mu, a], so that e @ inverse = I."""
        if abs(np.linalg.det(self.e)) < 1e-10:
            raise SingularTetrad("tetrad matrix is not invertible")
        return np.linalg.inv(self.e)

    @property
    def inverse_T(self) -> np.ndarray:
        """inverse_T[a, mu]: the co-frame, V^a = inverse_T[a, mu] V^mu."""
        return self.inverse.T

    def orthonormality_residual(self, metric_field) -> float:
        g = metric_field.components(self.base_point)
        return float(np.max(np.abs(self.e @ g @ self.e.T - ETA)))


def _same_point(a: ChartPoint, b: ChartPoint, tol=1e-12):
    return a.chart_id == b.chart_id and np.allclose(a.coords, b.coords, rtol=0, atol=tol)


def project_to_frame(V: FourVector, tet: Tetrad, metric_field=None) -> FourVector:
    if not _same_point(V.base_point, tet.base_point):
        raise FrameMismatch("vector and tetrad sit at different points")
    if V.frame == "local":
        return V
    comp = V.components
    if V.variance == "lower":
        # V_a = e_a^mu V_mu; return the upper local components
        comp = ETA @ (tet.e @ comp)
    else:
        comp = tet.inverse_T @ comp
    return FourVector(comp, V.base_point, "upper", "local")


def to_world(V: FourVector, tet: Tetrad) -> FourVector:
    if not _same_point(V.base_point, tet.base_point):
        raise FrameMismatch("vector and tetrad sit at different points")
    if V.frame == "world":
        return V
    comp = V.components if V.variance == "upper" else ETA @ V.components
    return FourVector(tet.e.T @ comp, V.base_point, "upper", "world")


# ---------------------------------------------------------------- frame fields

def _circular_frequencies(M, R):
    if R <= 3 * M:
        raise PhotonSphereError(f"R = {R} is inside or on the photon sphere 3M = {3 * M}")
    return np.sqrt(M / R**3)


@dataclass(frozen=True)
class CircularFrame:
    """Freely falling frame co-moving with the circular orbit r = R.

    The orbital frequency is frozen at its r = R value while the local
    frequency is evaluated at the field point, so the field is orthonormal
    everywhere on the equatorial slice and its local frequency is stationary
    in r at R.
    """
    M: float
    R: float

    def __post_init__(self):
        _circular_frequencies(self.M, self.R)

    @property
    def Omega(self):
        return np.sqrt(self.M / self.R**3)

    def local_frequency(self, r):
        W = self.Omega
        arg = 1 - 2 * self.M / r - (r * W) ** 2
        if arg <= 0:
            raise DomainError(f"co-rotating frame is not timelike at r = {r}")
        return W * np.sqrt(arg)

    def velocity(self, x: ChartPoint) -> np.ndarray:
        W = self.Omega
        Wp = self.local_frequency(x.r)
        return np.array([W / Wp, 0.0, 0.0, W**2 / Wp])

    def matrix(self, x: ChartPoint) -> np.ndarray:
        t, r = x.t, x.r
        M, W = self.M, self.Omega
        Wp = self.local_frequency(r)
        sf = np.sqrt(1 - 2 * M / r)
        c, s = np.cos(Wp * t), np.sin(Wp * t)
        return np.array([
            [W / Wp, 0.0, 0.0, W**2 / Wp],
            [-r * W**2 * s / (sf * Wp), sf * c, 0.0, -sf * W * s / (r * Wp)],
            [0.0, 0.0, 1 / r, 0.0],
            [r * W**2 * c / (sf * Wp), sf * s, 0.0, sf * W * c / (r * Wp)],
        ])

    def __call__(self, x: ChartPoint) -> Tetrad:
        return Tetrad(self.matrix(x), x)


@dataclass(frozen=True)
class RadialFrame:
    """Freely falling frame of a particle dropped from rest at infinity."""
    M: float

    def velocity(self, x: ChartPoint) -> np.ndarray:
        f = 1 - 2 * self.M / x.r
        return np.array([1 / f, -np.sqrt(2 * self.M / x.r), 0.0, 0.0])

    def matrix(self, x: ChartPoint) -> np.ndarray:
        r, M = x.r, self.M
        if r <= 2 * M:
            raise DomainError(f"r = {r} is not outside the horizon")
        f = 1 - 2 * M / r
        b = np.sqrt(2 * M / r)
        return np.array([
            [1 / f, -b, 0.0, 0.0],
            [-b / f, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1 / r, 0.0],
            [0.0, 0.0, 0.0, 1 / (r * np.sin(x.theta))],
        ])

    def __call__(self, x: ChartPoint) -> Tetrad:
        return Tetrad(self.matrix(x), x)


@dataclass(frozen=True)
class StaticFrame:
    M: float

    def matrix(self, x: ChartPoint) -> np.ndarray:
        r, M = x.r, self.M
        if r <= 2 * M:
            raise DomainError(f"r = {r} is not outside the horizon")
        f = 1 - 2 * M / r
        return np.diag([1 / np.sqrt(f), np.sqrt(f), 1 / r, 1 / (r * np.sin(x.theta))])

    def __call__(self, x: ChartPoint) -> Tetrad:
        return Tetrad(self.matrix(x), x)


@dataclass(frozen=True)
class CorrectedRadialFrame:
    """Radial freely falling frame with the first-order spin deflection of strength eps.

    Orthonormal only up to terms quadratic in eps. The default variant uses
    -(r - M) n_z b in the phi row's r slot, mirroring the theta row; this keeps
    orthonormality and transport at O(eps^2). variant="printed" uses +n_z b.
    """
    M: float
    zeta: float = 0.0
    phi: float = 0.0
    eps: float = 1.0
    variant: str = "consistent"

    def matrix(self, x: ChartPoint) -> np.ndarray:
        r, M, e = x.r, self.M, self.eps
        base = RadialFrame(M).matrix(x)
        f = 1 - 2 * M / r
        ny = np.sin(self.zeta) * np.sin(self.phi)
        nz = np.cos(self.zeta)
        a = 1 / (4 * M * r**2)
        b = 1 / np.sqrt(8 * M**3 * r**3)
        c = 1 / (4 * M * r * f)
        corr = np.array([
            [0.0, 0.0, -ny * a, -nz * a],
            [0.0, 0.0, ny * b, nz * b],
            [ny * c, -(r - M) * ny * b, 0.0, 0.0],
            [nz * c, (nz * b if self.variant == "printed" else -(r - M) * nz * b), 0.0, 0.0],
        ])
        return base + e * corr

    def velocity(self, x: ChartPoint) -> np.ndarray:
        return self.matrix(x)[0]

    def __call__(self, x: ChartPoint) -> Tetrad:
        return Tetrad(self.matrix(x), x)


def analytic_tetrad(kind: str, x: ChartPoint, **params) -> Tetrad:
    M = params.get("M", 1.0)
    if kind == "circular-FFF":
        R = params.get("R", x.r)
        return CircularFrame(M, R)(x)
    if kind == "radial-FFF":
        return RadialFrame(M)(x)
    if kind == "static":
        return StaticFrame(M)(x)
    if kind == "corrected-radial":
        return CorrectedRadialFrame(M, params.get("zeta", 0.0), params.get("phi", 0.0),
                                    params.get("eps", 1.0), params.get("variant", "consistent"))(x)
    raise ValueError(f"unknown tetrad kind {kind!r}")


# ---------------------------------------------------------------- spin connection

@dataclass(frozen=True)
class SpinConnectionValue:
    """omega[mu, a, b] = omega_mu^a_b (first frame index up)."""
    omega: np.ndarray

    def lowered(self) -> np.ndarray:
        """omega_{mu a b}, first frame index lowered with eta."""
        return np.einsum("ac,mcb->mab", ETA, self.omega)

    def antisymmetry_residual(self) -> float:
        low = self.lowered()
        return float(np.max(np.abs(low + low.transpose(0, 2, 1))))


def _frame_matrix(frame_field, x):
    out = frame_field(x)
    return out.e if isinstance(out, Tetrad) else np.asarray(out)


def frame_derivatives(frame_field, x: ChartPoint, rel=1e-5, order=2) -> np.ndarray:
    """de[k, b, nu] = d_k e_b^nu by central differences."""
    return geo.gradient(lambda y: _frame_matrix(frame_field, y), x, rel=rel, order=order)


def covariant_frame_derivative(frame_field, metric_field, x: ChartPoint, rel=1e-5, order=2) -> np.ndarray:
    """nabla[mu, b, nu] = d_mu e_b^nu + Gamma^nu_{mu l} e_b^l."""
    e = _frame_matrix(frame_field, x)
    G = geo.christoffel(metric_field, x).gamma
    return frame_derivatives(frame_field, x, rel, order) + np.einsum("nml,bl->mbn", G, e)


def spin_connection(frame_field, x: ChartPoint, metric_field=None, rel=1e-5, order=2) -> SpinConnectionValue:
    """omega_mu^a_b = E^a_nu nabla_mu e_b^nu, with E the co-frame."""
    if metric_field is None:
        metric_field = SchwarzschildMetric(frame_field.M)
    tet = Tetrad(_frame_matrix(frame_field, x), x)
    nab = covariant_frame_derivative(frame_field, metric_field, x, rel, order)
    return SpinConnectionValue(np.einsum("an,mbn->mab", tet.inverse_T, nab))


def frame_curvature(frame_field, x: ChartPoint, metric_field=None, rel=1e-4) -> np.ndarray:
    """F[mu, nu, a, b] = d_mu w_nu - d_nu w_mu + [w_mu, w_nu], as matrices in (a, b).

    Both the connection and its derivative use the 5-point stencil.
    """
    def omega_at(y):
        return spin_connection(frame_field, y, metric_field, rel=rel, order=4).omega
    W = omega_at(x)
    dW = geo.gradient(omega_at, x, rel=rel, order=4)
    comm = np.einsum("mac,ncb->mnab", W, W) - np.einsum("nac,mcb->mnab", W, W)
    return dW - dW.transpose(1, 0, 2, 3) + comm


def world_curvature_from_frame(frame_field, x: ChartPoint, metric_field=None, rel=1e-4) -> np.ndarray:
    """R_{mna}^b rebuilt from the frame curvature: e_c^b F_mn^c_d E^d_a."""
    F = frame_curvature(frame_field, x, metric_field, rel)
    tet = Tetrad(_frame_matrix(frame_field, x), x)
    return np.einsum("cb,mncd,da->mnab", tet.e, F, tet.inverse_T)


# ---------------------------------------------------------------- chi

@dataclass(frozen=True)
class ChiMatrix:
    """chi[a, b] = chi^a_b."""
    chi: np.ndarray

    def lowered(self) -> np.ndarray:
        return ETA @ self.chi

    def antisymmetry_residual(self) -> float:
        low = self.lowered()
        return float(np.max(np.abs(low + low.T)))


def chi_matrix(velocity, frame_field, x: ChartPoint, metric_field=None, rel=1e-5, order=2) -> ChiMatrix:
    u = velocity.components if isinstance(velocity, FourVector) else np.asarray(velocity, dtype=float)
    w = spin_connection(frame_field, x, metric_field, rel, order).omega
    return ChiMatrix(-np.einsum("n,nab->ab", u, w))


def chi_from_transport(e: np.ndarray, de_dtau: np.ndarray, G: np.ndarray, u: np.ndarray) -> ChiMatrix:
    """chi^a_b = -E^a_nu (de_b^nu/dtau + Gamma^nu_{ml} u^m e_b^l) along a curve."""
    E = np.linalg.inv(e).T
    nab = de_dtau + np.einsum("nml,m,bl->bn", G, u, e)
    return ChiMatrix(-E @ nab.T)


# ---------------------------------------------------------------- transport

@dataclass(frozen=True)
class TransportSpec:
    mode: str                                   # parallel | fermi-walker
    velocity_field: Callable[[ChartPoint], np.ndarray]
    tau_span: tuple
    acceleration_field: Optional[Callable[[ChartPoint], np.ndarray]] = None
    tolerance: float = 1e-10
    metric_field: object = None
    samples: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.mode not in ("parallel", "fermi-walker"):
            raise ValueError(f"unknown transport mode {self.mode!r}")
        if self.mode == "fermi-walker" and self.acceleration_field is None:
            raise ValueError("Fermi-Walker transport needs an acceleration field")


@dataclass(frozen=True)
class FrameTrajectory:
    tau: np.ndarray
    points: np.ndarray      # (n, 4) chart coordinates
    frames: np.ndarray      # (n, 4, 4) tetrad matrices
    spec: TransportSpec
    chart_id: str = "schwarzschild"

    def tetrad(self, i: int) -> Tetrad:
        return Tetrad(self.frames[i], ChartPoint(self.points[i], self.chart_id))

    def __len__(self):
        return len(self.tau)


def transport_rhs(spec: TransportSpec, metric_field):
    def rhs(tau, y):
        x = ChartPoint(y[:4])
        e = y[4:].reshape(4, 4)
        u = np.asarray(spec.velocity_field(x), dtype=float)
        G = geo.christoffel(metric_field, x).gamma
        de = -np.einsum("nml,m,bl->bn", G, u, e)
        if spec.mode == "fermi-walker":
            a = np.asarray(spec.acceleration_field(x), dtype=float)
            g = metric_field.components(x)
            eu = e @ g @ u
            ea = e @ g @ a
            de = de + np.outer(eu, a) - np.outer(ea, u)
        return np.concatenate([u, de.ravel()])
    return rhs


def transport_frame(spec: TransportSpec, initial: Tetrad) -> FrameTrajectory:
    metric_field = spec.metric_field or SchwarzschildMetric(getattr(spec, "M", 1.0))
    rhs = transport_rhs(spec, metric_field)
    y0 = np.concatenate([initial.base_point.array, initial.e.ravel()])
    t0, t1 = spec.tau_span
    t_eval = np.asarray(spec.samples) if spec.samples is not None else np.array([t0, t1])
    if t1 == t0:
        return FrameTrajectory(np.array([t0]), y0[None, :4], initial.e[None], spec,
                               initial.base_point.chart_id)
    try:
        sol = solve_ivp(rhs, (t0, t1), y0, method="RK45", t_eval=t_eval,
                        rtol=spec.tolerance, atol=spec.tolerance, dense_output=False)
    except DomainError:
        raise
    if not sol.success:
        raise IntegrationFailure(sol.message)
    ys = sol.y.T
    return FrameTrajectory(sol.t, ys[:, :4], ys[:, 4:].reshape(-1, 4, 4), spec,
                           initial.base_point.chart_id)


# ---------------------------------------------------------------- precession

def geodetic_precession(M: float, R: float, mode: str = "analytic", tolerance: float = 1e-10) -> float:
    """Rotation angle of a gyroscope axis per circular orbit, in radians."""
    if R <= 3 * M:
        raise PhotonSphereError(f"R = {R} is inside or on the photon sphere")
    if mode == "analytic":
        return 2 * np.pi * (1 - np.sqrt(1 - 3 * M / R))
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")
    if M == 0:
        return 0.0
    frame = CircularFrame(M, R)
    metric = SchwarzschildMetric(M)
    x0 = ChartPoint.equatorial(0.0, R)
    tau_orbit = 2 * np.pi / frame.Omega * np.sqrt(1 - 3 * M / R)
    spec = TransportSpec("parallel", frame.velocity, (0.0, tau_orbit), tolerance=tolerance,
                         metric_field=metric)
    traj = transport_frame(spec, frame(x0))
    g = metric.components(ChartPoint(traj.points[-1]))
    e0, e1 = traj.frames[0], traj.frames[-1]
    c = -e1[1] @ g @ e0[1]
    s = -e1[1] @ g @ e0[3]
    ang = np.arctan2(s, c) % (2 * np.pi)
    return float(ang)
