"""Standard boosts, exact and infinitesimal Wigner rotations, spin-1/2 representation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import NotALorentzTransform, OrthogonalityViolation, StepTooCoarse
from .geometry import ETA

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
# frame axes 1,2,3 = (e_r, e_theta, e_phi) = (x, -z, y)
FRAME_PAULI = (PAULI[0], -PAULI[2], PAULI[1])


@dataclass(frozen=True)
class LocalMomentum:
    p: np.ndarray
    m: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if self.m <= 0:
            raise ValueError("rest mass must be positive")
        if p.shape == (3,):
            p = np.concatenate([[np.sqrt(p @ p + self.m**2)], p])
        if p[0] <= 0 or abs(p[0] - np.sqrt(p[1:] @ p[1:] + self.m**2)) > 1e-10 * max(1.0, p[0]):
            raise ValueError("momentum is not on the positive mass shell")
        object.__setattr__(self, "p", p)

    @classmethod
    def at_rest(cls, m=1.0):
        return cls(np.array([m, 0.0, 0.0, 0.0]), m)

    @property
    def spatial(self):
        return self.p[1:]

    @property
    def lower(self):
        return ETA @ self.p


def standard_boost(p: LocalMomentum) -> np.ndarray:
    """Pure boost taking (m,0,0,0) to p."""
    m = p.m
    gamma = p.p[0] / m
    q = p.spatial / m
    q2 = q @ q
    L = np.eye(4)
    L[0, 0] = gamma
    L[1:, 0] = q
    L[0, 1:] = q
    if q2 > 0:
        L[1:, 1:] += (gamma - 1) * np.outer(q, q) / q2
    return L


def inverse_boost(p: LocalMomentum) -> np.ndarray:
    return standard_boost(LocalMomentum(-p.spatial, p.m))


def is_lorentz(Lam, tol=1e-10) -> bool:
    return bool(np.max(np.abs(Lam.T @ ETA @ Lam - ETA)) < tol)


@dataclass(frozen=True)
class WignerRotation:
    W: np.ndarray
    generator: np.ndarray = None   # theta^a_b when this is an infinitesimal rate

    @property
    def spatial(self):
        return self.W[1:, 1:]

    def orthogonality_residual(self) -> float:
        R = self.spatial
        return float(max(np.max(np.abs(R.T @ R - np.eye(3))), abs(np.linalg.det(R) - 1)))


def exact_wigner(Lam: np.ndarray, p: LocalMomentum, tol=1e-10) -> WignerRotation:
    Lam = np.asarray(Lam, dtype=float)
    if not is_lorentz(Lam, tol):
        raise NotALorentzTransform("matrix does not preserve the Minkowski metric")
    lp = Lam @ p.p
    if lp[0] <= 0:
        raise NotALorentzTransform("transformation reverses the energy sign")
    W = inverse_boost(LocalMomentum(lp[1:], p.m)) @ Lam @ standard_boost(p)
    return WignerRotation(W)


@dataclass(frozen=True)
class InfinitesimalLLT:
    lam: np.ndarray

    def antisymmetry_residual(self):
        low = ETA @ self.lam
        return float(np.max(np.abs(low + low.T)))


def infinitesimal_llt(a_local, p: LocalMomentum, chi, tol=1e-8) -> InfinitesimalLLT:
    """lambda^a_b = (a^a p_b - p^a a_b)/m + chi^a_b."""
    a = np.asarray(a_local, dtype=float)
    chi = getattr(chi, "chi", chi)
    if abs(a @ ETA @ p.p) > tol * max(1.0, np.abs(a).max() * p.p[0]):
        raise OrthogonalityViolation("acceleration is not orthogonal to momentum")
    lam = (np.outer(a, ETA @ p.p) - np.outer(p.p, ETA @ a)) / p.m + np.asarray(chi, dtype=float)
    return InfinitesimalLLT(lam)


def infinitesimal_wigner(lam: InfinitesimalLLT, p: LocalMomentum) -> WignerRotation:
    # theta^i_j = lambda^i_j + (lambda^i_0 p^j - p^i lambda^j_0)/(p^0 + m); this sign of
    # the boost term is the one the exact little-group element reproduces at first order
    L = lam.lam
    pu = p.spatial
    boost = L[1:, 0]
    theta = np.zeros((4, 4))
    theta[1:, 1:] = L[1:, 1:] + (np.outer(boost, pu) - np.outer(pu, boost)) / (p.p[0] + p.m)
    return WignerRotation(np.eye(4) + theta, theta)


def axial_vector(theta) -> np.ndarray:
    """(theta^2_3, theta^3_1, theta^1_2) from a 4x4 or 3x3 generator."""
    t = np.asarray(theta)
    if t.shape == (4, 4):
        t = t[1:, 1:]
    return np.array([t[1, 2], t[2, 0], t[0, 1]])


def spin_generator(theta) -> np.ndarray:
    """(i/2)(theta_23 s_1 + theta_31 s_2 + theta_12 s_3), spatial indices lowered with eta."""
    w = -axial_vector(theta)
    return 0.5j * sum(w[k] * FRAME_PAULI[k] for k in range(3))


@dataclass(frozen=True)
class SpinHalfRotation:
    D: np.ndarray

    def unitarity_residual(self):
        return float(np.max(np.abs(self.D.conj().T @ self.D - np.eye(2))))

    def det_residual(self):
        return float(abs(np.linalg.det(self.D) - 1))


def spin_half_step(theta, dtau: float, exact: bool = False) -> SpinHalfRotation:
    """First-order spin-1/2 factor I + (i/2) w.sigma dtau; `exact` exponentiates it."""
    gen = theta.generator if isinstance(theta, WignerRotation) else theta
    G = spin_generator(gen)
    if not exact and np.linalg.norm(axial_vector(gen)) * abs(dtau) > 0.1:
        warnings.warn("spin step is large compared with the rotation rate", stacklevel=2)
    if exact:
        return SpinHalfRotation(expm(G * dtau))
    return SpinHalfRotation(np.eye(2) + G * dtau)


def rotation_from_spin(D: np.ndarray) -> np.ndarray:
    """3x3 rotation R with D^dagger sigma_j D = sum_i R_ij sigma_i on the frame basis."""
    R = np.empty((3, 3))
    for j in range(3):
        S = D.conj().T @ FRAME_PAULI[j] @ D
        for i in range(3):
            R[i, j] = 0.5 * np.real(np.trace(FRAME_PAULI[i] @ S))
    return R


@dataclass(frozen=True)
class AccumulatedRotation:
    W: np.ndarray
    D: np.ndarray
    steps: int
    dtau: float

    def double_cover_residual(self) -> float:
        return float(np.max(np.abs(rotation_from_spin(self.D) - self.W[1:, 1:])))

    def orthogonality_residual(self) -> float:
        return WignerRotation(self.W).orthogonality_residual()


def accumulate_wigner(theta_of_tau: Callable[[float], np.ndarray], tau_span,
                      steps: int = None, max_angle_step: float = 1e-3,
                      rate_bound: float = None) -> AccumulatedRotation:
    """Time-ordered product of per-step Wigner rotations, later steps on the left.

    Each step exponentiates the generator sampled at the step midpoint.
    """
    t0, t1 = map(float, tau_span)
    span = t1 - t0
    if span == 0:
        return AccumulatedRotation(np.eye(4), np.eye(2, dtype=complex), 0, 0.0)
    if steps is None:
        if rate_bound is None:
            probe = np.linspace(t0, t1, 9)
            rate_bound = max(np.linalg.norm(axial_vector(theta_of_tau(s))) for s in probe)
        steps = max(1, int(np.ceil(abs(span) * rate_bound / max_angle_step * 1.05)))
    dtau = span / steps
    W = np.eye(4)
    D = np.eye(2, dtype=complex)
    for k in range(steps):
        th = np.asarray(theta_of_tau(t0 + (k + 0.5) * dtau))
        if np.linalg.norm(axial_vector(th)) * abs(dtau) > max_angle_step * 1.5:
            raise StepTooCoarse("rotation per step exceeds the step budget; use more steps")
        step = np.eye(4)
        step[1:, 1:] = expm(th[1:, 1:] * dtau)
        W = step @ W
        D = expm(spin_generator(th) * dtau) @ D
    return AccumulatedRotation(W, D, steps, dtau)


@dataclass(frozen=True)
class ExpansionReport:
    dtau: np.ndarray
    errors: np.ndarray
    slope: float
    time_errors: np.ndarray


def first_order_expansion_check(lam: InfinitesimalLLT, p: LocalMomentum,
                             dtau_list: Sequence[float]) -> ExpansionReport:
    """Compare (W_exact(I + lam dtau) - I)/dtau with the first-order generator."""
    theta = infinitesimal_wigner(lam, p).generator
    errs, terr = [], []
    for h in dtau_list:
        # exp(lam h) = I + lam h + O(h^2) and is exactly Lorentz, as exact_wigner requires
        Lam = expm(lam.lam * h)
        W = exact_wigner(Lam, p, tol=1e-8).W
        errs.append(np.linalg.norm((W - np.eye(4)) / h - theta))
        terr.append(abs(W[0, 0] - 1))
    dt = np.asarray(dtau_list, dtype=float)
    errs = np.asarray(errs)
    good = errs > 0
    slope = float(np.polyfit(np.log(dt[good]), np.log(errs[good]), 1)[0]) if good.sum() > 1 else float("nan")
    return ExpansionReport(dt, errs, slope, np.asarray(terr))


def local_wigner_generator(frame_field, x, v, a=None, m: float = 1.0, metric_field=None,
                           rel=1e-5, order=2) -> WignerRotation:
    """Infinitesimal Wigner generator seen in `frame_field` for a particle with world velocity v.

    v is rescaled to unit norm before forming p = m v; `a` is the world acceleration.
    """
    from .frames import Tetrad, _frame_matrix, chi_matrix
    from .geometry import SchwarzschildMetric

    metric_field = metric_field or SchwarzschildMetric(frame_field.M)
    g = metric_field.components(x)
    v = np.asarray(v, dtype=float)
    v = v / np.sqrt(v @ g @ v)
    tet = Tetrad(_frame_matrix(frame_field, x), x)
    E = tet.inverse_T
    vh = E @ v
    p = LocalMomentum(m * vh[1:], m)
    a_hat = np.zeros(4) if a is None else E @ np.asarray(a, dtype=float)
    chi = chi_matrix(v, frame_field, x, metric_field, rel, order)
    lam = infinitesimal_llt(a_hat, p, chi, tol=1e-6)
    return infinitesimal_wigner(lam, p)
