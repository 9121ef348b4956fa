"""Leading-order WKB Dirac spinors and their spin-curvature corrections to the motion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import PhotonSphereError
from .frames import Tetrad, _frame_matrix, spin_connection
from .geometry import ETA, ChartPoint, SchwarzschildMetric
from .wigner import FRAME_PAULI

_Z2 = np.zeros((2, 2), dtype=complex)

# Dirac representation with the frame Pauli matrices for the spatial axes
GAMMA = np.array(
    [np.block([[np.eye(2), _Z2], [_Z2, -np.eye(2)]])]
    + [np.block([[_Z2, s], [-s, _Z2]]) for s in FRAME_PAULI]
)
SIGMA = np.array([[0.5j * (GAMMA[a] @ GAMMA[b] - GAMMA[b] @ GAMMA[a]) for b in range(4)]
                  for a in range(4)])
COMMUTATORS = np.array([[GAMMA[a] @ GAMMA[b] - GAMMA[b] @ GAMMA[a] for b in range(4)]
                        for a in range(4)])


def dirac_adjoint(psi: np.ndarray) -> np.ndarray:
    return psi.conj() @ GAMMA[0]


@dataclass(frozen=True)
class RestSpinor:
    zeta: float = 0.0
    phi: float = 0.0

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([np.cos(self.zeta / 2), np.exp(1j * self.phi) * np.sin(self.zeta / 2)])

    @property
    def spinor(self) -> np.ndarray:
        return np.concatenate([self.amplitudes, [0.0, 0.0]])

    @property
    def direction(self) -> np.ndarray:
        """Spin direction on the (x, y, z) axes of the quantization frame."""
        z, p = self.zeta, self.phi
        return np.array([np.sin(z) * np.cos(p), np.sin(z) * np.sin(p), np.cos(z)])

    @property
    def frame_direction(self) -> np.ndarray:
        """Spin direction on the frame axes (e_1, e_2, e_3) = (x, -z, y)."""
        n = self.direction
        return np.array([n[0], -n[2], n[1]])


def rest_spinor(zeta: float, phi: float = 0.0) -> RestSpinor:
    return RestSpinor(zeta, phi)


def moving_spinor(p_local, m: float, spin: RestSpinor) -> np.ndarray:
    """Positive-energy plane-wave spinor with psi-bar psi = 1 for frame momentum p."""
    p = np.asarray(p_local, dtype=float)
    E = p[0] if p.shape == (4,) else np.sqrt(p @ p + m * m)
    q = p[1:] if p.shape == (4,) else p
    chi = spin.amplitudes
    sp = sum(q[k] * FRAME_PAULI[k] for k in range(3))
    return np.sqrt((E + m) / (2 * m)) * np.concatenate([chi, sp @ chi / (E + m)])


def spin_tensor(psi: np.ndarray) -> np.ndarray:
    """Frame components <sigma^{ab}> = psi-bar sigma^{ab} psi (real)."""
    bar = dirac_adjoint(psi)
    return np.real(np.einsum("i,abij,j->ab", bar, SIGMA, psi))


# ---------------------------------------------------------------- spinor connection

@dataclass(frozen=True)
class SpinorConnection:
    Gamma: np.ndarray   # (4, 4, 4) complex, one Dirac matrix per world index

    def anti_self_adjoint_residual(self) -> float:
        g0 = GAMMA[0]
        return float(max(np.max(np.abs(g0 @ G.conj().T @ g0 + G)) for G in self.Gamma))

    def matrix_elements(self, bra: np.ndarray, ket: np.ndarray) -> np.ndarray:
        return np.einsum("i,mij,j->m", dirac_adjoint(bra), self.Gamma, ket)


def spinor_connection_from_omega(omega: np.ndarray) -> SpinorConnection:
    """Gamma_mu = (1/8) omega_{mu ab} [gamma^a, gamma^b].

    This sign makes [Gamma_mu, gamma^a] = -omega_mu^a_b gamma^b for the frame
    connection omega_mu^a_b = E^a_nu nabla_mu e_b^nu.
    """
    low = np.einsum("ac,mcb->mab", ETA, omega)
    return SpinorConnection(np.einsum("mab,abij->mij", low, COMMUTATORS) / 8)


def spinor_connection(frame_field, x: ChartPoint, metric_field=None, rel=1e-5, order=2) -> SpinorConnection:
    return spinor_connection_from_omega(spin_connection(frame_field, x, metric_field, rel, order).omega)


def compatibility_residual(conn: SpinorConnection, omega: np.ndarray) -> float:
    worst = 0.0
    for mu in range(4):
        G = conn.Gamma[mu]
        for a in range(4):
            lhs = G @ GAMMA[a] - GAMMA[a] @ G
            rhs = -np.einsum("b,bij->ij", omega[mu, a], GAMMA)
            worst = max(worst, np.max(np.abs(lhs - rhs)))
    return float(worst)


# ---------------------------------------------------------------- velocity

def velocity_correction(frame_field, spinor: RestSpinor, x: ChartPoint, metric_field=None,
                        m: float = 1.0, rel=1e-5, order=2) -> np.ndarray:
    """Covariant O(hbar) velocity correction per unit eps: (1/(i m)) psi-bar Gamma_a psi."""
    conn = spinor_connection(frame_field, x, metric_field, rel, order)
    psi = spinor.spinor if isinstance(spinor, RestSpinor) else np.asarray(spinor)
    val = conn.matrix_elements(psi, psi) / (1j * m)
    return np.real(val)


def raise_index(field, x: ChartPoint, v_lower) -> np.ndarray:
    return np.linalg.inv(field.components(x)) @ np.asarray(v_lower)


def selection_rules(frame_field, x: ChartPoint, metric_field=None) -> dict:
    """Matrix elements Gamma_a^{s's} between the frame spin-up/down rest spinors."""
    conn = spinor_connection(frame_field, x, metric_field)
    up, dn = RestSpinor(0.0).spinor, RestSpinor(np.pi).spinor
    return {
        "upup": conn.matrix_elements(up, up),
        "updn": conn.matrix_elements(up, dn),
        "dnup": conn.matrix_elements(dn, up),
        "dndn": conn.matrix_elements(dn, dn),
    }


@dataclass(frozen=True)
class PerturbedMotion:
    u: np.ndarray
    delta_v: np.ndarray      # covariant, per unit eps
    delta_a: np.ndarray      # covariant, per unit eps
    epsilon: float
    metric: np.ndarray

    @property
    def corrected_velocity(self) -> np.ndarray:
        """Contravariant corrected velocity u + eps dv."""
        return self.u + self.epsilon * np.linalg.inv(self.metric) @ self.delta_v

    def normalization_residual(self) -> float:
        v = self.corrected_velocity
        return float(v @ self.metric @ v - 1)


# ---------------------------------------------------------------- acceleration

def world_spin_tensor(tet: Tetrad, spinor) -> np.ndarray:
    psi = spinor.spinor if isinstance(spinor, RestSpinor) else np.asarray(spinor)
    S = spin_tensor(psi)
    return np.einsum("ca,db,cd->ab", tet.e, tet.e, S)


def acceleration_correction(metric_field, u, spinor, frame_field, x: ChartPoint,
                            route: str = "curvature", m: float = 1.0, rel: float = 1e-3) -> np.ndarray:
    """Covariant O(hbar) acceleration per unit eps.

    curvature: -(1/4m) R_{abcd} u^b <sigma^{cd}>.
    gamma-derivative: (1/im) u^b psi-bar(d_b G_a - d_a G_b + [G_b, G_a]) psi with
    the spinor connection differenced on a 5-point stencil.
    """
    u = np.asarray(u, dtype=float)
    psi = spinor.spinor if isinstance(spinor, RestSpinor) else np.asarray(spinor)
    if route == "curvature":
        R = geo.riemann(metric_field, x).lowered()
        S = world_spin_tensor(Tetrad(_frame_matrix(frame_field, x), x), psi)
        return -np.einsum("abcd,b,cd->a", R, u, S) / (4 * m)
    if route != "gamma-derivative":
        raise ValueError(f"unknown route {route!r}")

    def gam(y):
        return spinor_connection(frame_field, y, metric_field, rel=rel, order=4).Gamma
    G = gam(x)
    dG = geo.gradient(gam, x, rel=rel, order=4)    # dG[b, a] = d_b Gamma_a
    F = dG - dG.transpose(1, 0, 2, 3) + np.einsum("bij,ajk->baik", G, G) - np.einsum("aij,bjk->baik", G, G)
    bar = dirac_adjoint(psi)
    val = np.einsum("b,i,baij,j->a", u, bar, F, psi) / (1j * m)
    return np.real(val)


# ---------------------------------------------------------------- closed forms

@dataclass(frozen=True)
class CircularClosedForms:
    delta_v: np.ndarray      # as printed, (t, r, theta, phi)
    a_lower: np.ndarray
    a_frame: np.ndarray
    chi_up: float


def circular_closed_forms(M, R, m=1.0, zeta=0.0, phi=0.0, t=0.0) -> CircularClosedForms:
    if R <= 3 * M:
        raise PhotonSphereError(f"R = {R} is inside or on the photon sphere")
    W = np.sqrt(M / R**3)
    k = 1 - 3 * M / R
    f = 1 - 2 * M / R
    Wp = W * np.sqrt(k)
    cz, sz = np.cos(zeta), np.sin(zeta)
    dv = np.array([
        -W * R * cz / (2 * m * np.sqrt(k)),
        0.0,
        -np.sqrt(f) * np.sin(Wp * t - phi) * sz / (2 * m * R**2),
        f * cz / (2 * m * R**2 * np.sqrt(k)),
    ])
    ar = 3 * W**3 * R * cz / (2 * m * k)
    a_low = np.array([0.0, -ar, -W * np.sqrt(f) * np.cos(Wp * t - phi) * sz / (2 * m), 0.0])
    a_hat = np.array([
        0.0,
        ar * np.sqrt(f) * np.cos(Wp * t),
        W * np.sqrt(f) * np.cos(Wp * t - phi) * sz / (2 * m * R),
        ar * np.sqrt(f) * np.sin(Wp * t),
    ])
    return CircularClosedForms(dv, a_low, a_hat, f / (2 * m * R**2))


def radial_closed_forms(M, r, zeta=0.0, phi=0.0) -> np.ndarray:
    """Velocity correction for radial infall as printed: (0, 0, -n_y, -n_z)/(4 M r^2)."""
    c = 1 / (4 * M * r * r)
    return np.array([0.0, 0.0, -np.sin(zeta) * np.sin(phi) * c, -np.cos(zeta) * c])


@dataclass(frozen=True)
class FrequencyCorrection:
    omega1: float
    phi_prime: float
    precession: float        # 2 pi (1 + eps w1) sqrt(1 - 3M/R), as printed
    geodetic_angle: float    # 2 pi minus the above; equals the unperturbed precession at eps = 0
    d_omega1_dr: float


def lp_frequency_correction(M, R, m=1.0, eps=0.0, rel=1e-5) -> FrequencyCorrection:
    """First-order frequency shift of the spin-up orbit, taken literally in geometric units.

    The printed expression has no mass dependence; `m` is accepted for a uniform signature.
    """
    if R <= 3 * M:
        raise PhotonSphereError(f"R = {R} is inside or on the photon sphere")
    W = np.sqrt(M / R**3)

    def omega1(r):
        Wp = W * np.sqrt(1 - 2 * M / r - (r * W) ** 2)
        return (W**3 / Wp) * (1 + 1 / Wp) / (4 * M)

    w1 = omega1(R)
    h = rel * max(1.0, R)
    dw = (omega1(R + h) - omega1(R - h)) / (2 * h)
    Wp = W * np.sqrt(1 - 3 * M / R)
    phase = 2 * np.pi * (1 + eps * w1) * np.sqrt(1 - 3 * M / R)
    return FrequencyCorrection(w1, (1 + eps * w1) * Wp, phase, 2 * np.pi - phase, dw)
