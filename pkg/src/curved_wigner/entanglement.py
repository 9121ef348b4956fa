"""Anti-correlated spin pairs on neighbouring orbits and their Wigner-rotated states."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dirac_wkb import RestSpinor, radial_closed_forms, raise_index, velocity_correction
from .errors import DomainError, NotAState, PhotonSphereError
from .frames import CircularFrame, CorrectedRadialFrame, RadialFrame, covariant_frame_derivative
from .geometry import ETA, ChartPoint, SchwarzschildMetric
from .wigner import LocalMomentum, local_wigner_generator, spin_half_step

# two-qubit basis order: |uu>, |ud>, |du>, |dd>
SIGMA_Y = np.array([[0, -1j], [1j, 0]])


@dataclass(frozen=True)
class BipartiteSpinState:
    Theta: float
    Phi: float
    amplitudes: np.ndarray             # on |ud>, |du>
    momenta: tuple = (None, None)

    @property
    def vector(self) -> np.ndarray:
        c1, c2 = self.amplitudes
        return np.array([0.0, c1, c2, 0.0], dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


def bipartite_state(Theta: float, Phi: float, momenta=(None, None)) -> BipartiteSpinState:
    amps = np.array([np.cos(Theta / 2), np.exp(1j * Phi) * np.sin(Theta / 2)], dtype=complex)
    return BipartiteSpinState(Theta, Phi, amps, momenta)


def singlet_type() -> BipartiteSpinState:
    """Theta = pi/2, Phi = pi: (|ud> - |du>)/sqrt(2)."""
    return bipartite_state(np.pi / 2, np.pi)


def _from_vector(vec, Theta=np.nan, Phi=np.nan, momenta=(None, None)) -> BipartiteSpinState:
    return BipartiteSpinState(Theta, Phi, np.array([vec[1], vec[2]]), momenta)


# ---------------------------------------------------------------- per-particle corrections

def _check_pair(M, R, deltaR):
    if R - deltaR <= 3 * M:
        raise PhotonSphereError(f"inner orbit R - dR = {R - deltaR} is inside the photon sphere")
    if deltaR / R > 0.05:
        warnings.warn("orbit separation is not small compared with R", stacklevel=3)


@dataclass(frozen=True)
class PairCorrections:
    r_plus: float
    r_minus: float
    delta_v_plus: np.ndarray      # covariant, particle 1 on r = R + dR
    delta_v_minus: np.ndarray     # covariant, particle 2 on r = R - dR


def _spin_weighted(frame, x, state, metric, m, first: bool):
    """Expectation of one particle's connection term in the anti-correlated pair state."""
    w_up, w_dn = np.abs(state.amplitudes) ** 2
    up = velocity_correction(frame, RestSpinor(0.0), x, metric, m)
    dn = velocity_correction(frame, RestSpinor(np.pi), x, metric, m)
    # particle 1 is up in |ud>, particle 2 is down there
    return w_up * up + w_dn * dn if first else w_up * dn + w_dn * up


def pair_corrections(state: BipartiteSpinState, M: float, R: float, deltaR: float,
                     m: float = 1.0, t: float = 0.0) -> PairCorrections:
    _check_pair(M, R, deltaR)
    metric = SchwarzschildMetric(M)
    rp, rm = R + deltaR, R - deltaR
    xp, xm = ChartPoint.equatorial(t, rp), ChartPoint.equatorial(t, rm)
    dvp = _spin_weighted(CircularFrame(M, rp), xp, state, metric, m, True)
    dvm = _spin_weighted(CircularFrame(M, rm), xm, state, metric, m, False)
    return PairCorrections(rp, rm, dvp, dvm)


# ---------------------------------------------------------------- pair angles

@dataclass(frozen=True)
class PairWignerAngles:
    theta_x: float         # lowered theta_31 at r = R
    delta_theta: float     # dR * (r-derivative of the rotation rate)
    exact_plus: float = np.nan
    exact_minus: float = np.nan


def _orbit_factors(M, r, m, t=0.0):
    """Co-frame, raised spin-up connection term and nabla e on the orbit of radius r."""
    frame = CircularFrame(M, r)
    metric = SchwarzschildMetric(M)
    x = ChartPoint.equatorial(t, r)
    E = np.linalg.inv(frame.matrix(x)).T
    dv_up = raise_index(metric, x, velocity_correction(frame, RestSpinor(0.0), x, metric, m))
    nab = covariant_frame_derivative(frame, metric, x)
    return E, dv_up, nab


def _rate31(E, dv, nab) -> float:
    """Lowered (3,1) entry of -E^i_mu dv^b nabla_b e_j^mu."""
    chi = -np.einsum("in,b,bjn->ij", E, dv, nab)
    return float((ETA @ chi)[3, 1])


def pair_wigner_angles(state: BipartiteSpinState, M: float, R: float, deltaR: float,
                       m: float = 1.0, t: float = 0.0, rel: float = 1e-4) -> PairWignerAngles:
    """Leading pair rotation rate and its first-order orbit-separation correction.

    The separation term applies the product rule to the three factors of the
    rotation rate, each differentiated in r by central differences along the
    family of circular freely falling frames.
    """
    _check_pair(M, R, deltaR)
    c = np.cos(state.Theta)
    E, dv, nab = _orbit_factors(M, R, m, t)
    h = rel * R
    Ep, dvp, nabp = _orbit_factors(M, R + h, m, t)
    Em, dvm, nabm = _orbit_factors(M, R - h, m, t)
    dE, ddv, dnab = (Ep - Em) / (2 * h), (dvp - dvm) / (2 * h), (nabp - nabm) / (2 * h)
    base = c * _rate31(E, dv, nab)
    delta = c * (_rate31(dE, dv, nab) + _rate31(E, ddv, nab) + _rate31(E, dv, dnab))
    ex_p = c * _rate31(*_orbit_factors(M, R + deltaR, m, t))
    ex_m = -c * _rate31(*_orbit_factors(M, R - deltaR, m, t))
    return PairWignerAngles(base, deltaR * delta, ex_p, ex_m)


def _rotation_generator(rate31: float) -> np.ndarray:
    """4x4 generator whose lowered (3,1) entry is rate31."""
    th = np.zeros((4, 4))
    th[3, 1] = -rate31
    th[1, 3] = rate31
    return th


def transform_pair(state: BipartiteSpinState, angles: PairWignerAngles, dtau: float,
                   include_delta: bool = True) -> BipartiteSpinState:
    """Apply D[theta + dtheta] (x) D[-theta + dtheta] for proper time dtau (exact diagonal form)."""
    d = angles.delta_theta if include_delta else 0.0
    D1 = spin_half_step(_rotation_generator(angles.theta_x + d), dtau, exact=True).D
    D2 = spin_half_step(_rotation_generator(-angles.theta_x + d), dtau, exact=True).D
    vec = np.kron(D1, D2) @ state.vector
    return _from_vector(vec, state.Theta, state.Phi, state.momenta)


# ---------------------------------------------------------------- measures

@dataclass(frozen=True)
class EntanglementMeasures:
    fidelity: float
    concurrence: float


def _as_density(obj) -> np.ndarray:
    if isinstance(obj, BipartiteSpinState):
        v = obj.vector
        return np.outer(v, v.conj())
    a = np.asarray(obj, dtype=complex)
    if a.shape == (4,):
        return np.outer(a, a.conj())
    return a


def _check_density(rho, tol=1e-8):
    if rho.shape != (4, 4):
        raise NotAState("two-qubit density matrices are 4x4")
    if abs(np.trace(rho) - 1) > tol:
        raise NotAState("trace differs from one")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NotAState("matrix is not Hermitian")
    if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -tol:
        raise NotAState("matrix is not positive semidefinite")


def concurrence(rho) -> float:
    if isinstance(rho, BipartiteSpinState) or np.asarray(rho).shape == (4,):
        # pure state: |<psi| sy(x)sy |psi*>|, free of the eigenvalue square roots
        v = rho.vector if isinstance(rho, BipartiteSpinState) else np.asarray(rho, dtype=complex)
        _check_density(np.outer(v, v.conj()))
        return float(abs(v @ np.kron(SIGMA_Y, SIGMA_Y) @ v))
    rho = _as_density(rho)
    _check_density(rho)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    tilde = yy @ rho.conj() @ yy
    ev = np.sqrt(np.clip(np.sort(np.real(np.linalg.eigvals(rho @ tilde)))[::-1], 0, None))
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


def fidelity(a, b) -> float:
    ra, rb = _as_density(a), _as_density(b)
    _check_density(ra)
    _check_density(rb)
    if isinstance(a, BipartiteSpinState) or np.asarray(a).shape == (4,):
        va = a.vector if isinstance(a, BipartiteSpinState) else np.asarray(a, dtype=complex)
        return float(np.real(va.conj() @ rb @ va))
    # pure-state overlap for densities of rank one, Uhlmann otherwise
    from scipy.linalg import sqrtm
    s = sqrtm(ra)
    return float(np.real(np.trace(sqrtm(s @ rb @ s))) ** 2)


def fidelity_and_concurrence(state_a, state_b=None) -> EntanglementMeasures:
    f = fidelity(state_a, state_b) if state_b is not None else 1.0
    return EntanglementMeasures(f, concurrence(state_b if state_b is not None else state_a))


# ---------------------------------------------------------------- radial EPR

@dataclass(frozen=True)
class RadialEPRReport:
    r: float
    epsilon: float
    dtau: float
    momenta: tuple                  # frame momenta of the two deflected particles
    matched_generators: tuple
    matched_fidelity: float
    mismatched_generators: tuple
    mismatched_fidelity: float
    triplet_amplitude: float
    concurrence_matched: float
    concurrence_mismatched: float


def _triplet_overlap(vec) -> float:
    t0 = np.array([0, 1, 1, 0]) / np.sqrt(2)
    return float(abs(t0 @ vec))


def radial_epr_report(M: float, r: float, epsilon: float, dtau: float = 1.0, m: float = 1.0) -> RadialEPRReport:
    """Singlet of a spin-up and a spin-down particle falling radially from rest at infinity.

    Particle 1 (up) and particle 2 (down) are deflected by the printed first-order
    correction. Matched observers use the corrected tetrad built for their own
    spin; the mismatched observer uses one uncorrected freely falling frame.
    """
    if r <= 2 * M:
        raise DomainError(f"r = {r} is not outside the horizon")
    metric = SchwarzschildMetric(M)
    x = ChartPoint.equatorial(0.0, r)
    base = RadialFrame(M)
    u = base.velocity(x)
    v1 = u + epsilon * radial_closed_forms(M, r, 0.0, 0.0)
    v2 = u + epsilon * radial_closed_forms(M, r, np.pi, 0.0)
    E = np.linalg.inv(base.matrix(x)).T
    momenta = (m * E @ v1, m * E @ v2)
    singlet = singlet_type()

    def apply(th1, th2):
        D1 = spin_half_step(th1, dtau, exact=True).D
        D2 = spin_half_step(th2, dtau, exact=True).D
        return np.kron(D1, D2) @ singlet.vector

    f1 = CorrectedRadialFrame(M, 0.0, 0.0, epsilon)
    f2 = CorrectedRadialFrame(M, np.pi, 0.0, epsilon)
    th1 = local_wigner_generator(f1, x, f1.velocity(x), None, m, metric).generator
    th2 = local_wigner_generator(f2, x, f2.velocity(x), None, m, metric).generator
    out_matched = apply(th1, th2)

    mh1 = local_wigner_generator(base, x, v1, None, m, metric).generator
    mh2 = local_wigner_generator(base, x, v2, None, m, metric).generator
    out_mis = apply(mh1, mh2)

    sv = singlet.vector
    return RadialEPRReport(
        r=r, epsilon=epsilon, dtau=dtau, momenta=momenta,
        matched_generators=(th1, th2),
        matched_fidelity=float(abs(sv.conj() @ out_matched) ** 2),
        mismatched_generators=(mh1, mh2),
        mismatched_fidelity=float(abs(sv.conj() @ out_mis) ** 2),
        triplet_amplitude=_triplet_overlap(out_mis),
        concurrence_matched=concurrence(out_matched),
        concurrence_mismatched=concurrence(out_mis),
    )
