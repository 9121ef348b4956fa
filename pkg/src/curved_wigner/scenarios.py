"""Composite computations shared by the command line and the acceptance suite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry as geo
from .dirac_wkb import RestSpinor, raise_index, velocity_correction
from .errors import IntegrationFailure
from .frames import (CircularFrame, TransportSpec, chi_from_transport, spin_connection,
                     transport_rhs)
from .geodesics import circular_orbit_constants
from .geometry import ChartPoint, SchwarzschildMetric
from .wigner import (AccumulatedRotation, LocalMomentum, accumulate_wigner, infinitesimal_llt,
                     infinitesimal_wigner)


def circular_generator(M, R, t, m=1.0, zeta=0.0, phi=0.0, metric=None) -> np.ndarray:
    """First-order (per unit eps) Wigner generator seen from the circular freely falling frame.

    At rest in that frame the generator reduces to -dv^b omega_b, with dv the
    contravariant spin correction to the velocity.
    """
    metric = metric or SchwarzschildMetric(M)
    frame = CircularFrame(M, R)
    x = ChartPoint.equatorial(t, R)
    dv = raise_index(metric, x, velocity_correction(frame, RestSpinor(zeta, phi), x, metric, m))
    w = spin_connection(frame, x, metric).omega
    th = -np.einsum("n,nab->ab", dv, w)
    th[0, :] = 0.0
    th[:, 0] = 0.0
    return th


@dataclass(frozen=True)
class OrbitSpinResult:
    rotation: AccumulatedRotation
    tau: float
    chi_up: float
    closed_form: np.ndarray      # diag(exp(-i chi tau/2), exp(+i chi tau/2)) on the frame z basis


def accumulate_circular_spin(M, R, m=1.0, zeta=0.0, phi=0.0, orbits=1.0, steps=None) -> OrbitSpinResult:
    """Time-ordered spin rotation over whole orbits, per unit eps."""
    c = circular_orbit_constants(M, R)
    tau = orbits * c.proper_period
    metric = SchwarzschildMetric(M)
    ratio = c.Omega / c.OmegaPrime       # dt/dtau on the orbit

    rot = accumulate_wigner(lambda s: circular_generator(M, R, s * ratio, m, zeta, phi, metric),
                            (0.0, tau), steps=steps)
    chi = (1 - 2 * M / R) / (2 * m * R * R)
    closed = np.diag([np.exp(-0.5j * chi * tau), np.exp(0.5j * chi * tau)])
    return OrbitSpinResult(rot, tau, chi, closed)


@dataclass(frozen=True)
class FermiWalkerResult:
    rotation: AccumulatedRotation
    max_generator: float
    max_space_chi: float
    max_boost_mismatch: float
    inner_product_drift: float


def corrected_circular_motion(M, R, eps, m=1.0, zeta=0.0):
    """Unit 4-velocity and its acceleration for the spin-corrected circular motion (zeta in {0, pi})."""
    metric = SchwarzschildMetric(M)
    frame = CircularFrame(M, R)
    x0 = ChartPoint.equatorial(0.0, R)
    dv = raise_index(metric, x0, velocity_correction(frame, RestSpinor(zeta), x0, metric, m))
    v = frame.velocity(x0) + eps * dv
    g = metric.components(x0)
    v = v / np.sqrt(v @ g @ v)
    G = geo.christoffel(metric, x0).gamma
    a = np.einsum("amn,m,n->a", G, v, v)     # components of v are constant along the motion
    return v, a


def fermi_walker_null_rotation(M=1.0, R=6.0, eps=1e-2, m=1.0, samples=400, tol=1e-12) -> FermiWalkerResult:
    """Accumulated Wigner rotation in a Fermi-Walker frame carried along the corrected circular motion.

    The frame derivative entering the rotation rate is taken from the integrated
    trajectory by 5-point differences of its dense output, not from the transport law.
    """
    metric = SchwarzschildMetric(M)
    v, a = corrected_circular_motion(M, R, eps, m)
    g0 = metric.components(ChartPoint.equatorial(0.0, R))

    def vel(x):
        return v

    def acc(x):
        return a

    # initial frame: e_0 = v, spatial legs Gram-Schmidt from the static frame
    f = 1 - 2 * M / R
    guess = np.diag([1 / np.sqrt(f), np.sqrt(f), 1 / R, 1 / R])
    e = [v]
    for k in (1, 2, 3):
        w = guess[k].copy()
        for j, b in enumerate(e):
            nb = 1.0 if j == 0 else -1.0
            w = w - (w @ g0 @ b) / nb * b
        e.append(w / np.sqrt(-(w @ g0 @ w)))
    e0 = np.array(e)

    period = 2 * np.pi / (v[3] / v[0]) / v[0]       # proper time per revolution
    spec = TransportSpec("fermi-walker", vel, (0.0, period), acceleration_field=acc,
                         tolerance=tol, metric_field=metric)
    rhs = transport_rhs(spec, metric)
    y0 = np.concatenate([[0.0, R, np.pi / 2, 0.0], e0.ravel()])
    h = period * 1e-3
    sol = solve_ivp(rhs, (-3 * h, period + 3 * h), y0, method="RK45", rtol=tol, atol=tol, dense_output=True)
    if not sol.success:
        raise IntegrationFailure(sol.message)

    def frame_at(s):
        y = sol.sol(s)
        return ChartPoint(y[:4]), y[4:].reshape(4, 4)

    def generator(s):
        x, ee = frame_at(s)
        d = (sol.sol(s - 2 * h) - 8 * sol.sol(s - h) + 8 * sol.sol(s + h) - sol.sol(s + 2 * h)) / (12 * h)
        de = d[4:].reshape(4, 4)
        G = geo.christoffel(metric, x).gamma
        chi = chi_from_transport(ee, de, G, v).chi
        Einv = np.linalg.inv(ee).T
        vh = Einv @ v
        vh = vh / np.sqrt(vh[0] ** 2 - vh[1:] @ vh[1:])
        pm = LocalMomentum(m * vh[1:], m)
        ah = Einv @ a
        lam = infinitesimal_llt(ah, pm, chi, tol=1e-6)
        return infinitesimal_wigner(lam, pm).generator, chi, ah

    probes = np.linspace(0.0, period, 17)
    mx_th = mx_chi = mx_boost = 0.0
    for s in probes:
        th, chi, ah = generator(s)
        mx_th = max(mx_th, np.max(np.abs(th)))
        mx_chi = max(mx_chi, np.max(np.abs(chi[1:, 1:])))
        mx_boost = max(mx_boost, np.max(np.abs(-chi[1:, 0] - ah[1:])))
    rot = accumulate_wigner(lambda s: generator(s)[0], (0.0, period), steps=samples)

    x1, e1 = frame_at(period)
    g1 = metric.components(x1)
    drift = float(np.max(np.abs(e1 @ g1 @ e1.T - e0 @ g0 @ e0.T)))
    return FermiWalkerResult(rot, mx_th, mx_chi, mx_boost, drift)
