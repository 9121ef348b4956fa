from __future__ import annotations

import numpy as np
import pytest

from curved_wigner.errors import DomainError, NoCircularOrbit, PhotonSphereError
from curved_wigner.geodesics import (GeodesicState, action_phase, circular_orbit_constants,
                                     effective_potential_extrema, geodesic_residual, hamilton_jacobi_residual,
                                     integrate_geodesic, killing_constants, radial_energy_residual,
                                     radial_infall_velocity, specific_energy)
from curved_wigner.geometry import ChartPoint, SchwarzschildMetric, flat_metric

METRIC = SchwarzschildMetric(1.0)


def test_circular_constants_r6():
    c = circular_orbit_constants(1.0, 6.0)
    assert (c.e, c.l, c.Omega, c.OmegaPrime) == pytest.approx((0.9428090, 3.4641016, 0.06804138, 0.04811252), abs=1e-7)
    assert (c.l / 1.0) ** 2 == pytest.approx(12.0, abs=1e-12)


def test_circular_constants_r10():
    c = circular_orbit_constants(1.0, 10.0)
    assert (c.e, c.l) == pytest.approx((0.9561829, 3.7796447), abs=1e-7)


def test_circular_velocity_normalized_and_consistent():
    for R in (4.0, 6.0, 15.0):
        c = circular_orbit_constants(1.0, R)
        x = ChartPoint.equatorial(0.0, R)
        u = c.velocity()
        assert u @ METRIC.components(x) @ u == pytest.approx(1.0, abs=1e-13)
        assert killing_constants(1.0, x, u) == pytest.approx((c.e, c.l), abs=1e-13)


@pytest.mark.parametrize("R", [3.0, 2.5])
def test_photon_sphere_guard(R):
    with pytest.raises(PhotonSphereError):
        circular_orbit_constants(1.0, R)


def test_isco_degenerate_extremum():
    V = effective_potential_extrema(1.0, 2 * np.sqrt(3))
    assert V.radii[0] == pytest.approx(6.0, abs=1e-10)
    assert V.radii[1] == pytest.approx(6.0, abs=1e-10)
    assert V.isco == 6.0
    assert V(6.0) == pytest.approx(-1 / 18, abs=1e-12)
    assert specific_energy(circular_orbit_constants(1.0, 6.0).e) == pytest.approx(-1 / 18, abs=1e-12)


def test_extrema_for_l4():
    V = effective_potential_extrema(1.0, 4.0)
    assert V.radii == pytest.approx((12.0, 4.0), abs=1e-12)
    for r in V.radii:
        h = 1e-5
        assert (V(r + h) - V(r - h)) / (2 * h) == pytest.approx(0.0, abs=1e-9)
        assert V.derivative(r) == pytest.approx(0.0, abs=1e-14)


def test_no_circular_orbit_below_threshold():
    with pytest.raises(NoCircularOrbit):
        effective_potential_extrema(1.0, 3.0)
    with pytest.raises(DomainError):
        effective_potential_extrema(-1.0, 4.0)


def test_radial_infall_velocity():
    assert radial_infall_velocity(1.0, 10.0) == pytest.approx([1.25, -0.4472136, 0, 0], abs=1e-7)
    for r in (3.0, 6.0, 50.0):
        u = radial_infall_velocity(1.0, r)
        assert u @ METRIC.components(ChartPoint.equatorial(0, r)) @ u == pytest.approx(1.0, abs=1e-13)
    assert radial_infall_velocity(1.0, 1e12) == pytest.approx([1, 0, 0, 0], abs=1e-5)
    with pytest.raises(DomainError):
        radial_infall_velocity(1.0, 2.0)


def test_circular_orbit_closes_after_one_period():
    c = circular_orbit_constants(1.0, 6.0)
    init = GeodesicState(ChartPoint.equatorial(0.0, 6.0), c.velocity())
    tr = integrate_geodesic(METRIC, init, (0.0, c.proper_period), samples=np.linspace(0, c.proper_period, 5))
    end = tr.points[-1]
    assert abs(end[1] - 6.0) < 1e-8
    assert abs((end[3] + np.pi) % (2 * np.pi) - np.pi) < 1e-8
    for p, u in zip(tr.points, tr.velocities):
        e, l = killing_constants(1.0, ChartPoint(p), u)
        assert abs(e - c.e) < 1e-10 and abs(l - c.l) < 1e-10


def test_radial_energy_conserved():
    init = GeodesicState(ChartPoint.equatorial(0.0, 20.0), radial_infall_velocity(1.0, 20.0))
    tr = integrate_geodesic(METRIC, init, (0.0, 40.0), samples=np.linspace(0, 40, 9))
    for p, u in zip(tr.points, tr.velocities):
        e, l = killing_constants(1.0, ChartPoint(p), u)
        assert abs(e - 1.0) < 1e-10 and l == 0.0
        assert abs(radial_energy_residual(1.0, p[1], u[1], e, l)) < 1e-10


def test_flat_geodesic_is_straight():
    x0 = ChartPoint((0.0, 5.0, np.pi / 2, 0.0))
    u0 = np.array([np.sqrt(1 + 0.3**2), 0.3, 0.0, 0.0])
    tr = integrate_geodesic(flat_metric(), GeodesicState(x0, u0), (0.0, 10.0))
    assert np.max(np.abs(tr.velocities[-1] - u0)) < 1e-12


def test_geodesic_residual_zero_on_circular_orbit():
    c = circular_orbit_constants(1.0, 8.0)
    assert geodesic_residual(METRIC, ChartPoint.equatorial(0.0, 8.0), c.velocity(), np.zeros(4)) < 1e-14


def test_action_phase_and_gradient():
    c = circular_orbit_constants(1.0, 6.0)
    assert action_phase(c, ChartPoint.equatorial(0.0, 6.0)) == 0.0
    assert action_phase(c, ChartPoint.equatorial(1.0, 6.0)) == pytest.approx(-0.9428090, abs=1e-7)
    h = 1e-5
    dS = (action_phase(c, ChartPoint.equatorial(h, 6.0)) - action_phase(c, ChartPoint.equatorial(-h, 6.0))) / (2 * h)
    assert dS == pytest.approx(-c.e, abs=1e-9)
    assert hamilton_jacobi_residual(METRIC, ChartPoint.equatorial(0, 6.0), [c.e, 0, 0, -c.l]) == pytest.approx(0, abs=1e-13)
