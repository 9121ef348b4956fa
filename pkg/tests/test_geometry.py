from __future__ import annotations

import numpy as np
import pytest

from curved_wigner.errors import DomainError
from curved_wigner.geometry import (ChartPoint, SchwarzschildMetric, UserMetric, christoffel, flat_metric,
                                    metric_at, metric_compatibility_residual, riemann)


def test_metric_components_at_r10():
    g = SchwarzschildMetric(1.0).components(ChartPoint.equatorial(0.0, 10.0))
    assert np.allclose(np.diag(g), [0.8, -1.25, -100.0, -100.0], atol=1e-14)


def test_flat_limit_is_spherical_minkowski():
    x = ChartPoint((0.3, 4.0, 0.7, 1.1))
    g = flat_metric().components(x)
    assert np.allclose(g, np.diag([1, -1, -16, -16 * np.sin(0.7) ** 2]))


@pytest.mark.parametrize("r", [2.0, 1.0])
def test_horizon_guard(r):
    with pytest.raises(DomainError):
        SchwarzschildMetric(1.0).components(ChartPoint.equatorial(0.0, r))


def test_just_outside_horizon_is_in_domain():
    g = SchwarzschildMetric(1.0).components(ChartPoint.equatorial(0.0, 2.000001))
    assert g[0, 0] > 0 and g[1, 1] < -1e5


def test_analytic_and_differenced_connections_agree():
    rng = np.random.default_rng(11)
    a, d = SchwarzschildMetric(1.0), SchwarzschildMetric(1.0, "central-difference")
    for _ in range(100):
        x = ChartPoint((0.0, rng.uniform(3, 50), rng.uniform(0.2, 2.9), rng.uniform(0, 6)))
        Ga, Gd = christoffel(a, x).gamma, christoffel(d, x).gamma
        assert np.max(np.abs(Ga - Gd)) <= 1e-7 * max(1.0, np.max(np.abs(Ga)))


def test_polar_axis_guard():
    with pytest.raises(DomainError):
        SchwarzschildMetric(1.0).components(ChartPoint((0.0, 10.0, 0.0, 0.0)))


def test_metric_value_inverse():
    mv = metric_at(SchwarzschildMetric(1.0), ChartPoint((0, 7, 1.0, 0)))
    assert np.allclose(mv.g @ mv.g_inv, np.eye(4), atol=1e-14)


@pytest.mark.parametrize("mode", ["analytic", "central-difference"])
def test_christoffel_values(mode):
    G = christoffel(SchwarzschildMetric(1.0, mode), ChartPoint.equatorial(0.0, 10.0)).gamma
    assert G[1, 0, 0] == pytest.approx(0.008, abs=1e-9)
    assert G[0, 0, 1] == pytest.approx(0.0125, abs=1e-9)
    assert G[1, 3, 3] == pytest.approx(-8.0, abs=1e-8)
    G6 = christoffel(SchwarzschildMetric(1.0, mode), ChartPoint.equatorial(0.0, 6.0)).gamma
    assert G6[1, 0, 0] == pytest.approx(4 / 216, abs=1e-9)


def test_christoffel_symmetric_and_compatible():
    field = SchwarzschildMetric(1.0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = ChartPoint((rng.uniform(-5, 5), rng.uniform(3, 40), rng.uniform(0.3, 2.8), rng.uniform(0, 6)))
        G = christoffel(field, x).gamma
        assert np.max(np.abs(G - G.transpose(0, 2, 1))) == 0.0
        assert metric_compatibility_residual(field, x) < 1e-8


def test_riemann_flat_vanishes():
    R = riemann(flat_metric(), ChartPoint((0.0, 5.0, 1.0, 0.2))).components
    assert np.max(np.abs(R)) < 1e-10


def test_kretschmann_at_r6():
    R = riemann(SchwarzschildMetric(1.0), ChartPoint.equatorial(0.0, 6.0))
    assert R.kretschmann() == pytest.approx(48 / 6**6, rel=1e-8)


def test_riemann_identities_at_r8():
    R = riemann(SchwarzschildMetric(1.0), ChartPoint((0.0, 8.0, 1.2, 0.3)))
    assert R.antisymmetry_residual() < 1e-9
    assert R.bianchi_residual() < 1e-9


def test_user_metric_matches_builtin():
    M = 1.0

    def g(c):
        f = 1 - 2 * M / c[1]
        return np.diag([f, -1 / f, -c[1] ** 2, -(c[1] * np.sin(c[2])) ** 2])
    x = ChartPoint((0.0, 9.0, 1.0, 0.0))
    G_user = christoffel(UserMetric(g), x).gamma
    G_ref = christoffel(SchwarzschildMetric(M), x).gamma
    assert np.max(np.abs(G_user - G_ref)) < 1e-8


def test_user_metric_signature_guard():
    with pytest.raises(DomainError):
        UserMetric(lambda c: np.eye(4)).components(ChartPoint((0, 1, 1, 0)))
