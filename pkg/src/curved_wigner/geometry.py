"""Metric, Christoffel symbols and Riemann curvature on a 4d chart.

Geometric units (G = c = 1) and signature (+,-,-,-) throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class ChartPoint:
    coords: tuple
    chart_id: str = "schwarzschild"

    def __post_init__(self):
        c = tuple(float(v) for v in np.asarray(self.coords, dtype=float).ravel())
        if len(c) != 4:
            raise ValueError("a chart point needs exactly 4 coordinates")
        object.__setattr__(self, "coords", c)

    @classmethod
    def equatorial(cls, t: float, r: float, phi: float = 0.0, chart_id="schwarzschild"):
        return cls((t, r, np.pi / 2, phi), chart_id)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    @property
    def t(self):
        return self.coords[0]

    @property
    def r(self):
        return self.coords[1]

    @property
    def theta(self):
        return self.coords[2]

    @property
    def phi(self):
        return self.coords[3]

    def shifted(self, axis: int, h: float) -> "ChartPoint":
        c = list(self.coords)
        c[axis] += h
        return ChartPoint(tuple(c), self.chart_id)


@dataclass(frozen=True)
class MetricValue:
    g: np.ndarray
    g_inv: np.ndarray
    det_g: float


@dataclass(frozen=True)
class Connection:
    """Christoffel symbols gamma[a, m, n] = Gamma^a_{mn}."""
    gamma: np.ndarray


@dataclass(frozen=True)
class RiemannTensor:
    """components[m, n, a, b] = R_{mna}^b; `metric` is g_{ab} at the same point."""
    components: np.ndarray
    metric: np.ndarray

    def lowered(self) -> np.ndarray:
        """R_{mnab} = R_{mna}^l g_{lb}."""
        return np.einsum("mnal,lb->mnab", self.components, self.metric)

    def kretschmann(self) -> float:
        low = self.lowered()
        gi = np.linalg.inv(self.metric)
        up = np.einsum("mnab,mi,nj,ak,bl->ijkl", low, gi, gi, gi, gi)
        return float(np.sum(low * up))

    def antisymmetry_residual(self) -> float:
        low = self.lowered()
        r1 = np.max(np.abs(low + low.transpose(1, 0, 2, 3)))
        r2 = np.max(np.abs(low + low.transpose(0, 1, 3, 2)))
        return float(max(r1, r2))

    def bianchi_residual(self) -> float:
        low = self.lowered()
        cyc = low + low.transpose(1, 2, 0, 3) + low.transpose(2, 0, 1, 3)
        return float(np.max(np.abs(cyc)))


# ---------------------------------------------------------------- differences

def step_size(value: float, rel: float = 1e-5) -> float:
    return rel * max(1.0, abs(value))


def central_difference(func: Callable[[ChartPoint], np.ndarray], x: ChartPoint, axis: int,
                       rel: float = 1e-5, order: int = 2, richardson: bool = False) -> np.ndarray:
    """Partial derivative of an array-valued function along one chart axis.

    order=2 is the 3-point stencil, order=4 the 5-point stencil. With
    `richardson` the 3-point result is extrapolated from steps h and h/2.
    """
    h = step_size(x.coords[axis], rel)
    if order == 4:
        f = [np.asarray(func(x.shifted(axis, k * h))) for k in (-2, -1, 1, 2)]
        return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    d1 = (np.asarray(func(x.shifted(axis, h))) - np.asarray(func(x.shifted(axis, -h)))) / (2 * h)
    if not richardson:
        return d1
    h2 = h / 2
    d2 = (np.asarray(func(x.shifted(axis, h2))) - np.asarray(func(x.shifted(axis, -h2)))) / (2 * h2)
    return (4 * d2 - d1) / 3


def gradient(func, x: ChartPoint, rel: float = 1e-5, order: int = 2, richardson: bool = False) -> np.ndarray:
    """Stack d_k func along a new leading axis k."""
    return np.stack([central_difference(func, x, k, rel, order, richardson) for k in range(4)])


# ---------------------------------------------------------------- metric fields

@dataclass(frozen=True)
class SchwarzschildMetric:
    M: float
    derivative_mode: str = "analytic"
    richardson: bool = False

    def __post_init__(self):
        if self.M < 0:
            raise DomainError("mass must be non-negative")
        if self.derivative_mode not in ("analytic", "central-difference"):
            raise ValueError(f"unknown derivative mode {self.derivative_mode!r}")

    def check(self, x: ChartPoint):
        _, r, th, _ = x.coords
        if r <= 2 * self.M or r <= 0:
            raise DomainError(f"r = {r} is not outside the horizon r = {2 * self.M}")
        if np.sin(th) <= 0:
            raise DomainError(f"theta = {th} is on or beyond the polar axis")

    def components(self, x: ChartPoint) -> np.ndarray:
        self.check(x)
        _, r, th, _ = x.coords
        f = 1 - 2 * self.M / r
        return np.diag([f, -1 / f, -r * r, -(r * np.sin(th)) ** 2])

    def derivatives(self, x: ChartPoint) -> Optional[np.ndarray]:
        if self.derivative_mode != "analytic":
            return None
        self.check(x)
        _, r, th, _ = x.coords
        M = self.M
        f = 1 - 2 * M / r
        s, c = np.sin(th), np.cos(th)
        dg = np.zeros((4, 4, 4))
        dg[1] = np.diag([2 * M / r**2, 2 * M / (r**2 * f**2), -2 * r, -2 * r * s * s])
        dg[2, 3, 3] = -2 * r * r * s * c
        return dg

    def second_derivatives(self, x: ChartPoint) -> Optional[np.ndarray]:
        """d2g[k, l, a, b] = d_k d_l g_ab, or None outside analytic mode."""
        if self.derivative_mode != "analytic":
            return None
        self.check(x)
        _, r, th, _ = x.coords
        M = self.M
        f = 1 - 2 * M / r
        s, c = np.sin(th), np.cos(th)
        d2 = np.zeros((4, 4, 4, 4))
        d2[1, 1] = np.diag([-4 * M / r**3, -4 * M / (r**3 * f**2) - 8 * M * M / (r**4 * f**3), -2.0, -2 * s * s])
        d2[1, 2, 3, 3] = d2[2, 1, 3, 3] = -4 * r * s * c
        d2[2, 2, 3, 3] = -2 * r * r * (c * c - s * s)
        return d2


@dataclass(frozen=True)
class UserMetric:
    """Metric given by a function coords -> 4x4 array, with optional derivative dg[k,a,b]."""
    g_func: Callable[[np.ndarray], np.ndarray]
    dg_func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    derivative_mode: str = "central-difference"
    richardson: bool = False

    def check(self, x: ChartPoint):
        det = np.linalg.det(np.asarray(self.g_func(x.array), dtype=float))
        if not np.isfinite(det) or det >= 0:
            raise DomainError(f"metric is degenerate or has wrong signature at {x.coords}")

    def components(self, x: ChartPoint) -> np.ndarray:
        g = np.asarray(self.g_func(x.array), dtype=float)
        det = np.linalg.det(g)
        if not np.isfinite(det) or det >= 0:
            raise DomainError(f"metric is degenerate or has wrong signature at {x.coords}")
        return g

    def derivatives(self, x: ChartPoint) -> Optional[np.ndarray]:
        if self.derivative_mode == "analytic" and self.dg_func is not None:
            return np.asarray(self.dg_func(x.array), dtype=float)
        return None


def flat_metric() -> SchwarzschildMetric:
    return SchwarzschildMetric(0.0)


# ---------------------------------------------------------------- kernels

def metric_at(field, x: ChartPoint) -> MetricValue:
    g = field.components(x)
    g_inv = np.linalg.inv(g)
    return MetricValue(g, g_inv, float(np.linalg.det(g)))


def metric_derivatives(field, x: ChartPoint) -> np.ndarray:
    dg = field.derivatives(x)
    if dg is None:
        dg = gradient(field.components, x, richardson=getattr(field, "richardson", False))
    return dg


def christoffel(field, x: ChartPoint) -> Connection:
    gi = np.linalg.inv(field.components(x))
    dg = metric_derivatives(field, x)
    # lower[b, m, n] = d_m g_bn + d_n g_bm - d_b g_mn
    lower = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    gamma = 0.5 * np.einsum("ab,bmn->amn", gi, lower)
    gamma = 0.5 * (gamma + gamma.transpose(0, 2, 1))
    return Connection(gamma)


def _gamma_array(field, x):
    return christoffel(field, x).gamma


def _analytic_gamma_derivative(field, x):
    """dG[k, a, m, n] = d_k Gamma^a_mn from analytic first and second metric derivatives, if offered."""
    second = getattr(field, "second_derivatives", None)
    d2g = second(x) if second is not None else None
    if d2g is None:
        return None
    gi = np.linalg.inv(field.components(x))
    dg = field.derivatives(x)
    dgi = -np.einsum("ab,kbc,cd->kad", gi, dg, gi)
    lower = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    dlower = d2g.transpose(0, 2, 1, 3) + d2g.transpose(0, 2, 3, 1) - d2g
    return 0.5 * (np.einsum("kab,bmn->kamn", dgi, lower) + np.einsum("ab,kbmn->kamn", gi, dlower))


def riemann(field, x: ChartPoint, rel: float = 1e-3) -> RiemannTensor:
    """R_{mna}^b = d_m G^b_na - d_n G^b_ma + G^b_ml G^l_na - G^b_nl G^l_ma.

    With analytic second metric derivatives the connection derivative is exact;
    otherwise the connection is differenced on a 5-point stencil, which keeps the
    nested difference accurate when the connection is itself differenced.
    """
    G = _gamma_array(field, x)
    dG = _analytic_gamma_derivative(field, x)                             # dG[k, b, n, a]
    if dG is None:
        dG = gradient(lambda y: _gamma_array(field, y), x, rel=rel, order=4)
    term = np.einsum("mbna->mnab", dG)
    quad = np.einsum("bml,lna->mnab", G, G)
    R = term - term.transpose(1, 0, 2, 3) + quad - quad.transpose(1, 0, 2, 3)
    return RiemannTensor(R, field.components(x))


def metric_compatibility_residual(field, x: ChartPoint) -> float:
    """max |nabla_m g_ab| assembled from the returned connection."""
    g = field.components(x)
    dg = gradient(field.components, x, rel=1e-3, order=4)     # wide 5-point stencil: roundoff-free at large r
    G = christoffel(field, x).gamma
    cov = dg - np.einsum("lma,lb->mab", G, g) - np.einsum("lmb,al->mab", G, g)
    return float(np.max(np.abs(cov)))


def inner(g: np.ndarray, a, b) -> float:
    return float(np.asarray(a) @ g @ np.asarray(b))
