"""Hyperbolic-type metrics: hyperbolic rho, distance ratio j, quasihyperbolic k.

``rho`` and ``j`` are closed forms. ``k`` has no closed form and is estimated by
a shortest path through a layered graph of interior points (see
:func:`k_dist_estimate`); every graph path is an actual curve, so the
estimate approaches ``k`` from above as the graph is refined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import _kgraph
from .errors import ArgumentError, ConvergenceError
from .geometry import as_point, as_points

CLOSED_FORM_TOL = 1e-9
K_TOL = 1e-3


class MetricKind(str, Enum):
    RHO = "rho"
    J = "j"
    K = "k"


@dataclass(frozen=True)
class Domain:
    """A proper subdomain ``G`` of R^n described by its boundary distance.

    For ``kind == "unit-ball"`` the distance is ``1 - |x|``. For general
    domains ``boundary_distance`` maps an (m, n) array to m distances and must
    return a nonpositive value for points outside ``G``.
    """

    kind: str = "unit-ball"
    n: Optional[int] = None
    boundary_distance: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    transverse: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("unit-ball", "general"):
            raise ArgumentError(f"unknown domain kind {self.kind!r}")
        if self.kind == "general" and self.boundary_distance is None:
            raise ArgumentError("a general domain needs a boundary_distance callable")

    @classmethod
    def unit_ball(cls, n: Optional[int] = None) -> "Domain":
        return cls("unit-ball", n)

    @classmethod
    def general(cls, boundary_distance, n: Optional[int] = None, transverse=None) -> "Domain":
        return cls("general", n, boundary_distance, transverse)

    @property
    def is_ball(self) -> bool:
        return self.kind == "unit-ball"

    def distance(self, points) -> np.ndarray:
        pts = as_points(points, self.n)
        if self.is_ball:
            return 1.0 - np.linalg.norm(pts, axis=1)
        return np.asarray(self.boundary_distance(pts), dtype=float).reshape(-1)

    def require_interior(self, *points) -> list:
        out = []
        for p in points:
            p = as_point(p, self.n)
            d = self.distance(p[None, :])[0]
            if not d > 0:
                where = "unit ball" if self.is_ball else "domain"
                raise ArgumentError(f"point {p.tolist()} is not interior to the {where} (d = {d!r})")
            out.append(p)
        return out


UNIT_BALL = Domain.unit_ball()


def _ball_point(x, n=None) -> np.ndarray:
    p = as_point(x, n)
    if not float(p @ p) < 1.0:
        raise ArgumentError(f"point {p.tolist()} is not inside the unit ball")
    return p


def rho(x, y) -> float:
    """Hyperbolic distance in the unit ball via ``sinh^2(rho/2) = |x-y|^2 / ((1-|x|^2)(1-|y|^2))``."""
    x = _ball_point(x)
    y = _ball_point(y, x.size)
    d2 = float(np.sum((x - y) ** 2))
    return 2.0 * math.asinh(math.sqrt(d2 / ((1.0 - x @ x) * (1.0 - y @ y))))


def rho_radial(s: float, t: float) -> float:
    """``rho(s e1, t e1) = log((1+t)/(1-t) * (1-s)/(1+s))`` for ``t in (0,1)``, ``s in [-t, t]``."""
    if not 0.0 < t < 1.0:
        raise ArgumentError(f"t must lie in (0, 1), got {t!r}")
    if not -t <= s <= t:
        raise ArgumentError(f"s must lie in [-t, t], got {s!r}")
    return math.log1p(t) - math.log1p(-t) + math.log1p(-s) - math.log1p(s)


def rho_many(xs, ys) -> np.ndarray:
    xs = as_points(xs)
    ys = as_points(ys, xs.shape[1])
    d2 = np.sum((xs - ys) ** 2, axis=1)
    den = (1.0 - np.sum(xs**2, axis=1)) * (1.0 - np.sum(ys**2, axis=1))
    if np.any(den <= 0):
        raise ArgumentError("all points must lie inside the unit ball")
    return 2.0 * np.arcsinh(np.sqrt(d2 / den))


def j_dist(dom: Domain, x, y) -> float:
    x, y = dom.require_interior(x, y)
    d = dom.distance(np.stack([x, y]))
    return math.log1p(float(np.linalg.norm(x - y)) / float(d.min()))


def j_many(dom: Domain, xs, ys) -> np.ndarray:
    xs = as_points(xs, dom.n)
    ys = as_points(ys, xs.shape[1])
    dx, dy = dom.distance(xs), dom.distance(ys)
    if np.any(dx <= 0) or np.any(dy <= 0):
        raise ArgumentError("all points must be interior to the domain")
    return np.log1p(np.linalg.norm(xs - ys, axis=1) / np.minimum(dx, dy))


# -- quasihyperbolic distance ---------------------------------------------------

@dataclass
class KEstimate:
    value: float
    levels: list
    nodes: np.ndarray = field(repr=False)


def _mob(z, a):
    """Disk automorphism ``z -> (z - a) / (1 - conj(a) z)``."""
    return (z - a) / (1.0 - np.conj(a) * z)


def _mob_inv(z, a):
    return (z + a) / (1.0 + np.conj(a) * z)


def _plane_frame(x, y, through_origin: bool, transverse=None):
    n = x.size
    if through_origin:
        base = x if np.linalg.norm(x) > 1e-14 else y
    else:
        base = y - x
    e1 = base / np.linalg.norm(base)
    if through_origin:
        cand = y - (y @ e1) * e1
    elif transverse is not None:
        t = as_point(transverse, n)
        cand = t - (t @ e1) * e1
    else:
        cand = np.zeros(n)
    if np.linalg.norm(cand) < 1e-14 * (1.0 + np.linalg.norm(y)):
        k = int(np.argmin(np.abs(e1)))
        cand = np.zeros(n)
        cand[k] = 1.0
        cand -= (cand @ e1) * e1
    e2 = cand / np.linalg.norm(cand)
    return e1, e2


class _BallFermi:
    """Fermi coordinates ``(tau, w)`` about the hyperbolic geodesic from x to y.

    ``tau`` is hyperbolic arclength along the geodesic, ``w`` the signed
    hyperbolic distance along the perpendicular geodesic.
    """

    def __init__(self, x, y):
        self.e1, self.e2 = _plane_frame(x, y, through_origin=True)
        p = complex(x @ self.e1, x @ self.e2)
        q = complex(y @ self.e1, y @ self.e2)
        w = _mob(q, p)
        self.p = p
        self.u = w / abs(w)
        self.length = 2.0 * math.atanh(abs(w))

    def nodes(self, taus, offsets):
        zeta = np.tanh(taus / 2.0)[:, None] * self.u
        v = 1j * self.u * np.tanh(offsets / 2.0)
        z = _mob_inv(_mob_inv(v, zeta), self.p)
        return np.stack([z.real, z.imag], axis=-1)

    def weights(self, nodes, min_rule):
        return _kgraph.ball_edge_weights(nodes, min_rule)

    def embed(self, nodes):
        return nodes[..., :1] * self.e1 + nodes[..., 1:] * self.e2


class _ChordFermi:
    """Offsets from the chord ``[x, y]`` measured in units of the local boundary distance."""

    def __init__(self, dom: Domain, x, y):
        self.dom = dom
        self.x = x
        self.e1, self.e2 = _plane_frame(x, y, through_origin=False, transverse=self._transverse(dom, x, y))
        self.chord_len = float(np.linalg.norm(y - x))
        s = np.linspace(0.0, self.chord_len, 513)
        d = dom.distance(x[None, :] + s[:, None] * self.e1[None, :])
        if np.any(d <= 0):
            raise ArgumentError("the chord between the points leaves the domain; general domains must be star-shaped about the chord")
        inv = 1.0 / d
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (inv[1:] + inv[:-1]) * np.diff(s))])
        self._s, self._cum = s, cum
        self.length = float(cum[-1])

    @staticmethod
    def _transverse(dom, x, y):
        if dom.transverse is not None:
            return dom.transverse
        mid = 0.5 * (x + y)
        h = 1e-6 * max(1.0, float(np.linalg.norm(mid)))
        eye = np.eye(x.size)
        plus = dom.distance(mid[None, :] + h * eye)
        minus = dom.distance(mid[None, :] - h * eye)
        return (plus - minus) / (2.0 * h)

    def nodes(self, taus, offsets):
        s = np.interp(taus, self._cum, self._s)
        base = self.x[None, :] + s[:, None] * self.e1[None, :]
        scale = self.dom.distance(base)
        pts = base[:, None, :] + (offsets * scale[:, None])[..., None] * self.e2[None, None, :]
        return pts

    def weights(self, nodes, min_rule):
        return _kgraph.general_edge_weights(nodes, self.dom.distance, min_rule)

    def embed(self, nodes):
        return nodes


def k_dist_estimate(
    dom: Domain,
    x,
    y,
    tol: float = K_TOL,
    *,
    max_levels: int = 10,
    min_levels: int = 2,
    band: int = 6,
    curvature: float = 0.15,
    level0_halfwidth: float = 1.0,
    edge_rule: str = "gauss",
    full: bool = False,
):
    """Quasihyperbolic distance ``k_G(x, y)`` from refined layered graphs.

    Level 0 is a coarse grid of ``M0 = ceil(L / 0.5)`` layers across a
    reference curve of length ``L`` (the hyperbolic geodesic in the ball, the
    chord otherwise) with offsets spanning ``±level0_halfwidth``. Each further
    level doubles the layer count and keeps ``2 * band + 1`` offsets per layer,
    spaced ``curvature * eta**2`` around the previous optimal path, so slope
    resolution improves together with layer spacing ``eta``.

    Refinement stops once two successive levels agree to within ``tol``.
    ``edge_rule="min"`` uses ``|u - v| / min(d(u), d(v))`` per edge (first-order
    upper bias); the default integrates ``1/d`` along the edge with 4-point
    Gauss-Legendre.

    Returns a float, or a :class:`KEstimate` when ``full`` is true.
    """
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    if edge_rule not in ("gauss", "min"):
        raise ArgumentError(f"unknown edge rule {edge_rule!r}")
    x, y = dom.require_interior(x, y)
    if np.array_equal(x, y):
        return KEstimate(0.0, [0.0], np.stack([x, y])) if full else 0.0

    frame = _BallFermi(x, y) if dom.is_ball else _ChordFermi(dom, x, y)
    min_rule = edge_rule == "min"
    length = frame.length
    m0 = max(4, math.ceil(length / 0.5))
    width = 2 * band + 1

    def solve(m, offsets):
        taus = np.linspace(0.0, length, m + 1)
        offsets = offsets.copy()
        offsets[0] = 0.0
        offsets[-1] = 0.0
        nodes = frame.nodes(taus, offsets)
        cost, path = _kgraph.layered_min_path(frame.weights(nodes, min_rule))
        return cost, taus, offsets[np.arange(m + 1), path], nodes[np.arange(m + 1), path], path

    half = level0_halfwidth
    for _ in range(6):
        offsets = np.tile(np.linspace(-half, half, width), (m0 + 1, 1))
        cost, taus, wpath, npath, path = solve(m0, offsets)
        interior = path[1:-1]
        if not np.any((interior == 0) | (interior == width - 1)):
            break
        half *= 2.0

    estimates = [cost]
    m = m0
    for level in range(1, max_levels + 1):
        m *= 2
        eta = length / m
        h = curvature * eta * eta
        new_taus = np.linspace(0.0, length, m + 1)
        center = np.interp(new_taus, taus, wpath)
        grid = np.arange(-band, band + 1) * h
        for _ in range(4):
            cost, taus_l, wpath_l, npath_l, path = solve(m, center[:, None] + grid[None, :])
            interior = path[1:-1]
            if not np.any((interior == 0) | (interior == width - 1)):
                break
            center = wpath_l
        taus, wpath, npath = taus_l, wpath_l, npath_l
        estimates.append(cost)
        if level >= min_levels and abs(estimates[-1] - estimates[-2]) < 0.5 * tol:
            value = estimates[-1]
            if full:
                return KEstimate(value, estimates, frame.embed(npath))
            return value
    raise ConvergenceError(
        f"k estimate did not settle to tol={tol} within {max_levels} refinements",
        last=estimates[-1],
        previous=estimates[-2],
    )


# -- set diameters and closed-form bounds -----------------------------------------

def distance(dom: Domain, kind, x, y, k_tol: float = K_TOL) -> float:
    kind = MetricKind(kind)
    if kind is MetricKind.RHO:
        if not dom.is_ball:
            raise ArgumentError("rho is only defined here for the unit ball")
        return rho(x, y)
    if kind is MetricKind.J:
        return j_dist(dom, x, y)
    return k_dist_estimate(dom, x, y, k_tol)


def set_diameter(dom: Domain, kind, points, k_tol: float = K_TOL) -> float:
    """Largest pairwise distance over a finite point set.

    For ``k`` the pairs are visited in decreasing ``rho`` (ball) or ``2 j``
    order and the scan stops once that upper bound cannot beat the running
    maximum, which keeps the number of graph estimates small.
    """
    kind = MetricKind(kind)
    pts = as_points(points, dom.n)
    if pts.shape[0] == 0:
        raise ArgumentError("set diameter of an empty point list")
    dist = dom.distance(pts)
    if np.any(dist <= 0):
        raise ArgumentError("all points must be interior to the domain")
    m = pts.shape[0]
    if m == 1:
        return 0.0
    if kind is MetricKind.RHO:
        if not dom.is_ball:
            raise ArgumentError("rho is only defined here for the unit ball")
        return _kgraph.pairwise_max(pts, 0)
    if kind is MetricKind.J:
        if dom.is_ball:
            return _kgraph.pairwise_max(pts, 1)
        i, j = np.triu_indices(m, 1)
        return float(j_many(dom, pts[i], pts[j]).max())

    i, j = np.triu_indices(m, 1)
    if dom.is_ball:
        upper = rho_many(pts[i], pts[j])
        slack = 0.0
    else:
        # k <= 2 j holds in uniform domains only; fall back to visiting every pair
        upper = np.full(i.size, np.inf)
        slack = 0.0
    order = np.argsort(-upper, kind="stable")
    best = 0.0
    for idx in order:
        if upper[idx] + slack <= best:
            break
        best = max(best, k_dist_estimate(dom, pts[i[idx]], pts[j[idx]], k_tol))
    return best


def _check_cone_params(a, phi, r):
    if not 0.0 < a < 1.0:
        raise ArgumentError(f"a must lie in (0, 1), got {a!r}")
    if not 0.0 < phi < math.pi / 2:
        raise ArgumentError(f"phi must lie in (0, pi/2), got {phi!r}")
    if not 0.0 < r < math.cos(phi):
        raise ArgumentError(f"r must lie in (0, cos(phi)), got {r!r}")


def cone_shell_u(a: float, phi: float) -> float:
    """``u(a, phi) = sqrt((1+a)^2 tan^2 phi + (1-a)^2)``; the shell's enclosing ball has radius ``r u / 2``."""
    return math.sqrt((1 + a) ** 2 * math.tan(phi) ** 2 + (1 - a) ** 2)


def j_cone_diameter_bound(a: float, phi: float, r: float) -> float:
    """Upper bound for the j-diameter of the cone shell between radii ``a r`` and ``r``."""
    _check_cone_params(a, phi, r)
    u = cone_shell_u(a, phi)
    return math.log1p((2 + a * r) * u / (a * (2 * math.cos(phi) - a * r)))


def k_cone_diameter_bound(a: float, phi: float, r: float, r_free: bool = False) -> float:
    """Twice the j bound, or its radius-free majorant when ``r_free``."""
    _check_cone_params(a, phi, r)
    if not r_free:
        return 2.0 * j_cone_diameter_bound(a, phi, r)
    c = math.cos(phi)
    return 2.0 * math.log1p((2 + a * c) * (1 + a) / (a * (2 - a) * c * c))


def s_bound(r: float, phi: float) -> float:
    """``s(r, phi) = log((2+r)^2 / (r (2 cos phi - r)))``: bounds ``rho(0, x)`` for cone points at ``|x-b| = r``."""
    if not 0.0 < phi < math.pi / 2:
        raise ArgumentError(f"phi must lie in (0, pi/2), got {phi!r}")
    if not 0.0 < r < math.cos(phi):
        raise ArgumentError(f"r must lie in (0, cos(phi)), got {r!r}")
    return math.log((2 + r) ** 2 / (r * (2 * math.cos(phi) - r)))
