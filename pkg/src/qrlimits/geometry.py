"""Euclidean regions near a boundary point of the unit ball.

Cones ``C(b, phi)`` with vertex ``b`` on the unit sphere, truncated cones
``R(b, phi, r, s)``, balls, the tangential approach set ``G_{b,phi}`` and
seeded rejection samplers for them.

All regions are open. Points within ``BOUNDARY_TOL`` of a boundary are treated
as boundary points and excluded, so that mathematically tight cases such as
``|x - b| = cos(pi/3)`` do not flip on the last bit of ``cos``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ArgumentError, SamplingError

BOUNDARY_TOL = 1e-12
UNIT_TOL = 1e-12
MAX_ATTEMPTS = 10**7
MIN_ACCEPTANCE = 1e-6


def as_point(x, n: int | None = None) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ArgumentError(f"a point needs a 1-d coordinate list of length >= 2, got shape {p.shape}")
    if n is not None and p.size != n:
        raise ArgumentError(f"dimension mismatch: expected {n} coordinates, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ArgumentError("point coordinates must be finite")
    return p


def as_points(xs, n: int | None = None) -> np.ndarray:
    pts = np.asarray(xs, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ArgumentError(f"expected an (m, n) array of points, got shape {pts.shape}")
    if n is not None and pts.shape[1] != n:
        raise ArgumentError(f"dimension mismatch: expected {n} coordinates, got {pts.shape[1]}")
    return pts


def unit(n: int, axis: int = 0) -> np.ndarray:
    e = np.zeros(n)
    e[axis] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """Open cone ``C(b, phi)``, cut off at ``|x - b| < cos(phi)``."""

    vertex: np.ndarray
    half_angle: float

    def __post_init__(self):
        b = as_point(self.vertex)
        if abs(np.linalg.norm(b) - 1.0) > UNIT_TOL:
            raise ArgumentError(f"cone vertex must lie on the unit sphere, |b| = {np.linalg.norm(b)!r}")
        if not 0.0 < self.half_angle < np.pi / 2:
            raise ArgumentError(f"half angle must lie in (0, pi/2), got {self.half_angle!r}")
        object.__setattr__(self, "vertex", b)
        object.__setattr__(self, "half_angle", float(self.half_angle))

    @property
    def n(self) -> int:
        return self.vertex.size

    @property
    def reach(self) -> float:
        return float(np.cos(self.half_angle))

    def __repr__(self):
        return f"ConeSpec(vertex={self.vertex.tolist()}, half_angle={self.half_angle:.6g})"


@dataclass(frozen=True, eq=False)
class TruncatedConeSpec:
    """``R(b, phi, r_outer, r_inner)``: the cone between two spheres about ``b``."""

    cone: ConeSpec
    r_outer: float
    r_inner: float

    def __post_init__(self):
        c = self.cone.reach
        if not c > self.r_outer > self.r_inner > 0:
            raise ArgumentError(
                f"need cos(phi) > r_outer > r_inner > 0, got {c!r}, {self.r_outer!r}, {self.r_inner!r}"
            )
        object.__setattr__(self, "r_outer", float(self.r_outer))
        object.__setattr__(self, "r_inner", float(self.r_inner))

    @classmethod
    def shell(cls, vertex, phi: float, r: float, a: float) -> "TruncatedConeSpec":
        """The shell between radii ``a*r`` and ``r``, written ``R(b, phi, ar, r)`` in diameter estimates."""
        return cls(ConeSpec(vertex, phi), r, a * r)

    @property
    def n(self) -> int:
        return self.cone.n

    def __repr__(self):
        return f"TruncatedConeSpec({self.cone!r}, r_outer={self.r_outer:.6g}, r_inner={self.r_inner:.6g})"


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ArgumentError(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, n: int) -> "Ball":
        return cls(np.zeros(n), 1.0)

    @property
    def n(self) -> int:
        return self.center.size

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius:.6g})"


Region = Union[ConeSpec, TruncatedConeSpec, Ball]


class AngleProfile:
    """A decreasing opening angle ``phi(r)`` given by samples, interpolated monotonically.

    The samples must satisfy ``0 < phi < pi/2`` and ``r < cos(phi(r))``; ``phi``
    must strictly decrease as ``r`` grows.
    """

    def __init__(self, radii, angles):
        r = np.asarray(radii, dtype=float)
        phi = np.asarray(angles, dtype=float)
        if r.ndim != 1 or r.shape != phi.shape or r.size < 2:
            raise ArgumentError("angle profile needs matching 1-d radius and angle samples (at least 2)")
        order = np.argsort(r)
        r, phi = r[order], phi[order]
        if np.any(np.diff(r) <= 0):
            raise ArgumentError("angle profile radii must be distinct")
        if np.any(r <= 0) or np.any(r >= 1):
            raise ArgumentError("angle profile radii must lie in (0, 1)")
        if np.any(phi <= 0) or np.any(phi >= np.pi / 2):
            raise ArgumentError("angles must lie in (0, pi/2)")
        if np.any(np.diff(phi) >= 0):
            raise ArgumentError("phi(r) must be strictly decreasing in r")
        if np.any(r >= np.cos(phi)):
            bad = r[r >= np.cos(phi)][0]
            raise ArgumentError(f"need r < cos(phi(r)); violated at r = {bad!r}")
        self.radii = r
        self.angles = phi
        self._interp = PchipInterpolator(r, phi, extrapolate=False)

    @classmethod
    def from_function(cls, func, radii) -> "AngleProfile":
        r = np.asarray(radii, dtype=float)
        return cls(r, np.array([func(v) for v in r]))

    @property
    def r_min(self) -> float:
        return float(self.radii[0])

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r_min) or np.any(r > self.r_max):
            raise ArgumentError(f"radius outside the tabulated range [{self.r_min:.3g}, {self.r_max:.3g}]")
        out = self._interp(r)
        return float(out) if out.ndim == 0 else out


# -- membership ---------------------------------------------------------------

def cone_mask(points, cone: ConeSpec) -> np.ndarray:
    pts = as_points(points, cone.n)
    b = cone.vertex
    diff = b[None, :] - pts
    dist = np.linalg.norm(diff, axis=1)
    axial = diff @ b
    c = cone.reach
    return (axial > dist * c + BOUNDARY_TOL) & (dist < c - BOUNDARY_TOL)


def truncated_cone_mask(points, t: TruncatedConeSpec) -> np.ndarray:
    pts = as_points(points, t.n)
    dist = np.linalg.norm(pts - t.cone.vertex[None, :], axis=1)
    shell = (dist > t.r_inner + BOUNDARY_TOL) & (dist < t.r_outer - BOUNDARY_TOL)
    return shell & cone_mask(pts, t.cone)


def ball_mask(points, ball: Ball) -> np.ndarray:
    pts = as_points(points, ball.n)
    return np.linalg.norm(pts - ball.center[None, :], axis=1) < ball.radius - BOUNDARY_TOL


def region_mask(points, region: Region) -> np.ndarray:
    if isinstance(region, TruncatedConeSpec):
        return truncated_cone_mask(points, region)
    if isinstance(region, ConeSpec):
        return cone_mask(points, region)
    if isinstance(region, Ball):
        return ball_mask(points, region)
    raise ArgumentError(f"unsupported region type {type(region).__name__}")


def in_cone(x, c: ConeSpec) -> bool:
    return bool(cone_mask(as_point(x, c.n)[None, :], c)[0])


def in_truncated_cone(x, t: TruncatedConeSpec) -> bool:
    return bool(truncated_cone_mask(as_point(x, t.n)[None, :], t)[0])


def approach_angle(x, b) -> float:
    """Angle at ``b`` between ``x - b`` and the inward normal ``-b``."""
    x = as_point(x)
    b = as_point(b, x.size)
    dist = np.linalg.norm(x - b)
    if dist == 0.0:
        raise ArgumentError("approach angle undefined at the vertex itself")
    ratio = abs(float(x @ b) - 1.0) / dist
    return float(np.arccos(min(ratio, 1.0)))


def in_tangential_set(x, b, profile: AngleProfile) -> bool:
    """Membership in ``G_{b,phi} = {x : arccos(|<x,b> - 1| / |x - b|) < phi(|x - b|)}``."""
    x = as_point(x)
    b = as_point(b, x.size)
    if abs(np.linalg.norm(b) - 1.0) > UNIT_TOL:
        raise ArgumentError("b must lie on the unit sphere")
    dist = float(np.linalg.norm(x - b))
    if dist == 0.0:
        raise ArgumentError("x = b: the angle ratio is undefined")
    return approach_angle(x, b) < profile(dist) - BOUNDARY_TOL


# -- sampling -----------------------------------------------------------------

def _uniform_ball(rng, m, n, center, radius):
    g = rng.standard_normal((m, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * rng.random(m) ** (1.0 / n)
    return center[None, :] + rad[:, None] * g


def _inward_half_ball(rng, m, b, radius):
    """Uniform points of ``B(b, radius)`` with ``<b, b - x> >= 0``."""
    n = b.size
    g = rng.standard_normal((m, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    along = g @ b
    g -= 2.0 * np.maximum(along, 0.0)[:, None] * b[None, :]
    rad = radius * rng.random(m) ** (1.0 / n)
    return b[None, :] + rad[:, None] * g


def sample_region(region: Region, count: int, seed: int, max_attempts: int = MAX_ATTEMPTS) -> np.ndarray:
    """Draw ``count`` points uniformly from ``region`` by rejection.

    Candidates come from the bounding ball ``B(b, r_outer)`` restricted to the
    inward half-space at ``b`` (or from the ball itself). Raises
    :class:`SamplingError` if ``max_attempts`` candidates do not suffice.
    """
    if count < 1:
        raise ArgumentError("count must be at least 1")
    rng = np.random.default_rng(seed)
    if isinstance(region, Ball):
        return _uniform_ball(rng, count, region.n, region.center, region.radius)
    if isinstance(region, TruncatedConeSpec):
        b, radius = region.cone.vertex, region.r_outer
    elif isinstance(region, ConeSpec):
        b, radius = region.vertex, region.reach
    else:
        raise ArgumentError(f"unsupported region type {type(region).__name__}")

    out = []
    accepted = attempts = 0
    batch = max(1024, 2 * count)
    while accepted < count:
        if attempts >= max_attempts:
            raise SamplingError(region, attempts, accepted)
        m = min(batch, max_attempts - attempts)
        cand = _inward_half_ball(rng, m, b, radius)
        keep = cand[region_mask(cand, region)]
        attempts += m
        out.append(keep)
        accepted += keep.shape[0]
        rate = max(accepted / attempts, MIN_ACCEPTANCE)
        batch = int(min(2**20, max(1024, 1.2 * (count - accepted) / rate)))
    return np.concatenate(out)[:count]


def sample_cone_sphere(cone: ConeSpec, radius: float, count: int, seed: int) -> np.ndarray:
    """Uniform points on ``{|x - b| = radius} ∩ C(b, phi)``."""
    if not 0 < radius < cone.reach:
        raise ArgumentError(f"radius must lie in (0, cos(phi)), got {radius!r}")
    rng = np.random.default_rng(seed)
    b = cone.vertex
    out = []
    accepted = attempts = 0
    while accepted < count:
        if attempts >= MAX_ATTEMPTS:
            raise SamplingError(f"sphere of radius {radius} in {cone!r}", attempts, accepted)
        rate = max(accepted / attempts, MIN_ACCEPTANCE) if attempts else 0.25
        m = int(min(2**20, max(1024, 1.2 * (count - accepted) / rate)))
        g = rng.standard_normal((m, b.size))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        cand = b[None, :] + radius * g
        keep = cand[cone_mask(cand, cone)]
        attempts += m
        out.append(keep)
        accepted += keep.shape[0]
    return np.concatenate(out)[:count]


def random_rotation(n: int, rng) -> np.ndarray:
    """Haar-random orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))[None, :]
