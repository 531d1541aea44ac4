"""Example quasiregular maps, dilatation estimates and boundary approach scans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ArgumentError, DegeneratePointError
from .geometry import as_point, as_points, unit

MAP_KINDS = ("mobius", "radial_stretch", "singular_inner")
CURVE_KINDS = ("radial", "cone_ray", "tangential_parabola")
DEFAULT_STEP = 1e-5
DET_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class MapSpec:
    kind: str
    n: int = 2
    a: Optional[np.ndarray] = None
    alpha: float = 2.0

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ArgumentError(f"unknown map kind {self.kind!r}")
        if self.n < 2:
            raise ArgumentError("n must be at least 2")
        if self.kind == "mobius":
            a = as_point(self.a if self.a is not None else np.zeros(self.n), self.n)
            if not float(a @ a) < 1.0:
                raise ArgumentError("the Mobius centre must lie in the open unit ball")
            object.__setattr__(self, "a", a)
        elif self.kind == "radial_stretch":
            if not self.alpha >= 1:
                raise ArgumentError("radial stretch needs alpha >= 1")
        elif self.n != 2:
            raise ArgumentError("singular_inner is planar (n = 2)")

    @classmethod
    def mobius(cls, a) -> "MapSpec":
        a = as_point(a)
        return cls("mobius", a.size, a)

    @classmethod
    def radial_stretch(cls, alpha: float, n: int = 2) -> "MapSpec":
        return cls("radial_stretch", n, alpha=alpha)

    @classmethod
    def singular_inner(cls) -> "MapSpec":
        return cls("singular_inner", 2)

    def label(self) -> str:
        if self.kind == "mobius":
            return f"mobius(a={self.a.tolist()})"
        if self.kind == "radial_stretch":
            return f"radial_stretch(alpha={self.alpha})"
        return "singular_inner"


def _apply(m: MapSpec, pts: np.ndarray) -> np.ndarray:
    if m.kind == "mobius":
        a = m.a
        aa = float(a @ a)
        xa = pts @ a
        xx = np.sum(pts * pts, axis=1)
        diff = pts - a
        dd = np.sum(diff * diff, axis=1)
        num = (1 - aa) * diff - dd[:, None] * a
        den = 1 - 2 * xa + xx * aa
        return num / den[:, None]
    if m.kind == "radial_stretch":
        rad = np.linalg.norm(pts, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(rad > 0, rad ** (m.alpha - 1), 0.0 if m.alpha > 1 else 1.0)
        return pts * scale[:, None]
    z = pts[:, 0] + 1j * pts[:, 1]
    w = np.exp(-(1 + z) / (1 - z))
    return np.stack([w.real, w.imag], axis=1)


def eval_map(m: MapSpec, x) -> np.ndarray:
    """Evaluate at one point or an (k, n) batch of points in the open unit ball."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = as_points(arr, m.n)
    if np.any(np.sum(pts * pts, axis=1) >= 1.0):
        raise ArgumentError("map arguments must lie in the open unit ball")
    out = _apply(m, pts)
    return out[0] if single else out


def jacobian(m: MapSpec, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference Jacobian."""
    x = as_point(x, m.n)
    if not h > 0:
        raise ArgumentError("step must be positive")
    if not 1.0 - np.linalg.norm(x) > h:
        raise ArgumentError("the point must sit more than h inside the ball")
    eye = np.eye(m.n)
    fp = _apply(m, x[None, :] + h * eye)
    fm = _apply(m, x[None, :] - h * eye)
    return ((fp - fm) / (2 * h)).T


def dilatation_estimate(m: MapSpec, x, h: float = DEFAULT_STEP) -> float:
    """``max(s_max^n / |det|, |det| / s_min^n)`` from a finite-difference Jacobian."""
    jac = jacobian(m, x, h)
    det = abs(float(np.linalg.det(jac)))
    if det < DET_FLOOR:
        raise DegeneratePointError(f"|det Df| = {det:.3e} below {DET_FLOOR:g} at {np.asarray(x).tolist()}")
    sv = np.linalg.svd(jac, compute_uv=False)
    n = m.n
    return max(sv[0] ** n / det, det / sv[-1] ** n)


@dataclass(frozen=True, eq=False)
class ApproachCurve:
    """A curve ending at the boundary point ``b``, parametrised by ``r = |x - b|``.

    ``cone_ray`` leaves ``b`` at ``angle`` from the inward normal.
    ``tangential_parabola`` is ``1 - z = t (i + kappa t)`` in the complex
    coordinate of the plane spanned by ``b`` and ``transverse``; it is tangent
    to the sphere at ``b`` and stays inside the ball for ``kappa > 1/2``.
    """

    kind: str
    n: int = 2
    b: Optional[np.ndarray] = None
    angle: float = 0.0
    kappa: float = 1.0
    transverse: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ArgumentError(f"unknown curve kind {self.kind!r}")
        b = as_point(self.b if self.b is not None else unit(self.n, 0), self.n)
        if abs(np.linalg.norm(b) - 1.0) > 1e-12:
            raise ArgumentError("the target b must be a unit vector")
        b = b / np.linalg.norm(b)
        if self.transverse is None:
            k = int(np.argmin(np.abs(b)))
            e = unit(self.n, k)
        else:
            e = as_point(self.transverse, self.n)
        e = e - (e @ b) * b
        if np.linalg.norm(e) < 1e-12:
            raise ArgumentError("transverse direction is parallel to b")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "transverse", e / np.linalg.norm(e))
        if self.kind == "cone_ray" and not 0 <= self.angle < math.pi / 2:
            raise ArgumentError("cone_ray angle must lie in [0, pi/2)")
        if self.kind == "tangential_parabola" and not self.kappa > 0.5:
            raise ArgumentError("the parabola leaves the ball unless kappa > 1/2")

    def points(self, radii) -> np.ndarray:
        r = np.asarray(radii, dtype=float).reshape(-1)
        if np.any(r <= 0):
            raise ArgumentError("radii must be positive")
        b, e = self.b, self.transverse
        if self.kind == "radial":
            pts = (1 - r)[:, None] * b
        elif self.kind == "cone_ray":
            d = -math.cos(self.angle) * b + math.sin(self.angle) * e
            pts = b + r[:, None] * d
        else:
            k = self.kappa
            # |t (i + k t)| = r  ->  k^2 t^4 + t^2 - r^2 = 0, root taken without cancellation
            t2 = 2 * r * r / (1 + np.sqrt(1 + 4 * k * k * r * r))
            t = np.sqrt(t2)
            pts = (1 - k * t2)[:, None] * b - t[:, None] * e
        if np.any(np.sum(pts * pts, axis=1) >= 1.0):
            raise ArgumentError(f"the {self.kind} curve leaves the unit ball at some requested radius")
        return pts


def parabola_limit(kappa: float = 1.0) -> float:
    """Limit of ``|exp(-(1+z)/(1-z))|`` along ``1 - z = t (i + kappa t)``, ``t -> 0``."""
    return math.exp(-(2 * kappa - 1))


def boundary_scan(m: MapSpec, curve: ApproachCurve, radii) -> np.ndarray:
    """Rows ``(r, |f(x_r)|)`` in the order of ``radii``."""
    if curve.n != m.n:
        raise ArgumentError("curve and map live in different dimensions")
    r = np.asarray(radii, dtype=float).reshape(-1)
    vals = np.linalg.norm(eval_map(m, curve.points(r)), axis=1)
    return np.column_stack([r, vals])


def scan_csv(m: MapSpec, curve: ApproachCurve, rows: np.ndarray) -> str:
    head = f"# map: {m.label()}\n# curve: {curve.kind}"
    if curve.kind == "cone_ray":
        head += f" angle={curve.angle!r}"
    elif curve.kind == "tangential_parabola":
        head += f" kappa={curve.kappa!r}"
    lines = [head, "r,abs_f"] + [f"{float(r)!r},{float(v)!r}" for r, v in rows]
    return "\n".join(lines) + "\n"


def dyadic_radii(start: int = 1, stop: int = 20) -> np.ndarray:
    return 2.0 ** -np.arange(start, stop + 1, dtype=float)
