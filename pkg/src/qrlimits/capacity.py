"""Condenser capacity on node lattices.

A potential is fixed to 1 on ``C`` nodes and 0 outside ``A``; the free values
minimise the p-energy of the piecewise linear interpolant on the Kuhn
triangulation of the lattice. With ``p = n`` the energy is scale invariant and
every admissible lattice potential is an admissible continuous one, so the
minimum is an upper bound for the capacity of the lattice condenser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _pkernels as K
from .errors import ArgumentError, ConvergenceError
from .geometry import as_point, as_points

OUTSIDE, IN_A, IN_C = 0, 1, 2
_TOKENS = {"O": OUTSIDE, "A": IN_A, "C": IN_C}
_NAMES = {v: k for k, v in _TOKENS.items()}

DEFAULT_TOL = 1e-8
MAX_SWEEPS = 50_000


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ring_capacity_exact(n: int, inner: float, outer: float) -> float:
    """``w_{n-1} (log(outer/inner))^(1-n)``, the capacity of a spherical ring."""
    if int(n) != n or n < 2:
        raise ArgumentError("n must be an integer >= 2")
    if not 0 < inner < outer:
        raise ArgumentError("need 0 < inner < outer")
    return sphere_measure(int(n)) * math.log(outer / inner) ** (1 - n)


@dataclass(frozen=True, eq=False)
class CondenserGrid:
    """Node classification on a regular lattice with spacing ``cell_size``.

    ``cls`` holds ``IN_C`` (potential 1), ``IN_A`` (free) and ``OUTSIDE``
    (potential 0) per node; ``origin`` is the position of node ``(0, ..., 0)``.
    Nodes on the lattice border must be ``OUTSIDE``.
    """

    cell_size: float
    cls: np.ndarray
    origin: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.cls)
        if c.ndim < 2:
            raise ArgumentError("condenser grids need n >= 2")
        if min(c.shape) < 3:
            raise ArgumentError("every lattice axis needs at least 3 nodes")
        c = c.astype(np.int8)
        if not np.isin(c, (OUTSIDE, IN_A, IN_C)).all():
            raise ArgumentError("unknown node classification")
        if not self.cell_size > 0:
            raise ArgumentError("cell_size must be positive")
        inner = c[(slice(1, -1),) * c.ndim]
        border = c.size - inner.size
        if border and np.count_nonzero(c) != np.count_nonzero(inner):
            raise ArgumentError("A must stay inside the lattice: border nodes must be OUTSIDE")
        object.__setattr__(self, "cls", c)
        origin = np.zeros(c.ndim) if self.origin is None else as_point(self.origin, c.ndim)
        object.__setattr__(self, "origin", origin)

    @property
    def n(self) -> int:
        return self.cls.ndim

    @property
    def dims(self) -> tuple:
        return self.cls.shape

    @property
    def empty_c(self) -> bool:
        return not np.any(self.cls == IN_C)

    def node_coords(self) -> np.ndarray:
        axes = [self.origin[k] + self.cell_size * np.arange(d) for k, d in enumerate(self.dims)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @classmethod
    def from_predicates(cls, cell_size, lo, shape, in_c, in_a) -> "CondenserGrid":
        """Classify lattice nodes ``lo + h * index`` with vectorised predicates.

        ``in_c`` and ``in_a`` take an (m, n) array and return m booleans. A node
        in ``C`` but not in ``A`` is an error.
        """
        lo = as_point(lo)
        shape = tuple(int(s) for s in shape)
        axes = [lo[k] + cell_size * np.arange(d) for k, d in enumerate(shape)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(shape))
        a = np.asarray(in_a(pts), dtype=bool)
        c = np.asarray(in_c(pts), dtype=bool)
        if np.any(c & ~a):
            raise ArgumentError("C must be contained in A")
        lab = np.where(c, IN_C, np.where(a, IN_A, OUTSIDE)).astype(np.int8).reshape(shape)
        return cls(cell_size, lab, lo)

    @classmethod
    def ring(cls, n: int, inner: float, outer: float, cells_per_outer: int = 64) -> "CondenserGrid":
        """Spherical ring ``|x| <= inner`` inside ``|x| < outer`` on the box ``[-outer, outer]^n``."""
        if not 0 < inner < outer:
            raise ArgumentError("need 0 < inner < outer")
        m = int(cells_per_outer)
        h = outer / m
        shape = (2 * m + 1,) * n
        lo = -outer * np.ones(n)
        idx = np.indices(shape).reshape(n, -1).T - m
        rad = np.linalg.norm(idx * h, axis=1)
        # integer offsets keep the classification exactly symmetric
        lab = np.where(rad <= inner, IN_C, np.where(np.sum(idx * idx, axis=1) < m * m, IN_A, OUTSIDE))
        return cls(h, lab.astype(np.int8).reshape(shape), lo)

    def with_c(self, mask: np.ndarray) -> "CondenserGrid":
        """Same ``A``, with ``C`` replaced by the nodes in ``mask`` (which must lie in ``A``)."""
        mask = np.asarray(mask, dtype=bool)
        inside = self.cls != OUTSIDE
        if np.any(mask & ~inside):
            raise ArgumentError("C must be contained in A")
        lab = np.where(mask, IN_C, np.where(inside, IN_A, OUTSIDE)).astype(np.int8)
        return CondenserGrid(self.cell_size, lab, self.origin)

    def coarsen(self) -> Optional["CondenserGrid"]:
        """Every other node, or ``None`` if some axis length is even or too short."""
        if any(d % 2 == 0 or d < 9 for d in self.dims):
            return None
        sub = self.cls[(slice(None, None, 2),) * self.n]
        return CondenserGrid(2 * self.cell_size, sub, self.origin)

    # -- text format -------------------------------------------------------------

    def to_text(self) -> str:
        """``n cell_size dims...`` then one token per node (``C``, ``A``, ``O``), row-major."""
        head = " ".join([str(self.n), repr(float(self.cell_size))] + [str(d) for d in self.dims])
        flat = self.cls.reshape(-1)
        last = self.dims[-1]
        rows = ["".join(_NAMES[int(v)] for v in flat[i:i + last]) for i in range(0, flat.size, last)]
        org = "# origin " + " ".join(repr(float(v)) for v in self.origin)
        return "\n".join([org, head] + [" ".join(r) for r in rows]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CondenserGrid":
        origin = None
        tokens = []
        for line in text.splitlines():
            s = line.strip()
            if s.startswith("#"):
                parts = s[1:].split()
                if parts and parts[0] == "origin":
                    origin = np.array([float(v) for v in parts[1:]])
                continue
            tokens.extend(s.split())
        if len(tokens) < 4:
            raise ArgumentError("grid text is missing its header")
        try:
            n = int(tokens[0])
            h = float(tokens[1])
            dims = tuple(int(t) for t in tokens[2:2 + n])
        except ValueError:
            raise ArgumentError("malformed grid header") from None
        body = tokens[2 + n:]
        if len(body) != int(np.prod(dims)):
            raise ArgumentError(f"expected {int(np.prod(dims))} node tokens, found {len(body)}")
        try:
            lab = np.array([_TOKENS[t] for t in body], dtype=np.int8).reshape(dims)
        except KeyError as exc:
            raise ArgumentError(f"unknown node token {exc.args[0]!r}") from None
        return cls(h, lab, origin)

    @classmethod
    def read(cls, path) -> "CondenserGrid":
        return cls.from_text(Path(path).read_text())

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())


@dataclass
class CapacityResult:
    value: float
    energies: list
    sweeps: int
    levels: int
    empty_c: bool = False
    potential: Optional[np.ndarray] = field(default=None, repr=False)


def _default_omega(dims, p):
    m = max(dims)
    om = 2.0 / (1.0 + math.sin(math.pi / m))
    if p != 2:
        om = min(om, 1.6)
    return om


def _prolong(u):
    out = u
    for ax in range(u.ndim):
        shp = list(out.shape)
        shp[ax] = 2 * shp[ax] - 1
        nxt = np.empty(shp)
        even = [slice(None)] * u.ndim
        odd = [slice(None)] * u.ndim
        even[ax] = slice(None, None, 2)
        odd[ax] = slice(1, None, 2)
        nxt[tuple(even)] = out
        a = np.take(out, np.arange(out.shape[ax] - 1), axis=ax)
        b = np.take(out, np.arange(1, out.shape[ax]), axis=ax)
        nxt[tuple(odd)] = 0.5 * (a + b)
        out = nxt
    return out


def _relax(grid, u, p, tol, max_sweeps, omega, check_every, backend):
    dims = grid.dims
    offs, pos, cube = K.simplex_tables(dims)
    free, ptr = K.colour_order(grid.cls, IN_A)
    corners = K.cube_corners(dims)
    flat = u.reshape(-1)
    scale = grid.cell_size ** (grid.n - p)
    energies = [K.energy(flat, corners, cube, p, backend) * scale]
    if free.size == 0:
        return energies, 0
    sweeps = 0
    prev_drop = None
    while sweeps < max_sweeps:
        for _ in range(check_every):
            K.sweep(flat, free, ptr, offs, pos, p, omega, backend)
        sweeps += check_every
        e = K.energy(flat, corners, cube, p, backend) * scale
        drop = energies[-1] - e
        energies.append(e)
        if e <= 0:
            return energies, sweeps
        if drop < 0:
            # overrelaxation is not monotone for p != 2; fall back to plain Gauss-Seidel
            omega = 1.0
            prev_drop = None
            continue
        q = drop / prev_drop if prev_drop else 0.0
        q = min(max(q, 0.0), 0.999)
        tail = drop * max(1.0, q / (1.0 - q))
        if tail <= tol * e:
            return energies, sweeps
        prev_drop = drop
    raise ConvergenceError(f"capacity relaxation did not settle within {max_sweeps} sweeps", last=energies[-1], previous=energies[-2])


def solve(
    grid: CondenserGrid,
    tol: float = DEFAULT_TOL,
    *,
    p: Optional[float] = None,
    max_sweeps: int = MAX_SWEEPS,
    omega: Optional[float] = None,
    nested: bool = True,
    check_every: int = 4,
    keep_potential: bool = False,
    backend: Optional[str] = None,
) -> CapacityResult:
    """Minimise the discrete p-energy (``p = n`` by default).

    Relaxation stops when the energy drop over ``check_every`` sweeps,
    extrapolated geometrically to the remaining drop, is below ``tol`` times
    the energy. With ``nested`` the potential is first solved on coarser
    subsampled lattices and interpolated up.
    """
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    p = float(grid.n if p is None else p)
    if not p > 1:
        raise ArgumentError("p must exceed 1")
    if grid.empty_c:
        u = np.zeros(grid.dims)
        return CapacityResult(0.0, [0.0], 0, 1, True, u if keep_potential else None)

    chain = [grid]
    if nested:
        while True:
            c = chain[-1].coarsen()
            if c is None or c.empty_c or not np.any(c.cls == IN_A):
                break
            chain.append(c)
    u = None
    total = 0
    energies = []
    for g in reversed(chain):
        if u is None:
            u = (g.cls == IN_C).astype(float)
        else:
            u = _prolong(u)
            u[g.cls == IN_C] = 1.0
            u[g.cls == OUTSIDE] = 0.0
        u = np.ascontiguousarray(u)
        om = _default_omega(g.dims, p) if omega is None else omega
        energies, sweeps = _relax(g, u, p, tol, max_sweeps, om, check_every, backend)
        total += sweeps
    return CapacityResult(energies[-1], energies, total, len(chain), False, u if keep_potential else None)


def capacity_estimate(grid: CondenserGrid, tol: float = DEFAULT_TOL, **kw) -> float:
    return solve(grid, tol, **kw).value


# -- capacity densities ----------------------------------------------------------

@dataclass
class DensityProfile:
    center: np.ndarray
    radii: np.ndarray
    values: np.ndarray
    empty: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.radii) >= 0) or np.any(self.radii <= 0):
            raise ArgumentError("radii must be positive and strictly decreasing")
        if np.any(self.values < 0):
            raise ArgumentError("capacity values are nonnegative")

    def to_csv(self) -> str:
        lines = ["# center " + " ".join(repr(float(c)) for c in self.center), "r,M,empty"]
        for r, v, e in zip(self.radii, self.values, self.empty):
            lines.append(f"{float(r)!r},{float(v)!r},{int(bool(e))}")
        return "\n".join(lines) + "\n"


SetLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, Sequence]


def density_grid(E: SetLike, b, r: float, resolution: int) -> CondenserGrid:
    """Lattice condenser ``(B(b, 2r), closed B(b, r) and E)`` with ``resolution`` cells across ``B(b, 2r)``."""
    b = as_point(b)
    n = b.size
    if int(resolution) != resolution or resolution < 16 or resolution % 2:
        raise ArgumentError("resolution must be an even integer >= 16")
    if not r > 0:
        raise ArgumentError("radius must be positive")
    m = int(resolution) // 2
    h = 2.0 * r / m
    shape = (2 * m + 1,) * n
    idx = np.indices(shape).reshape(n, -1).T - m
    pts = b + idx * h
    k2 = np.sum(idx * idx, axis=1)
    in_a = k2 < m * m
    in_ball = np.linalg.norm(idx, axis=1) * h <= r
    if callable(E):
        in_e = np.asarray(E(pts), dtype=bool)
    else:
        ep = as_points(E, n)
        in_e = np.zeros(pts.shape[0], dtype=bool)
        if ep.size:
            cell = np.floor((ep - (b - m * h)) / h).astype(np.int64)
            ok = np.all((cell >= 0) & (cell < 2 * m + 1), axis=1)
            st = K.strides(shape)
            in_e[(cell[ok] * st).sum(axis=1)] = True
    in_c = in_ball & in_e & in_a
    lab = np.where(in_c, IN_C, np.where(in_a, IN_A, OUTSIDE)).astype(np.int8).reshape(shape)
    return CondenserGrid(h, lab, b - m * h)


def cap_density_profile(E: SetLike, b, radii, resolution: int = 32, tol: float = 1e-6, **kw) -> DensityProfile:
    """Estimates of ``M(E, r, b) = cap(B(b, 2r), closed B(b, r) and E)`` per radius.

    ``E`` is a vectorised membership predicate or a finite point array; points
    are attached to the lattice node at the lower corner of their cell. Radii
    where no node of ``E`` falls in the closed ball get 0 and an ``empty`` flag.
    """
    radii = np.asarray(radii, dtype=float).reshape(-1)
    if radii.size == 0 or np.any(np.diff(radii) >= 0) or np.any(radii <= 0):
        raise ArgumentError("radii must be positive and strictly decreasing")
    b = as_point(b)
    vals, empty = [], []
    for r in radii:
        g = density_grid(E, b, r, resolution)
        res = solve(g, tol, **kw)
        vals.append(res.value)
        empty.append(res.empty_c)
    return DensityProfile(b, radii, np.array(vals), np.array(empty))
