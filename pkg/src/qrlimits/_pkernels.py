"""Lattice kernels for the discrete p-energy of a condenser potential.

The lattice cube ``[0,1]^n`` is split into ``n!`` Kuhn simplices, one per axis
permutation ``s``: the path ``c, c + e_s1, c + e_s1 + e_s2, ...``. On each
simplex a piecewise linear ``u`` has gradient whose components are the path
differences, so ``|grad u|^p`` needs no geometry beyond those differences.
Every node belongs to ``(n+1)!`` simplices (a permutation and a position on
its path).

Sweeps visit free nodes colour by colour, the colour being the parity vector
of the node's multi-index. Two nodes sharing a simplex always differ in some
parity, so nodes of one colour are decoupled and a colour can be relaxed in
any order (or all at once) with the same result.
"""
import itertools
import math

import numpy as np

from . import _accel
from ._accel import njit


def strides(dims):
    st = np.ones(len(dims), dtype=np.int64)
    for ax in range(len(dims) - 2, -1, -1):
        st[ax] = st[ax + 1] * dims[ax + 1]
    return st


def simplex_tables(dims):
    """Flat offsets of the simplices around a node and around a cube corner.

    Returns ``(node_offs, node_pos, cube_offs)`` where ``node_offs[s]`` lists the
    ``n + 1`` path vertices of incident simplex ``s`` relative to the node,
    ``node_pos[s]`` is the node's place on that path and ``cube_offs[q]`` lists
    the path of permutation ``q`` relative to the cube's lower corner.
    """
    n = len(dims)
    st = strides(dims)
    perms = list(itertools.permutations(range(n)))
    cube = np.empty((len(perms), n + 1), dtype=np.int64)
    for q, perm in enumerate(perms):
        acc = 0
        cube[q, 0] = 0
        for j, ax in enumerate(perm, 1):
            acc += st[ax]
            cube[q, j] = acc
    node_offs = np.empty((len(perms) * (n + 1), n + 1), dtype=np.int64)
    node_pos = np.empty(len(perms) * (n + 1), dtype=np.int64)
    s = 0
    for q in range(len(perms)):
        for k in range(n + 1):
            node_offs[s] = cube[q] - cube[q, k]
            node_pos[s] = k
            s += 1
    return node_offs, node_pos, cube


def colour_order(cls, free_value=1):
    """Free node flat indices grouped by parity colour, plus colour pointers."""
    dims = cls.shape
    n = len(dims)
    grids = np.indices(dims)
    colour = np.zeros(dims, dtype=np.int64)
    for ax in range(n):
        colour |= (grids[ax] & 1) << ax
    flat_cls = cls.reshape(-1)
    flat_col = colour.reshape(-1)
    free = np.flatnonzero(flat_cls == free_value)
    order = np.argsort(flat_col[free], kind="stable")
    free = free[order]
    counts = np.bincount(flat_col[free], minlength=2**n)
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return free.astype(np.int64), ptr


def cube_corners(dims):
    """Flat indices of every lattice cube's lower corner."""
    st = strides(dims)
    axes = [np.arange(d - 1, dtype=np.int64) * s for d, s in zip(dims, st)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return sum(mesh).reshape(-1)


# -- energy ---------------------------------------------------------------------

@njit
def _energy_nb(u, corners, cube, p):
    nperm, nv = cube.shape
    total = 0.0
    for ci in range(corners.size):
        c = corners[ci]
        for q in range(nperm):
            g2 = 0.0
            prev = u[c + cube[q, 0]]
            for j in range(1, nv):
                cur = u[c + cube[q, j]]
                d = cur - prev
                g2 += d * d
                prev = cur
            if g2 > 0.0:
                if p == 2.0:
                    total += g2
                elif p == 3.0:
                    total += g2 * np.sqrt(g2)
                else:
                    total += g2 ** (0.5 * p)
    return total


def _energy_np(u, corners, cube, p):
    nperm, nv = cube.shape
    total = 0.0
    for q in range(nperm):
        vals = [u[corners + cube[q, j]] for j in range(nv)]
        g2 = np.zeros(corners.size)
        for j in range(1, nv):
            g2 += (vals[j] - vals[j - 1]) ** 2
        total += float(np.sum(g2 ** (0.5 * p)))
    return total


def energy(u, corners, cube, p, backend=None):
    """Sum over simplices of ``|D|^p`` divided by ``n!`` (``D`` = path differences)."""
    n = cube.shape[1] - 1
    if (backend or _accel.backend()) == "numba":
        raw = _energy_nb(u, corners, cube, float(p))
    else:
        raw = _energy_np(u, corners, cube, float(p))
    return raw / math.factorial(n)


# -- relaxation sweep -------------------------------------------------------------

@njit
def _sweep_nb(u, free, ptr, offs, pos, p, omega):
    nsimp, nv = offs.shape
    n = nv - 1
    for col in range(ptr.size - 1):
        for ii in range(ptr[col], ptr[col + 1]):
            i = free[ii]
            d1 = 0.0
            d2 = 0.0
            for s in range(nsimp):
                k = pos[s]
                g2 = 0.0
                ga = 0.0
                prev = u[i + offs[s, 0]]
                for j in range(1, nv):
                    cur = u[i + offs[s, j]]
                    d = cur - prev
                    g2 += d * d
                    if j == k:
                        ga += d
                    elif j == k + 1:
                        ga -= d
                    prev = cur
                aa = 0.0
                if k >= 1:
                    aa += 1.0
                if k < n:
                    aa += 1.0
                if p == 2.0:
                    d1 += 2.0 * ga
                    d2 += 2.0 * aa
                elif g2 > 0.0:
                    if p == 3.0:
                        w = 3.0 * np.sqrt(g2)
                    else:
                        w = p * g2 ** (0.5 * p - 1.0)
                    d1 += w * ga
                    d2 += w * (aa + (p - 2.0) * ga * ga / g2)
            if d2 > 0.0:
                new = u[i] - omega * d1 / d2
                if new < 0.0:
                    new = 0.0
                elif new > 1.0:
                    new = 1.0
                u[i] = new


def _sweep_np(u, free, ptr, offs, pos, p, omega):
    nsimp, nv = offs.shape
    n = nv - 1
    for col in range(ptr.size - 1):
        idx = free[ptr[col]:ptr[col + 1]]
        if idx.size == 0:
            continue
        d1 = np.zeros(idx.size)
        d2 = np.zeros(idx.size)
        for s in range(nsimp):
            k = pos[s]
            vals = [u[idx + offs[s, j]] for j in range(nv)]
            g2 = np.zeros(idx.size)
            ga = np.zeros(idx.size)
            for j in range(1, nv):
                d = vals[j] - vals[j - 1]
                g2 += d * d
                if j == k:
                    ga += d
                elif j == k + 1:
                    ga -= d
            aa = float(k >= 1) + float(k < n)
            if p == 2.0:
                d1 += 2.0 * ga
                d2 += 2.0 * aa
            else:
                w = np.where(g2 > 0, p * np.where(g2 > 0, g2, 1.0) ** (0.5 * p - 1.0), 0.0)
                d1 += w * ga
                d2 += w * (aa + (p - 2.0) * ga * ga / np.where(g2 > 0, g2, 1.0))
        ok = d2 > 0
        step = np.zeros(idx.size)
        step[ok] = omega * d1[ok] / d2[ok]
        u[idx] = np.clip(u[idx] - step, 0.0, 1.0)


def sweep(u, free, ptr, offs, pos, p, omega, backend=None):
    """One colour-ordered relaxation pass (one damped Newton step per free node), in place."""
    if (backend or _accel.backend()) == "numba":
        _sweep_nb(u, free, ptr, offs, pos, float(p), float(omega))
    else:
        _sweep_np(u, free, ptr, offs, pos, float(p), float(omega))
