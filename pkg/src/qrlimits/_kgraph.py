"""Layered-graph kernels for the quasihyperbolic distance estimator.

A level of the estimator is a stack of ``M + 1`` layers of ``W`` planar nodes.
Edges join every node of layer ``i`` to every node of layer ``i + 1``; the edge
weight approximates ``∫ ds / d(z)`` along the straight segment. The shortest
layer-to-layer path is a min-plus recursion over layers.
"""
import numpy as np

from . import _accel
from ._accel import njit

# Gauss-Legendre nodes/weights on [0, 1]
_GX, _GW = np.polynomial.legendre.leggauss(4)
GAUSS_X = 0.5 * (_GX + 1.0)
GAUSS_W = 0.5 * _GW


@njit
def _ball_edge_weights_nb(nodes, gx, gw, min_rule):
    m1, w, _ = nodes.shape
    out = np.empty((m1 - 1, w, w))
    nq = gx.size
    for i in range(m1 - 1):
        for a in range(w):
            ax = nodes[i, a, 0]
            ay = nodes[i, a, 1]
            da = 1.0 - np.sqrt(ax * ax + ay * ay)
            for b in range(w):
                bx = nodes[i + 1, b, 0]
                by = nodes[i + 1, b, 1]
                dx = bx - ax
                dy = by - ay
                length = np.sqrt(dx * dx + dy * dy)
                if min_rule:
                    db = 1.0 - np.sqrt(bx * bx + by * by)
                    dm = min(da, db)
                    out[i, a, b] = length / dm if dm > 0.0 else np.inf
                    continue
                acc = 0.0
                for q in range(nq):
                    px = ax + gx[q] * dx
                    py = ay + gx[q] * dy
                    d = 1.0 - np.sqrt(px * px + py * py)
                    if d <= 0.0:
                        acc = np.inf
                        break
                    acc += gw[q] / d
                out[i, a, b] = length * acc
    return out


def _ball_edge_weights_np(nodes, gx, gw, min_rule):
    a = nodes[:-1, :, None, :]
    b = nodes[1:, None, :, :]
    delta = b - a
    length = np.linalg.norm(delta, axis=-1)
    if min_rule:
        da = 1.0 - np.linalg.norm(a, axis=-1)
        db = 1.0 - np.linalg.norm(b, axis=-1)
        dm = np.minimum(da, db)
        with np.errstate(divide="ignore"):
            return np.where(dm > 0, length / np.where(dm > 0, dm, 1.0), np.inf)
    pts = a[..., None, :] + gx[:, None] * delta[..., None, :]
    d = 1.0 - np.linalg.norm(pts, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), np.inf)
    return length * (inv @ gw)


@njit
def _layered_min_path_nb(weights):
    m, w, _ = weights.shape
    cost = np.zeros(w)
    back = np.zeros((m, w), dtype=np.int64)
    new = np.empty(w)
    for i in range(m):
        for b in range(w):
            best = np.inf
            arg = 0
            for a in range(w):
                c = cost[a] + weights[i, a, b]
                if c < best:
                    best = c
                    arg = a
            new[b] = best
            back[i, b] = arg
        cost[:] = new
    end = 0
    for b in range(1, w):
        if cost[b] < cost[end]:
            end = b
    path = np.empty(m + 1, dtype=np.int64)
    path[m] = end
    for i in range(m - 1, -1, -1):
        path[i] = back[i, path[i + 1]]
    return cost[end], path


def _layered_min_path_np(weights):
    m, w, _ = weights.shape
    cost = np.zeros(w)
    back = np.empty((m, w), dtype=np.int64)
    for i in range(m):
        tot = cost[:, None] + weights[i]
        back[i] = np.argmin(tot, axis=0)
        cost = tot[back[i], np.arange(w)]
    path = np.empty(m + 1, dtype=np.int64)
    path[m] = int(np.argmin(cost))
    for i in range(m - 1, -1, -1):
        path[i] = back[i, path[i + 1]]
    return float(cost[path[m]]), path


def ball_edge_weights(nodes, min_rule=False, backend=None):
    nodes = np.ascontiguousarray(nodes, dtype=float)
    if (backend or _accel.backend()) == "numba":
        return _ball_edge_weights_nb(nodes, GAUSS_X, GAUSS_W, bool(min_rule))
    return _ball_edge_weights_np(nodes, GAUSS_X, GAUSS_W, bool(min_rule))


def general_edge_weights(nodes, dist_fn, min_rule=False):
    """Edge weights for an arbitrary boundary-distance callable (numpy only).

    ``nodes`` has shape (M+1, W, n) in ambient coordinates; ``dist_fn`` maps an
    (m, n) array to m distances.
    """
    a = nodes[:-1, :, None, :]
    b = nodes[1:, None, :, :]
    delta = b - a
    length = np.linalg.norm(delta, axis=-1)
    n = nodes.shape[-1]
    if min_rule:
        da = dist_fn(nodes.reshape(-1, n)).reshape(nodes.shape[:2])
        dm = np.minimum(da[:-1, :, None], da[1:, None, :])
        with np.errstate(divide="ignore"):
            return np.where(dm > 0, length / np.where(dm > 0, dm, 1.0), np.inf)
    pts = a[..., None, :] + GAUSS_X[:, None] * delta[..., None, :]
    d = dist_fn(pts.reshape(-1, n)).reshape(pts.shape[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), np.inf)
    return length * (inv @ GAUSS_W)


def layered_min_path(weights, backend=None):
    weights = np.ascontiguousarray(weights, dtype=float)
    if (backend or _accel.backend()) == "numba":
        cost, path = _layered_min_path_nb(weights)
        return float(cost), path
    return _layered_min_path_np(weights)


@njit
def _pairwise_max_nb(points, kind):
    # kind 0: rho in the unit ball, kind 1: j in the unit ball
    m, n = points.shape
    sq = np.empty(m)
    for i in range(m):
        s = 0.0
        for k in range(n):
            s += points[i, k] * points[i, k]
        sq[i] = s
    best = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            s = 0.0
            for k in range(n):
                t = points[i, k] - points[j, k]
                s += t * t
            if kind == 0:
                v = 2.0 * np.arcsinh(np.sqrt(s / ((1.0 - sq[i]) * (1.0 - sq[j]))))
            else:
                dm = min(1.0 - np.sqrt(sq[i]), 1.0 - np.sqrt(sq[j]))
                v = np.log1p(np.sqrt(s) / dm)
            if v > best:
                best = v
    return best


def _pairwise_max_np(points, kind, chunk=512):
    sq = np.einsum("ij,ij->i", points, points)
    best = 0.0
    m = points.shape[0]
    for lo in range(0, m, chunk):
        blk = points[lo:lo + chunk]
        d2 = np.maximum(((blk[:, None, :] - points[None, :, :]) ** 2).sum(-1), 0.0)
        if kind == 0:
            v = 2.0 * np.arcsinh(np.sqrt(d2 / np.outer(1.0 - sq[lo:lo + chunk], 1.0 - sq)))
        else:
            dm = np.minimum.outer(1.0 - np.sqrt(sq[lo:lo + chunk]), 1.0 - np.sqrt(sq))
            v = np.log1p(np.sqrt(d2) / dm)
        best = max(best, float(v.max()))
    return best


def pairwise_max(points, kind, backend=None):
    points = np.ascontiguousarray(points, dtype=float)
    if (backend or _accel.backend()) == "numba":
        return float(_pairwise_max_nb(points, kind))
    return _pairwise_max_np(points, kind)
