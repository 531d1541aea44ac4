import math

import numpy as np
import pytest

import oracles
from qrlimits import _pkernels as K
from qrlimits import capacity as cap
from qrlimits.errors import ArgumentError, ConvergenceError
from qrlimits.geometry import ConeSpec, cone_mask


def test_ring_exact_values():
    assert cap.ring_capacity_exact(2, 1.0, math.e) == pytest.approx(2 * math.pi, rel=1e-14)
    assert cap.ring_capacity_exact(3, 1.0, math.e) == pytest.approx(4 * math.pi, rel=1e-14)
    for n in (2, 3, 4):
        assert cap.ring_capacity_exact(n, 0.3, 1.1) == pytest.approx(oracles.ring_capacity(n, 0.3, 1.1), rel=1e-13)
    with pytest.raises(ArgumentError):
        cap.ring_capacity_exact(2, 1.0, 1.0)


@pytest.mark.parametrize("lam", [1e-3, 0.5, 7.0, 1e4])
def test_ring_scale_invariance(lam):
    for n in (2, 3):
        assert cap.ring_capacity_exact(n, lam, lam * 2.5) == pytest.approx(cap.ring_capacity_exact(n, 1, 2.5), rel=1e-13)


def test_ring_grid_n2():
    g = cap.CondenserGrid.ring(2, 1.0, math.e, 64)
    assert g.cell_size <= math.e / 64
    res = cap.solve(g)
    assert abs(res.value - 2 * math.pi) / (2 * math.pi) <= 0.05
    assert res.levels > 1


def test_ring_grid_estimate_is_scale_free():
    a = cap.capacity_estimate(cap.CondenserGrid.ring(2, 1.0, 3.0, 24), tol=1e-10)
    b = cap.capacity_estimate(cap.CondenserGrid.ring(2, 0.01, 0.03, 24), tol=1e-10)
    assert a == pytest.approx(b, rel=1e-8)


def _box(n, h, c, a, shift=0.0):
    """C = closed box [-c, c]^n inside A = open box (-a, a)^n; c and a are multiples of 2h."""
    m = int(round(a / h)) + 1
    lo = -m * h * np.ones(n) + shift
    in_c = lambda p: np.all(np.abs(p - shift) <= c + 1e-9 * h, axis=1)
    in_a = lambda p: np.all(np.abs(p - shift) < a - 1e-9 * h, axis=1)
    return cap.CondenserGrid.from_predicates(h, lo, (2 * m + 1,) * n, in_c, in_a)


BOXES = [(2, 0.25, 1.0), (2, 0.5, 1.0), (2, 0.75, 1.5), (3, 0.25, 0.5), (3, 0.5, 1.0)]


@pytest.mark.parametrize("n,c,a", BOXES)
def test_refinement_monotonicity(n, c, a):
    h = 0.125 if n == 2 else 0.125 * a
    vals = [cap.capacity_estimate(_box(n, hh, c, a), tol=1e-10) for hh in (h, h / 2, h / 4)[: 3 if n == 2 else 2]]
    assert np.all(np.diff(vals) <= 1e-6), vals
    assert all(v > 0 for v in vals)


def test_condenser_monotonicity():
    g = cap.CondenserGrid.ring(2, 0.3, 1.0, 24)
    x = g.node_coords()
    rad = np.linalg.norm(x, axis=-1)
    inside = g.cls != cap.OUTSIDE
    vals = []
    for rc in (0.1, 0.2, 0.35, 0.5):
        vals.append(cap.capacity_estimate(g.with_c((rad <= rc) & inside), tol=1e-10))
    # a lopsided set in between
    half = (rad <= 0.35) & (x[..., 0] > 0) & inside
    lop = cap.capacity_estimate(g.with_c(half), tol=1e-10)
    assert np.all(np.diff(vals) >= -1e-6)
    assert lop <= vals[2] + 1e-6
    with pytest.raises(ArgumentError):
        g.with_c(rad < 2.0)


def test_c_touching_boundary_grows():
    vals = []
    for h in (0.25, 0.125, 0.0625):
        vals.append(cap.capacity_estimate(_box(2, h, 1.0 - h, 1.0), tol=1e-10))
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 1.8 * vals[1]


def test_empty_c_is_flagged():
    g = cap.CondenserGrid.ring(2, 0.5, 1.0, 8)
    res = cap.solve(g.with_c(np.zeros(g.dims, dtype=bool)))
    assert res.value == 0.0 and res.empty_c


def test_grid_text_round_trip(tmp_path):
    g = _box(3, 0.25, 0.5, 1.0, shift=0.3)
    path = tmp_path / "g.txt"
    g.write(path)
    back = cap.CondenserGrid.read(path)
    np.testing.assert_array_equal(back.cls, g.cls)
    np.testing.assert_allclose(back.origin, g.origin, rtol=0, atol=0)
    assert back.cell_size == g.cell_size
    assert path.read_text().splitlines()[1].split()[:2] == ["3", "0.25"]


@pytest.mark.parametrize("text", [
    "2 0.5\n",
    "2 0.5 3 3\nO O O O A O O O\n",
    "2 0.5 3 3\nO O O O X O O O O\n",
    "2 0.5 3 3\nO O O O C A O O O\n",
    "2 0.5 3 3\nA O O O C O O O O\n",
])
def test_grid_text_errors(text):
    with pytest.raises(ArgumentError):
        cap.CondenserGrid.from_text(text)


def test_grid_validation():
    with pytest.raises(ArgumentError):
        cap.CondenserGrid(0.1, np.ones((5, 5)))
    with pytest.raises(ArgumentError):
        cap.CondenserGrid(0.0, np.zeros((5, 5)))
    with pytest.raises(ArgumentError):
        cap.CondenserGrid.from_predicates(0.1, [0, 0], (5, 5), lambda p: np.ones(len(p), bool), lambda p: np.zeros(len(p), bool))


@pytest.mark.parametrize("n,p", [(2, 2.0), (2, 3.0), (3, 3.0), (3, 2.5)])
def test_backend_kernels_agree(n, p, rng):
    g = _box(n, 0.25, 0.5, 1.0)
    offs, pos, cube = K.simplex_tables(g.dims)
    free, ptr = K.colour_order(g.cls, cap.IN_A)
    corners = K.cube_corners(g.dims)
    u0 = (g.cls == cap.IN_C).astype(float).reshape(-1)
    u0[free] = rng.uniform(0, 1, free.size)
    ua, ub = u0.copy(), u0.copy()
    for _ in range(3):
        K.sweep(ua, free, ptr, offs, pos, p, 1.3, backend="numba")
        K.sweep(ub, free, ptr, offs, pos, p, 1.3, backend="numpy")
    np.testing.assert_allclose(ua, ub, rtol=1e-12, atol=1e-14)
    ea = K.energy(ua, corners, cube, p, backend="numba")
    eb = K.energy(ua, corners, cube, p, backend="numpy")
    assert ea == pytest.approx(eb, rel=1e-12)


def test_linear_potential_energy():
    # u = x_0 on [0, 1]^n has unit gradient, so the energy is the volume
    for n in (2, 3):
        m = 6
        dims = (m + 1,) * n
        _, _, cube = K.simplex_tables(dims)
        corners = K.cube_corners(dims)
        u = (np.indices(dims)[0] / m).reshape(-1)
        # with p = n the lattice scale h^(n-p) is 1
        e = K.energy(u, corners, cube, n, backend="numpy")
        assert e == pytest.approx(1.0, rel=1e-12)


def test_convergence_error_carries_energies():
    g = cap.CondenserGrid.ring(2, 0.2, 1.0, 32)
    with pytest.raises(ConvergenceError) as info:
        cap.solve(g, tol=1e-14, max_sweeps=8, nested=False)
    assert info.value.last is not None and info.value.previous is not None


def test_solver_arguments():
    g = cap.CondenserGrid.ring(2, 0.5, 1.0, 8)
    with pytest.raises(ArgumentError):
        cap.solve(g, tol=0)
    with pytest.raises(ArgumentError):
        cap.solve(g, p=1.0)


def test_p_energy_ring_n2_p3_positive():
    g = cap.CondenserGrid.ring(2, 0.5, 1.0, 16)
    assert cap.solve(g, 1e-8, p=3.0).value > 0


def test_cone_density_positive_band():
    b = np.array([1.0, 0.0])
    cone = ConeSpec(b, math.pi / 4)
    radii = [0.2, 0.1, 0.05, 0.025]
    prof = cap.cap_density_profile(lambda p: cone_mask(p, cone), b, radii, resolution=32)
    assert np.all(prof.values > 0.5)
    assert prof.values.max() / prof.values.min() < 1.2
    assert not prof.empty.any()


def test_empty_set_density():
    b = np.array([1.0, 0.0])
    prof = cap.cap_density_profile(np.empty((0, 2)), b, [0.1, 0.05])
    np.testing.assert_array_equal(prof.values, 0.0)
    assert prof.empty.all()
    far = cap.cap_density_profile(np.array([[0.0, 0.0]]), b, [0.1])
    assert far.empty.all()


def test_point_density_decays_with_resolution():
    b = np.array([1.0, 0.0])
    pt = np.array([[0.95, 0.0]])
    vals = [cap.cap_density_profile(pt, b, [0.1], resolution=res).values[0] for res in (16, 32, 64, 128)]
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] < 0.75 * vals[0]


def test_density_csv_and_validation():
    b = np.array([1.0, 0.0])
    prof = cap.cap_density_profile(np.empty((0, 2)), b, [0.1, 0.05])
    assert prof.to_csv().splitlines()[1] == "r,M,empty"
    with pytest.raises(ArgumentError):
        cap.cap_density_profile(np.empty((0, 2)), b, [0.05, 0.1])
    with pytest.raises(ArgumentError):
        cap.density_grid(np.empty((0, 2)), b, 0.1, 15)
