import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qrlimits import constants as C
from qrlimits import metrics as met
from qrlimits.errors import ArgumentError

# b_3 = (pi/16) * I^-2 with I the integral of sin^(-1/2) over [0, pi/2],
# frozen from the gamma-function closed form in tests/oracles.py
B3_FROZEN = 0.028559161315278987


def test_b2_closed_form():
    assert C.b_n(2) == pytest.approx(1 / (2 * math.pi), abs=1e-10)


def test_b3_against_oracle():
    ref = math.pi / 16 * oracles.sine_power_integral(-0.5) ** -2
    assert ref == pytest.approx(B3_FROZEN, rel=1e-14)
    assert C.b_n(3) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("n", range(2, 7))
def test_bn_positive_and_matches_oracle(n):
    a = (2 - n) / (n - 1)
    ref = 2.0 ** (1 - 2 * n) * oracles.sphere_area(n - 1) * oracles.sine_power_integral(a) ** (1 - n)
    assert C.b_n(n) > 0
    assert C.b_n(n) == pytest.approx(ref, rel=1e-10)


def test_bn_rejects_small_n():
    with pytest.raises(ArgumentError):
        C.b_n(1)


def test_context_defaults_and_provenance():
    ctx = C.ConstantsContext()
    assert ctx.c1 == pytest.approx(1 / math.log(1.25), abs=1e-12)
    assert ctx.c3 == pytest.approx(4 * C.b_n(2), abs=1e-12)
    assert ctx.beta0 == pytest.approx(ctx.c2 * (ctx.c3 / (2 * ctx.c1)), rel=1e-15)
    prov = ctx.provenance()
    assert prov["lambda_K"] == C.CONFIGURED_DEFAULT
    assert prov["c1"] == C.PINNED
    assert ctx.with_values(c0=2.0).provenance()["c0"] == C.USER_CONFIGURED


@pytest.mark.parametrize("kw", [{"lambda_K": 0.5}, {"lambda_K": 0.0}, {"c0": 0.0}, {"c2": -1.0}, {"n": 1}, {"K": 0.5}])
def test_context_rejects(kw):
    with pytest.raises(ArgumentError):
        C.ConstantsContext(**kw)


def test_config_file(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# ledger\nn = 3\nlambda_K = 0.1  # tight\nc0 = 2\n")
    ctx = C.ConstantsContext.from_file(p)
    assert (ctx.n, ctx.lambda_K, ctx.c0, ctx.c2) == (3, 0.1, 2.0, 1.0)
    assert ctx.provenance()["c0"] == C.USER_CONFIGURED
    assert ctx.provenance()["c2"] == C.CONFIGURED_DEFAULT
    for bad in ("c1 = 3\n", "colour = 1\n", "lambda_K = 0.6\n", "n 3\n", "n = 2\nn = 3\n"):
        p.write_text(bad)
        with pytest.raises(ArgumentError):
            C.ConstantsContext.from_file(p)


def test_c1_exceeds_floor(rng):
    for lam in rng.uniform(1e-6, 0.5 - 1e-9, 200):
        assert C.ConstantsContext(lambda_K=lam).c1 > 1 / math.log(1.5)


def test_beta_examples():
    ctx = C.ConstantsContext(n=2)
    N = 3.0
    thr = C.saturation_delta(N, ctx)
    assert C.beta(thr, N, ctx) == ctx.beta0
    assert C.beta(10 * thr, N, ctx) == ctx.beta0
    assert C.beta(thr * (1 - 1e-15), N, ctx) < ctx.beta0
    assert C.beta(1e-4 * N, N, ctx) == pytest.approx(1e-4, rel=1e-14)
    with pytest.raises(ArgumentError):
        C.beta(0.0, N, ctx)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_beta_monotone_and_bounded(n):
    ctx = C.ConstantsContext(n=n, c2=0.7)
    N = C.n_bound(0.5, 0.9, False, ctx)
    thr = C.saturation_delta(N, ctx)
    ds = np.geomspace(thr * 1e-8, thr * 1e3, 100)
    bs = np.array([C.beta(d, N, ctx) for d in ds])
    assert np.all(np.diff(bs) >= 0)
    assert np.all(bs <= ctx.beta0)
    lower = ctx.c2 * (ds / N) ** (1 / (n - 1))
    assert np.all(bs[ds < thr] >= lower[ds < thr] * (1 - 1e-14))


def test_gamma_identities(rng):
    for _ in range(20):
        phi = rng.uniform(0.01, 1.55)
        lam = rng.uniform(0.01, 0.49)
        r = rng.uniform(0.01, 0.99)
        c = math.cos(phi)
        g1 = (14 * lam * c * c + 5 * c + 40) / (7 * lam * c * c)
        g2 = (2 * lam * c * c + c + 4) / (lam * c * c)
        g4 = (2 * lam * r * r + r + 4) / (lam * r * r)
        assert C.gamma_inner(0.25, phi, lam) == pytest.approx(g1, rel=1e-12)
        assert C.gamma_inner(0.5, phi, lam) == pytest.approx(g2, rel=1e-12)
        assert C.gamma_inner(0.5, r, lam, True) == pytest.approx(g4, rel=1e-12)


def test_n_bound_properties():
    ctx = C.ConstantsContext(n=3, c0=2.0)
    assert C.n_bound(0.5, 0.7, False, ctx) == pytest.approx(2.0 * C.gamma2(0.7, ctx), rel=1e-12)
    lams = [0.05, 0.1, 0.2, 0.4]
    vals = [C.n_bound(0.3, 0.7, False, C.ConstantsContext(lambda_K=l)) for l in lams]
    assert np.all(np.diff(vals) < 0)
    # gamma~ grows like r^(-2n) as r -> 0
    r = np.geomspace(1e-6, 1e-3, 10)
    g = np.array([C.n_bound(0.5, v, True, ctx) for v in r])
    slope = np.polyfit(np.log(r), np.log(g), 1)[0]
    assert slope == pytest.approx(-2 * ctx.n, rel=0.05)
    with pytest.raises(ArgumentError):
        C.n_bound(1.0, 0.7, False, ctx)


@settings(max_examples=40, deadline=None)
@given(phi=st.floats(0.01, 1.55), n=st.integers(2, 6))
def test_gamma3_is_power_of_gamma2(phi, n):
    ctx = C.ConstantsContext(n=n)
    g2, g3 = C.gamma2(phi, ctx), C.gamma3(phi, ctx)
    assert g3 == pytest.approx(g2 ** (1 / (1 - n)), rel=1e-12)
    assert g3 * g2 ** (1 / (n - 1)) == pytest.approx(1.0, rel=1e-12)


def test_theorem_constants():
    ctx = C.ConstantsContext(n=3)
    t = C.theorem_constants("lindelof", math.pi / 3, ctx=ctx)
    assert t["alpha1"] == pytest.approx((48 * ctx.c1 + 1) / 2, rel=1e-12)
    assert set(t) == {"alpha1", "gamma1"}
    t = C.theorem_constants("tangential", 0.8, ctx=ctx)
    assert set(t) == {"alpha2", "gamma2", "gamma3"}
    # alpha2 - 1 is c1 times the r-free k bound of the a = 1/2 shell
    assert t["alpha2"] - 1 == pytest.approx(ctx.c1 * met.k_cone_diameter_bound(0.5, 0.8, 0.1, r_free=True), rel=1e-12)
    t = C.theorem_constants("koebe", 0.8, 0.2, ctx)
    assert t["alpha3"] == pytest.approx((met.s_bound(0.2, 0.8) * ctx.c1 + 1) / 2, rel=1e-12)
    with pytest.raises(ArgumentError):
        C.theorem_constants("koebe", 0.8, None, ctx)
    with pytest.raises(ArgumentError):
        C.theorem_constants("cauchy", 0.8, None, ctx)
    a3 = [C.alpha3(r, 0.8, ctx) for r in np.geomspace(1e-9, 0.5, 20)]
    assert np.all(np.diff(a3) < 0)
    assert all(np.isfinite(v) and v > 0 for v in C.theorem_constants("tangential", 1.5, ctx=ctx).values())
