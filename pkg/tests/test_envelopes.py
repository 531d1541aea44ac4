import io
import math

import numpy as np
import pytest

from qrlimits import constants as C
from qrlimits import envelopes as E
from qrlimits.errors import ArgumentError, PreconditionError

PHI = math.pi / 3


def dyadic(lo=2, hi=20):
    return 2.0 ** -np.arange(lo, hi + 1, dtype=float)


def test_envelope_examples():
    assert E.envelope(0.3, 1.0, 7.0) == pytest.approx(0.3, rel=1e-15)
    assert E.envelope(0.3, 0.4, 0.0) == pytest.approx(0.3, rel=1e-15)
    assert E.envelope(math.exp(-100), 0.5, 2.0) == pytest.approx(math.exp(-25), rel=1e-12)
    for bad in [(0.0, 0.5, 1), (1.0, 0.5, 1), (0.5, 0.0, 1), (0.5, 1.5, 1), (0.5, 0.5, -1)]:
        with pytest.raises(ArgumentError):
            E.envelope(*bad)


def test_envelope_monotonicity(rng):
    for _ in range(50):
        eps, beta = rng.uniform(0.01, 0.99), rng.uniform(0.05, 0.95)
        exps = np.sort(rng.uniform(0, 10, 8))
        vals = [E.envelope(eps, beta, x) for x in exps]
        assert np.all(np.diff(vals) >= 0)
        assert all(0 < v < 1 for v in vals)
        epss = np.sort(rng.uniform(0.01, 0.99, 8))
        vals = [E.envelope(e, beta, 2.0) for e in epss]
        assert np.all(np.diff(vals) >= 0)


@pytest.mark.parametrize("a,use_r", [(0.25, False), (0.5, False), (0.5, True)])
def test_case_split(a, use_r):
    ctx = C.ConstantsContext()
    r = 0.1
    N = C.n_bound(a, r if use_r else PHI, use_r, ctx)
    thr = C.saturation_delta(N, ctx)
    assert E.case_split(r, 1e6 * thr, a, use_r, ctx, PHI) == E.I0
    assert E.case_split(r, 1e-6 * thr, a, use_r, ctx, PHI) == E.I1
    assert E.case_split(r, thr, a, use_r, ctx, PHI) == E.I0


def test_case_split_needs_phi_for_gamma_form():
    with pytest.raises(ArgumentError):
        E.case_split(0.1, 1.0, 0.25, False, C.ConstantsContext())


@pytest.mark.parametrize("name", E.BUNDLED)
def test_bundled_verdicts(name):
    prof = E.bundled_profile(name)
    v1, v2 = E.scan(prof), E.scan(prof)
    want = E.DIVERGES if name.endswith("diverges") else E.FAILS
    assert v1.verdict == want
    assert v1.verdict == v2.verdict
    np.testing.assert_array_equal(v1.log_abs_T, v2.log_abs_T)
    assert len(v1.cases) == len(prof)


def test_koebe_conclusion_tag():
    assert E.scan(E.bundled_profile("koebe_diverges")).conclusion == "f-must-be-constant"
    assert E.scan(E.bundled_profile("koebe_fails")).conclusion is None


def test_lindelof_single_exponential_rate_fails():
    # delta = 1/log(1/r), eps = exp(-1/r): log|T| = alpha1 log(delta/gamma1) + log(1/r)
    # and alpha1 > 1 makes the power of delta win, so T -> 0
    r = dyadic()
    prof = E.RateProfile.from_log_epsilon(r, 1 / np.log(1 / r), -1 / r)
    v = E.scan_lindelof(prof, PHI)
    assert v.verdict == E.FAILS
    assert v.T[-1] > -1.0


def test_lindelof_closed_form():
    r = dyadic()
    delta = 1 / np.log(1 / r)
    prof = E.RateProfile(r, delta, 1 / r)
    ctx = C.ConstantsContext()
    v = E.scan_lindelof(prof, PHI, ctx)
    a1, g1 = C.alpha1(PHI, ctx), C.gamma1(PHI, ctx)
    ref = a1 * np.log(delta / g1) + 1 / r
    np.testing.assert_allclose(v.log_abs_T, ref, rtol=1e-12)
    assert v.verdict == E.DIVERGES


def test_lindelof_r_r_fails():
    r = dyadic()
    v = E.scan_lindelof(E.RateProfile.from_epsilon(r, r, r), PHI)
    assert v.verdict == E.FAILS
    assert abs(v.T[-1]) < 1e-100


def test_constant_inputs_fail():
    r = dyadic()
    prof = E.RateProfile.from_epsilon(r, np.full(r.size, 0.3), np.full(r.size, 0.2))
    assert E.scan_lindelof(prof, PHI).verdict == E.FAILS
    assert E.scan_koebe(prof, PHI).verdict == E.FAILS


def test_koebe_base_one_fails():
    r = dyadic()
    ctx = C.ConstantsContext()
    g4 = np.array([C.gamma4(x, ctx) for x in r])
    v = E.scan_koebe(E.RateProfile.from_log_epsilon(r, g4, -np.ones(r.size)), PHI, ctx)
    np.testing.assert_allclose(v.T, -1.0, rtol=1e-9)
    assert v.verdict == E.FAILS


def test_koebe_rejects_wide_radius():
    r = np.array([0.6, 0.5, 0.4, 0.3, 0.2])
    prof = E.RateProfile.from_epsilon(r, np.ones(5), np.full(5, 0.5))
    with pytest.raises(ArgumentError):
        E.scan_koebe(prof, 1.2)


def test_tangential_constant_phi_raises():
    r = dyadic(3, 12)
    prof = E.RateProfile.from_epsilon(r, np.ones(r.size), r, phi=np.full(r.size, 1.0))
    with pytest.raises(PreconditionError):
        E.scan_tangential(prof)


def test_tangential_missing_phi_and_floor():
    r = dyadic()
    with pytest.raises(ArgumentError):
        E.scan_tangential(E.RateProfile.from_epsilon(r, np.ones(r.size), r))
    prof = E.bundled_profile("tangential_fails")
    with pytest.raises(PreconditionError):
        E.scan_tangential(prof, delta_floor=2.0)
    assert E.scan_tangential(prof, delta_floor=0.5).verdict == E.FAILS


def test_tangential_power_decays():
    v = E.scan(E.bundled_profile("tangential_diverges"))
    assert v.extra["gamma3_pow_alpha2_decreasing"]
    assert v.extra["gamma3_pow_alpha2_last"] < 1e-12


@pytest.mark.parametrize("name", E.BUNDLED)
def test_subsampling_invariance(name):
    prof = E.bundled_profile(name)
    w = E.DEFAULT_WINDOW
    head = np.arange(0, len(prof) - w, 2)
    idx = np.concatenate([head, np.arange(len(prof) - w, len(prof))])
    assert E.scan(prof.subset(idx)).verdict == E.scan(prof).verdict


@pytest.mark.parametrize("name", E.BUNDLED)
def test_statistics_strictly_negative(name):
    # |T| may over- or underflow a double, so negativity is read off log|T| and the sign bit
    v = E.scan(E.bundled_profile(name))
    assert np.all(v.log_abs_T > -np.inf)
    assert np.all(np.signbit(v.T))


def test_envelope_chain_on_i0_samples():
    ctx = C.ConstantsContext()
    prof = E.bundled_profile("koebe_fails")
    a3 = C.alpha3(prof.r[0], PHI, ctx)
    for r, d in zip(prof.r, prof.delta):
        N = C.n_bound(0.5, r, True, ctx)
        b = C.beta(d, N, ctx)
        assert b <= ctx.beta0
        if E.case_split(r, d, 0.5, True, ctx) == E.I0:
            assert E.envelope(0.5, ctx.beta0, a3) >= E.envelope(0.5, b, a3)


def test_window_and_threshold_validation():
    prof = E.bundled_profile("lindelof_fails")
    with pytest.raises(ArgumentError):
        E.scan(prof, window=2)
    with pytest.raises(ArgumentError):
        E.scan(prof.subset(np.arange(3)), window=5)
    with pytest.raises(ArgumentError):
        E.scan(prof, threshold=1.0)


def test_inconclusive_when_threshold_unreached():
    r = dyadic()
    prof = E.RateProfile(r, np.full(r.size, 0.5), np.log(np.log(1 / r)))
    v = E.scan_lindelof(prof, PHI, threshold=-1e300)
    assert v.verdict == E.INCONCLUSIVE


def test_csv_round_trip():
    prof = E.bundled_profile("tangential_diverges")
    back = E.RateProfile.from_csv(io.StringIO(prof.to_csv()))
    np.testing.assert_array_equal(back.r, prof.r)
    np.testing.assert_array_equal(back.lle, prof.lle)
    np.testing.assert_array_equal(back.phi, prof.phi)
    assert back.meta == prof.meta


def test_csv_epsilon_column():
    text = "r,delta,epsilon\n0.5,1,0.25\n0.25,1,0.125\n"
    prof = E.RateProfile.from_csv(io.StringIO(text))
    np.testing.assert_allclose(prof.epsilon, [0.25, 0.125], rtol=1e-14)


@pytest.mark.parametrize("text,line", [
    ("r,delta,epsilon\n0.5,1,0.25\n0.25,1,abc\n", "line 3"),
    ("r,delta,epsilon\n0.5,1,0.25\n0.25,1\n", "line 3"),
    ("# theorem: lindelof\nr,eps\n0.5,0.2\n", "line 2"),
])
def test_csv_errors_name_the_row(text, line):
    with pytest.raises(ArgumentError, match=line):
        E.RateProfile.from_csv(io.StringIO(text))


def test_profile_invariants():
    with pytest.raises(ArgumentError):
        E.RateProfile.from_epsilon([0.25, 0.5], [1, 1], [0.1, 0.1])
    with pytest.raises(ArgumentError):
        E.RateProfile.from_epsilon([0.5, 0.25], [1, -1], [0.1, 0.1])
    with pytest.raises(ArgumentError):
        E.RateProfile.from_epsilon([0.5, 0.25], [1, 1], [0.1, 1.0])
    with pytest.raises(ArgumentError):
        E.RateProfile.from_epsilon([0.5, 0.25], [1, 1], [0.1, 0.1], phi=[1.2, 1.1])
