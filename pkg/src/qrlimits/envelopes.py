"""Decay envelopes and finite-sample divergence scanners.

A scanner evaluates a statistic ``T(r) = P(r) * log(eps(r))`` along a radius
schedule and decides whether ``T`` plausibly tends to ``-inf``. The factor
``P`` is a power of a small base and ``log(eps)`` may be astronomically large,
so everything is carried as ``log|T| = log P + log(-log eps)``; ``T`` itself is
recovered as ``-exp(log|T|)`` and may legitimately be ``-inf`` or ``-0.0``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import constants as C
from .errors import ArgumentError, PreconditionError

DEFAULT_WINDOW = 5
DEFAULT_THRESHOLD = -1e3
NORMALIZATIONS = ("statement", "proof")

I0, I1 = "I0", "I1"
DIVERGES, FAILS, INCONCLUSIVE = "diverges", "fails", "inconclusive"

_EPS_COLUMNS = ("epsilon", "log_epsilon", "log_neg_log_epsilon")


def envelope(epsilon: float, beta: float, exponent: float) -> float:
    """``epsilon ** (beta ** exponent)``."""
    if not 0 < epsilon < 1:
        raise ArgumentError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not 0 < beta <= 1:
        raise ArgumentError(f"beta must lie in (0, 1], got {beta!r}")
    if not exponent >= 0:
        raise ArgumentError(f"exponent must be >= 0, got {exponent!r}")
    return math.exp(math.log(epsilon) * beta**exponent)


@dataclass(frozen=True, eq=False)
class RateProfile:
    """Sampled ``delta(r)``, ``eps(r)`` and optionally ``phi(r)`` with ``r`` decreasing.

    ``eps`` is stored as ``lle = log(-log(eps))`` so that doubly and triply
    exponential decay remains representable.
    """

    r: np.ndarray
    delta: np.ndarray
    lle: np.ndarray
    phi: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(-1)
        delta = np.asarray(self.delta, dtype=float).reshape(-1)
        lle = np.asarray(self.lle, dtype=float).reshape(-1)
        if not (r.size == delta.size == lle.size) or r.size == 0:
            raise ArgumentError("r, delta and epsilon columns must be nonempty and of equal length")
        if np.any(~np.isfinite(r)) or np.any(r <= 0) or np.any(r >= 1):
            raise ArgumentError("radii must lie in (0, 1)")
        if np.any(np.diff(r) >= 0):
            raise ArgumentError("radii must be strictly decreasing")
        if np.any(~(delta > 0)) or np.any(~np.isfinite(delta)):
            raise ArgumentError("delta must be positive and finite")
        if np.any(~np.isfinite(lle)):
            raise ArgumentError("epsilon must lie strictly inside (0, 1)")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "lle", lle)
        if self.phi is not None:
            phi = np.asarray(self.phi, dtype=float).reshape(-1)
            if phi.size != r.size:
                raise ArgumentError("phi column has the wrong length")
            if np.any(phi <= 0) or np.any(phi >= math.pi / 2):
                raise ArgumentError("phi must lie in (0, pi/2)")
            if np.any(np.diff(phi) < 0):
                raise ArgumentError("phi must be nondecreasing as r decreases")
            if np.any(r >= np.cos(phi)):
                raise ArgumentError("each sample needs r < cos(phi)")
            object.__setattr__(self, "phi", phi)

    def __len__(self):
        return self.r.size

    @classmethod
    def from_epsilon(cls, r, delta, epsilon, phi=None, meta=None):
        eps = np.asarray(epsilon, dtype=float)
        if np.any(~(eps > 0)) or np.any(~(eps < 1)):
            raise ArgumentError("epsilon must lie in (0, 1)")
        return cls(r, delta, np.log(-np.log(eps)), phi, dict(meta or {}))

    @classmethod
    def from_log_epsilon(cls, r, delta, log_epsilon, phi=None, meta=None):
        le = np.asarray(log_epsilon, dtype=float)
        if np.any(~(le < 0)):
            raise ArgumentError("log epsilon must be negative")
        return cls(r, delta, np.log(-le), phi, dict(meta or {}))

    @property
    def log_epsilon(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return -np.exp(self.lle)

    @property
    def epsilon(self) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.log_epsilon)

    def subset(self, idx) -> "RateProfile":
        phi = None if self.phi is None else self.phi[idx]
        return RateProfile(self.r[idx], self.delta[idx], self.lle[idx], phi, dict(self.meta))

    # -- csv ------------------------------------------------------------------

    @classmethod
    def from_csv(cls, source) -> "RateProfile":
        """Parse ``r,delta,<eps column>[,phi]``; ``# key: value`` lines are metadata.

        The epsilon column may be ``epsilon``, ``log_epsilon`` or
        ``log_neg_log_epsilon`` (``log(-log eps)``).
        """
        text = source.read() if hasattr(source, "read") else Path(source).read_text()
        meta, body = {}, []
        for lineno, line in enumerate(text.splitlines(), 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                key, sep, val = s[1:].partition(":")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            body.append((lineno, s))
        if not body:
            raise ArgumentError("profile has no header")
        header = [h.strip() for h in next(csv.reader([body[0][1]]))]
        eps_cols = [c for c in header if c in _EPS_COLUMNS]
        if header[:2] != ["r", "delta"] or len(eps_cols) != 1:
            raise ArgumentError(f"line {body[0][0]}: expected header r,delta,<epsilon column>[,phi]; got {','.join(header)}")
        allowed = {"r", "delta", "phi", eps_cols[0]}
        extra = [c for c in header if c not in allowed]
        if extra or len(set(header)) != len(header):
            raise ArgumentError(f"line {body[0][0]}: unexpected profile columns {extra or header}")
        rows = []
        for lineno, s in body[1:]:
            vals = next(csv.reader([s]))
            if len(vals) != len(header):
                raise ArgumentError(f"line {lineno}: expected {len(header)} fields, found {len(vals)}")
            try:
                rows.append([float(v) for v in vals])
            except ValueError:
                raise ArgumentError(f"line {lineno}: non-numeric entry in {s!r}") from None
        if not rows:
            raise ArgumentError("profile has no samples")
        data = np.array(rows, dtype=float)
        col = {h: data[:, i] for i, h in enumerate(header)}
        phi = col.get("phi")
        ec = eps_cols[0]
        if ec == "epsilon":
            return cls.from_epsilon(col["r"], col["delta"], col[ec], phi, meta)
        if ec == "log_epsilon":
            return cls.from_log_epsilon(col["r"], col["delta"], col[ec], phi, meta)
        return cls(col["r"], col["delta"], col[ec], phi, meta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        cols = ["r", "delta", "log_neg_log_epsilon"] + (["phi"] if self.phi is not None else [])
        buf.write(",".join(cols) + "\n")
        for i in range(len(self)):
            vals = [self.r[i], self.delta[i], self.lle[i]] + ([self.phi[i]] if self.phi is not None else [])
            buf.write(",".join(repr(float(v)) for v in vals) + "\n")
        return buf.getvalue()


BUNDLED = (
    "lindelof_diverges",
    "tangential_diverges",
    "koebe_diverges",
    "lindelof_fails",
    "tangential_fails",
    "koebe_fails",
)


def bundled_profile(name: str) -> RateProfile:
    if name not in BUNDLED:
        raise ArgumentError(f"unknown bundled profile {name!r}; choose from {', '.join(BUNDLED)}")
    res = resources.files("qrlimits") / "data" / "profiles" / f"{name}.csv"
    return RateProfile.from_csv(io.StringIO(res.read_text()))


@dataclass
class ScanVerdict:
    theorem: str
    verdict: str
    r: np.ndarray
    log_abs_T: np.ndarray
    cases: list
    window: int
    threshold: float
    trend_slope: float
    extra: dict = field(default_factory=dict)

    @property
    def T(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return -np.exp(self.log_abs_T)

    @property
    def conclusion(self) -> Optional[str]:
        if self.theorem == "koebe" and self.verdict == DIVERGES:
            return "f-must-be-constant"
        return None

    def report(self) -> dict:
        out = {
            "theorem": self.theorem,
            "verdict": self.verdict,
            "samples": len(self.r),
            "window": self.window,
            "threshold": self.threshold,
            "T_last": float(self.T[-1]),
            "log_abs_T_last": float(self.log_abs_T[-1]),
            "trend_slope": self.trend_slope,
            "cases_I0": self.cases.count(I0),
            "cases_I1": self.cases.count(I1),
        }
        if self.conclusion:
            out["conclusion"] = self.conclusion
        out.update(self.extra)
        return out

    def report_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.report().items())

    def samples_csv(self) -> str:
        lines = ["r,T,case"]
        for r, t, c in zip(self.r, self.T, self.cases):
            lines.append(f"{float(r)!r},{float(t)!r},{c}")
        return "\n".join(lines) + "\n"


def _verdict(log_abs_T: np.ndarray, window: int, threshold: float):
    if not threshold < 0:
        raise ArgumentError("threshold must be negative")
    tail = log_abs_T[-window:]
    monotone = bool(np.all(np.diff(tail) > 0))
    below = bool(log_abs_T[-1] > math.log(-threshold))
    if monotone and below:
        return DIVERGES
    if not monotone and not below:
        return FAILS
    return INCONCLUSIVE


def _trend(r, log_abs_T, window):
    x = np.log(1.0 / r[-window:])
    y = log_abs_T[-window:]
    if not np.all(np.isfinite(y)):
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def _check_window(profile, window):
    if window < 3:
        raise ArgumentError("window must be at least 3")
    if len(profile) < window:
        raise ArgumentError(f"profile has {len(profile)} samples, fewer than the window {window}")


def case_split(r: float, delta: float, a: float, use_r_form: bool, ctx: C.ConstantsContext, phi: Optional[float] = None) -> str:
    """``I0`` iff ``delta >= c3 N(r) / (2 c1)``; the gamma form needs ``phi``, the gamma~ form uses ``r``."""
    if not delta > 0:
        raise ArgumentError("delta must be positive")
    if not 0 < r < 1:
        raise ArgumentError("r must lie in (0, 1)")
    if use_r_form:
        N = C.n_bound(a, r, True, ctx)
    else:
        if phi is None:
            raise ArgumentError("the gamma form of the case split needs phi")
        N = C.n_bound(a, phi, False, ctx)
    return I0 if delta >= C.saturation_delta(N, ctx) else I1


def _norm_factor(normalization, ctx):
    if normalization not in NORMALIZATIONS:
        raise ArgumentError(f"normalization must be one of {NORMALIZATIONS}")
    return 1.0 if normalization == "statement" else ctx.c0


def _finish(theorem, profile, log_abs_T, cases, window, threshold, extra):
    return ScanVerdict(
        theorem=theorem,
        verdict=_verdict(log_abs_T, window, threshold),
        r=profile.r.copy(),
        log_abs_T=log_abs_T,
        cases=cases,
        window=window,
        threshold=threshold,
        trend_slope=_trend(profile.r, log_abs_T, window),
        extra=extra,
    )


def scan_lindelof(
    profile: RateProfile,
    phi: float,
    ctx: Optional[C.ConstantsContext] = None,
    window: int = DEFAULT_WINDOW,
    threshold: float = DEFAULT_THRESHOLD,
    normalization: str = "statement",
) -> ScanVerdict:
    """``T = (delta / gamma1)^alpha1 * log eps`` at a fixed cone aperture ``phi``."""
    ctx = ctx or C.ConstantsContext()
    if profile.phi is not None:
        raise ArgumentError("the Lindelof scan takes a fixed phi, not a phi column")
    _check_window(profile, window)
    a1, g1 = C.alpha1(phi, ctx), C.gamma1(phi, ctx)
    scale = _norm_factor(normalization, ctx)
    log_abs = a1 * (np.log(profile.delta) - math.log(scale * g1)) + profile.lle
    cases = [case_split(r, d, 0.25, False, ctx, phi) for r, d in zip(profile.r, profile.delta)]
    return _finish("lindelof", profile, log_abs, cases, window, threshold,
                   {"phi": phi, "alpha1": a1, "gamma1": g1, "normalization": normalization})


def scan_tangential(
    profile: RateProfile,
    ctx: Optional[C.ConstantsContext] = None,
    window: int = DEFAULT_WINDOW,
    threshold: float = DEFAULT_THRESHOLD,
    delta_floor: Optional[float] = None,
) -> ScanVerdict:
    """``T = gamma3(phi(r))^alpha2(phi(r)) * log eps`` along an opening aperture ``phi(r)``.

    ``delta_floor`` is the lower bound assumed for the capacity column; samples
    below it raise :class:`PreconditionError`.
    """
    ctx = ctx or C.ConstantsContext()
    if profile.phi is None:
        raise ArgumentError("the tangential scan needs a phi column")
    _check_window(profile, window)
    if np.any(np.diff(profile.phi) <= 0):
        raise PreconditionError("phi(r) must increase strictly toward pi/2 as r decreases")
    if delta_floor is not None:
        if not delta_floor > 0:
            raise ArgumentError("delta_floor must be positive")
        if np.any(profile.delta < delta_floor):
            raise PreconditionError(f"delta drops below the configured floor {delta_floor}")
    a2 = np.array([C.alpha2(p, ctx) for p in profile.phi])
    lg3 = np.log([C.gamma3(p, ctx) for p in profile.phi])
    decay = a2 * lg3  # log of gamma3^alpha2
    log_abs = decay + profile.lle
    cases = [case_split(r, d, 0.5, False, ctx, p) for r, d, p in zip(profile.r, profile.delta, profile.phi)]
    tail = decay[-window:]
    extra = {
        "gamma3_pow_alpha2_last": float(np.exp(decay[-1])),
        "gamma3_pow_alpha2_decreasing": bool(np.all(np.diff(tail) < 0)),
    }
    return _finish("tangential", profile, log_abs, cases, window, threshold, extra)


def scan_koebe(
    profile: RateProfile,
    phi: float,
    ctx: Optional[C.ConstantsContext] = None,
    window: int = DEFAULT_WINDOW,
    threshold: float = DEFAULT_THRESHOLD,
    normalization: str = "statement",
) -> ScanVerdict:
    """``T = (delta / gamma4(r))^alpha3(r, phi) * log eps``."""
    ctx = ctx or C.ConstantsContext()
    if profile.phi is not None:
        raise ArgumentError("the Koebe scan takes a fixed phi, not a phi column")
    _check_window(profile, window)
    if not 0 < phi < math.pi / 2:
        raise ArgumentError("phi must lie in (0, pi/2)")
    if np.any(profile.r >= math.cos(phi)):
        raise ArgumentError("every radius must satisfy r < cos(phi)")
    scale = _norm_factor(normalization, ctx)
    a3 = np.array([C.alpha3(r, phi, ctx) for r in profile.r])
    lg4 = np.log([C.gamma4(r, ctx) for r in profile.r])
    log_abs = a3 * (np.log(profile.delta) - math.log(scale) - lg4) + profile.lle
    cases = [case_split(r, d, 0.5, True, ctx) for r, d in zip(profile.r, profile.delta)]
    return _finish("koebe", profile, log_abs, cases, window, threshold,
                   {"phi": phi, "normalization": normalization})


def scan(profile: RateProfile, ctx: Optional[C.ConstantsContext] = None, theorem: Optional[str] = None,
         phi: Optional[float] = None, **kw) -> ScanVerdict:
    """Dispatch on ``theorem`` (or the profile's ``theorem`` metadata)."""
    theorem = theorem or profile.meta.get("theorem")
    if phi is None and "phi" in profile.meta:
        phi = float(profile.meta["phi"])
    if ctx is None:
        n = int(profile.meta.get("n", C.DEFAULTS["n"]))
        ctx = C.ConstantsContext(n=n)
    if theorem == "tangential":
        return scan_tangential(profile, ctx, **kw)
    if theorem in ("lindelof", "koebe"):
        if phi is None:
            raise ArgumentError(f"the {theorem} scan needs phi")
        fn = scan_lindelof if theorem == "lindelof" else scan_koebe
        return fn(profile, phi, ctx, **kw)
    raise ArgumentError(f"unknown or missing theorem {theorem!r}")
