"""Constant ledger of the two-constants method.

``lambda_K``, ``c0`` and ``c2`` depend only on ``n`` and ``K`` but have no known
numeric values; they are configuration fields with labelled defaults. Every
other constant is derived from them by a fixed formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from scipy import integrate

from .errors import ArgumentError

PINNED = "pinned"
CONFIGURED_DEFAULT = "configured-default"
USER_CONFIGURED = "user-configured"

DEFAULTS = {"n": 2, "K": 1.0, "lambda_K": 0.25, "c0": 1.0, "c2": 1.0}
DERIVED = ("c1", "b_n", "c3", "beta0")
_INTS = {"n"}


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(1 + n / 2)


def sphere_measure(m: int) -> float:
    """(m)-dimensional measure of the unit sphere in R^(m+1)."""
    return (m + 1) * ball_volume(m + 1)


def sine_power_integral(a: float) -> float:
    """Integral of ``sin(t)**a`` over ``[0, pi/2]`` for ``a > -1`` (adaptive quadrature).

    The factor ``t**a`` is handed to QUADPACK as an algebraic weight so the
    endpoint singularity for negative ``a`` costs nothing.
    """
    if a <= -1:
        raise ArgumentError("the integral diverges for a <= -1")
    if a == 0:
        return math.pi / 2

    def smooth(t):
        return (math.sin(t) / t) ** a if t > 0 else 1.0

    val, _ = integrate.quad(smooth, 0.0, math.pi / 2, weight="alg", wvar=(a, 0.0), epsabs=1e-13, epsrel=1e-13)
    return val


def b_n(n: int) -> float:
    """Spherical-cap constant ``2^(1-2n) w_{n-2} I^(1-n)`` with ``I = int sin^((2-n)/(n-1))``."""
    if int(n) != n or n < 2:
        raise ArgumentError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    integral = sine_power_integral((2 - n) / (n - 1))
    return 2.0 ** (1 - 2 * n) * sphere_measure(n - 2) * integral ** (1 - n)


@dataclass(frozen=True)
class ConstantsContext:
    n: int = DEFAULTS["n"]
    K: float = DEFAULTS["K"]
    lambda_K: float = DEFAULTS["lambda_K"]
    c0: float = DEFAULTS["c0"]
    c2: float = DEFAULTS["c2"]
    configured: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ArgumentError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.K >= 1:
            raise ArgumentError(f"K must be >= 1, got {self.K!r}")
        if not 0 < self.lambda_K < 0.5:
            raise ArgumentError(f"lambda_K must lie in (0, 1/2), got {self.lambda_K!r}")
        if not self.c0 > 0:
            raise ArgumentError(f"c0 must be positive, got {self.c0!r}")
        if not self.c2 > 0:
            raise ArgumentError(f"c2 must be positive, got {self.c2!r}")
        unknown = set(self.configured) - set(DEFAULTS)
        if unknown:
            raise ArgumentError(f"unknown configured fields: {sorted(unknown)}")

    # derived ledger
    @property
    def c1(self) -> float:
        return 1.0 / math.log1p(self.lambda_K)

    @property
    def b_n(self) -> float:
        return b_n(self.n)

    @property
    def c3(self) -> float:
        return 2.0**self.n * self.b_n

    @property
    def beta0(self) -> float:
        return self.c2 * (self.c3 / (2.0 * self.c1)) ** (1.0 / (self.n - 1))

    def provenance(self) -> dict:
        out = {}
        for name in DEFAULTS:
            out[name] = USER_CONFIGURED if name in self.configured else CONFIGURED_DEFAULT
        for name in DERIVED:
            out[name] = PINNED
        return out

    def ledger(self) -> dict:
        vals = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "configured"}
        vals.update({name: getattr(self, name) for name in DERIVED})
        return vals

    def with_values(self, **kw) -> "ConstantsContext":
        conf = frozenset(self.configured | set(kw))
        return replace(self, configured=conf, **kw)

    @classmethod
    def from_mapping(cls, values: dict) -> "ConstantsContext":
        bad = [k for k in values if k in DERIVED]
        if bad:
            raise ArgumentError(f"derived constants cannot be configured: {bad}")
        unknown = [k for k in values if k not in DEFAULTS]
        if unknown:
            raise ArgumentError(f"unknown configuration keys: {unknown}")
        kw = {}
        for k, v in values.items():
            try:
                kw[k] = int(v) if k in _INTS else float(v)
            except (TypeError, ValueError):
                raise ArgumentError(f"bad value for {k}: {v!r}") from None
        return cls(configured=frozenset(kw), **kw)

    @classmethod
    def from_file(cls, path, overrides: Optional[dict] = None) -> "ConstantsContext":
        """Read ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        text = Path(path).read_text()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ArgumentError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key in values:
                raise ArgumentError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = val
        values.update(overrides or {})
        return cls.from_mapping(values)


def c1_of(lambda_K: float) -> float:
    return 1.0 / math.log1p(lambda_K)


def _positive(name, v):
    if not v > 0:
        raise ArgumentError(f"{name} must be positive, got {v!r}")


def beta(delta: float, N: float, ctx: ConstantsContext) -> float:
    """``c2 * min((delta/N)^(1/(n-1)), (c3/(2 c1))^(1/(n-1)))``."""
    _positive("delta", delta)
    _positive("N", N)
    if delta >= saturation_delta(N, ctx):
        return ctx.beta0
    return ctx.c2 * min((delta / N) ** (1.0 / (ctx.n - 1)), (ctx.c3 / (2.0 * ctx.c1)) ** (1.0 / (ctx.n - 1)))


def saturation_delta(N: float, ctx: ConstantsContext) -> float:
    """Smallest ``delta`` for which ``beta`` equals ``beta0``."""
    return ctx.c3 * N / (2.0 * ctx.c1)


def gamma_inner(a: float, phi_or_r: float, lam: float, use_r_form: bool = False) -> float:
    """Base of the N-bound before raising to the n-th power."""
    if not 0 < a < 1:
        raise ArgumentError(f"a must lie in (0, 1), got {a!r}")
    if use_r_form:
        t = phi_or_r
        if not 0 < t < 1:
            raise ArgumentError(f"r must lie in (0, 1), got {t!r}")
    else:
        if not 0 < phi_or_r < math.pi / 2:
            raise ArgumentError(f"phi must lie in (0, pi/2), got {phi_or_r!r}")
        t = math.cos(phi_or_r)
    return 2.0 + (2.0 + a * t) * (1.0 + a) / (a * (2.0 - a) * t * t * lam)


def n_bound(a: float, phi_or_r: float, use_r_form: bool, ctx: ConstantsContext) -> float:
    """``c0 * gamma(a, phi)`` or, with ``use_r_form``, ``c0 * gamma~(a, r)``."""
    return ctx.c0 * gamma_inner(a, phi_or_r, ctx.lambda_K, use_r_form) ** ctx.n


def _check_phi(phi):
    if not 0 < phi < math.pi / 2:
        raise ArgumentError(f"phi must lie in (0, pi/2), got {phi!r}")


def gamma1(phi, ctx):
    _check_phi(phi)
    c, lam = math.cos(phi), ctx.lambda_K
    return ((14 * lam * c * c + 5 * c + 40) / (7 * lam * c * c)) ** ctx.n


def gamma2(phi, ctx):
    _check_phi(phi)
    c, lam = math.cos(phi), ctx.lambda_K
    return ((2 * lam * c * c + c + 4) / (lam * c * c)) ** ctx.n


def gamma3(phi, ctx):
    _check_phi(phi)
    c, lam = math.cos(phi), ctx.lambda_K
    return ((2 * lam * c * c + c + 4) / (lam * c * c)) ** (ctx.n / (1 - ctx.n))


def gamma4(r, ctx):
    if not 0 < r < 1:
        raise ArgumentError(f"r must lie in (0, 1), got {r!r}")
    lam = ctx.lambda_K
    return ((2 * lam * r * r + r + 4) / (lam * r * r)) ** ctx.n


def alpha1(phi, ctx):
    _check_phi(phi)
    return (24 * ctx.c1 / math.cos(phi) + 1) / (ctx.n - 1)


def alpha2(phi, ctx):
    _check_phi(phi)
    c = math.cos(phi)
    return 2 * ctx.c1 * math.log1p((4 + c) / (c * c)) + 1


def alpha3(r, phi, ctx):
    from .metrics import s_bound

    return (s_bound(r, phi) * ctx.c1 + 1) / (ctx.n - 1)


THEOREMS = ("lindelof", "tangential", "koebe")


def theorem_constants(which: str, phi: float, r: Optional[float] = None, ctx: Optional[ConstantsContext] = None) -> dict:
    ctx = ctx or ConstantsContext()
    if which == "lindelof":
        return {"alpha1": alpha1(phi, ctx), "gamma1": gamma1(phi, ctx)}
    if which == "tangential":
        return {"alpha2": alpha2(phi, ctx), "gamma2": gamma2(phi, ctx), "gamma3": gamma3(phi, ctx)}
    if which == "koebe":
        if r is None:
            raise ArgumentError("the koebe constants need a radius r")
        _check_phi(phi)
        if not 0 < r < math.cos(phi):
            raise ArgumentError(f"r must lie in (0, cos(phi)), got {r!r}")
        return {"alpha3": alpha3(r, phi, ctx), "gamma4": gamma4(r, ctx)}
    raise ArgumentError(f"unknown theorem {which!r}; expected one of {THEOREMS}")
