"""Catalog of scalar link functions h(z), their primitives H(z), and slopes h'(z).

Every family is parameterized by a scale ``alpha`` and shift ``beta`` through
the shifted/scaled argument ``x = alpha * (z - beta)``; positive ``beta``
moves the sensitive region to the right.  Primitives are normalized with the
``1/alpha`` outer factor (e.g. Sigmoid -> log(1 + e^x) / alpha) so that
dH/dz = h exactly, with no rescaling between numeric and analytic values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .errors import NonInjectiveLink, OutOfRange

# Arguments to exp/sinh/cosh are clamped here: beyond it results saturate to
# large finite values instead of overflowing to inf.
EXP_CLAMP = 700.0

LINK_FAMILIES = (
    "sigmoid",
    "identity",
    "exponential",
    "anti_exponential",
    "sinh",
    "tanh",
    "step",
    "sign",
    "smelu_grad",
    "huber_grad",
    "staircase",
)

# Families whose link is strictly increasing on all of R (no flat segments).
STRICTLY_INCREASING_FAMILIES = (
    "sigmoid",
    "identity",
    "exponential",
    "anti_exponential",
    "sinh",
    "tanh",
)


def _clip_exp_arg(x):
    return np.clip(x, -EXP_CLAMP, EXP_CLAMP)


def clamped_exp(x):
    """exp with the argument clamped to +-EXP_CLAMP (saturates, never inf)."""
    return np.exp(_clip_exp_arg(x))


def softplus(x):
    """Numerically stable log(1 + e^x)."""
    return np.logaddexp(0.0, x)


def log_cosh(x):
    """Numerically stable log(cosh(x))."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * np.minimum(ax, EXP_CLAMP))) - math.log(2.0)


@dataclass(frozen=True)
class ScoreDomain:
    """Compact score interval [s_min, s_max] with a uniform evaluation grid."""

    s_min: float
    s_max: float
    grid_points: int = 4096

    def __post_init__(self):
        if not (math.isfinite(self.s_min) and math.isfinite(self.s_max)):
            raise ValueError("domain endpoints must be finite")
        if not self.s_min < self.s_max:
            raise ValueError("domain requires s_min < s_max")
        if self.grid_points < 2:
            raise ValueError("domain requires grid_points >= 2")

    @property
    def span(self) -> float:
        return self.s_max - self.s_min

    def grid(self, points: int | None = None) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, points or self.grid_points)


def _parse_extra(family: str, extra: dict | None) -> dict:
    extra = dict(extra or {})

    def take(key, default=None):
        if key in extra:
            return extra.pop(key)
        if default is None:
            raise ValueError(f"{family} link requires extra key '{key}'")
        return default

    parsed: dict = {}
    if family == "smelu_grad":
        c = float(take("c", 1.0))
        if c <= 0:
            raise ValueError("smelu_grad half-width c must be > 0")
        parsed["c"] = c
    elif family == "huber_grad":
        t = float(take("threshold", 1.0))
        if t <= 0:
            raise ValueError("huber_grad threshold must be > 0")
        parsed["threshold"] = t
    elif family == "staircase":
        breakpoints = tuple(float(b) for b in take("breakpoints"))
        levels = tuple(float(v) for v in take("levels"))
        if len(breakpoints) < 1:
            raise ValueError("staircase requires at least one breakpoint")
        if any(b2 <= b1 for b1, b2 in zip(breakpoints, breakpoints[1:])):
            raise ValueError("staircase breakpoints must be strictly increasing")
        if len(levels) != len(breakpoints) + 1:
            raise ValueError("staircase needs len(levels) == len(breakpoints) + 1")
        if any(l2 < l1 for l1, l2 in zip(levels, levels[1:])):
            raise ValueError("staircase levels must be non-decreasing")
        parsed["breakpoints"] = breakpoints
        parsed["levels"] = levels
    if extra:
        raise ValueError(f"unknown extra key(s) for {family} link: {sorted(extra)}")
    return parsed


@dataclass(frozen=True)
class LinkSpec:
    """A scalar link family instance with shift/scale parameters.

    The link is evaluated as h(z) = base(x) with x = alpha * (z - beta);
    all catalog families are non-decreasing by construction once the
    parameter invariants below hold.
    """

    family: str
    alpha: float = 1.0
    beta: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in LINK_FAMILIES:
            raise ValueError(f"unknown link family '{self.family}'")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be a positive finite real")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "extra", _parse_extra(self.family, self.extra))

    def x(self, z):
        return self.alpha * (np.asarray(z, dtype=float) - self.beta)

    @property
    def strictly_increasing(self) -> bool:
        return self.family in STRICTLY_INCREASING_FAMILIES


class LinkEval(NamedTuple):
    h: float
    H: float
    h_slope: float


# Base families in x-space: value b(x), primitive B(x) with dB/dx = b, and
# slope b'(x).  At piecewise boundaries the right-limit value is used.


def _stair_value(x, breakpoints, levels):
    b = np.asarray(breakpoints)
    lv = np.asarray(levels)
    idx = np.searchsorted(b, x, side="right")
    return lv[idx]


def _stair_primitive(x, breakpoints, levels):
    # Exact piecewise-linear closed form, anchored at the first breakpoint.
    b = np.asarray(breakpoints)
    lv = np.asarray(levels)
    knot_integral = np.concatenate([[0.0], np.cumsum(lv[1:-1] * np.diff(b))]) if len(b) > 1 else np.array([0.0])
    idx = np.searchsorted(b, x, side="right")
    start = np.where(idx > 0, b[np.maximum(idx - 1, 0)], b[0])
    base = np.where(idx > 0, knot_integral[np.maximum(idx - 1, 0)], 0.0)
    return base + lv[idx] * (np.asarray(x, dtype=float) - start)


def _base_eval(family: str, x, extra: dict):
    """Return (b(x), B(x), b'(x)) for the base family in x-space."""
    x = np.asarray(x, dtype=float)
    if family == "sigmoid":
        s = expit(x)
        return s, softplus(x), s * (1.0 - s)
    if family == "identity":
        one = np.ones_like(x)
        return x, 0.5 * x * x, one
    if family == "exponential":
        e = clamped_exp(x)
        return e, e, e
    if family == "anti_exponential":
        e = clamped_exp(-x)
        return -e, e, e
    if family == "sinh":
        xc = _clip_exp_arg(x)
        return np.sinh(xc), np.cosh(xc), np.cosh(xc)
    if family == "tanh":
        t = np.tanh(x)
        return t, log_cosh(x), 1.0 - t * t
    if family == "step":
        v = (x >= 0).astype(float)
        return v, np.maximum(x, 0.0), np.zeros_like(x)
    if family == "sign":
        v = np.where(x >= 0, 1.0, -1.0)
        return v, np.abs(x), np.zeros_like(x)
    if family == "smelu_grad":
        c = extra["c"]
        v = np.where(x <= -c, 0.0, np.where(x < c, (x + c) / (2.0 * c), 1.0))
        prim = np.where(x <= -c, 0.0, np.where(x < c, (x + c) ** 2 / (4.0 * c), x))
        slope = np.where((x >= -c) & (x < c), 1.0 / (2.0 * c), 0.0)
        return v, prim, slope
    if family == "huber_grad":
        t = extra["threshold"]
        v = np.clip(x, -t, t) / t
        prim = np.where(np.abs(x) <= t, 0.5 * x * x / t, np.abs(x) - 0.5 * t)
        slope = np.where((x >= -t) & (x < t), 1.0 / t, 0.0)
        return v, prim, slope
    if family == "staircase":
        b, lv = extra["breakpoints"], extra["levels"]
        return _stair_value(x, b, lv), _stair_primitive(x, b, lv), np.zeros_like(x)
    raise ValueError(f"unknown link family '{family}'")


def link_value(spec: LinkSpec, z) -> np.ndarray:
    """Vectorized link h(z)."""
    return _base_eval(spec.family, spec.x(z), spec.extra)[0]


def link_primitive(spec: LinkSpec, z) -> np.ndarray:
    """Vectorized primitive H(z) (anti-derivative of the link)."""
    return _base_eval(spec.family, spec.x(z), spec.extra)[1] / spec.alpha


def link_slope(spec: LinkSpec, z) -> np.ndarray:
    """Vectorized slope h'(z); right-limit convention at piecewise boundaries."""
    return spec.alpha * _base_eval(spec.family, spec.x(z), spec.extra)[2]


def link_breakpoints(spec: LinkSpec) -> tuple[float, ...]:
    """z-space locations where the link or its slope is non-smooth."""
    if spec.family in ("step", "sign"):
        xs = (0.0,)
    elif spec.family == "smelu_grad":
        c = spec.extra["c"]
        xs = (-c, c)
    elif spec.family == "huber_grad":
        t = spec.extra["threshold"]
        xs = (-t, t)
    elif spec.family == "staircase":
        xs = spec.extra["breakpoints"]
    else:
        return ()
    return tuple(spec.beta + x / spec.alpha for x in xs)


def link_eval(spec: LinkSpec, z: float) -> LinkEval:
    """Evaluate (h(z), H(z), h'(z)) at a single finite score."""
    if not math.isfinite(z):
        raise OutOfRange("score must be finite")
    b, prim, slope = _base_eval(spec.family, spec.x(z), spec.extra)
    return LinkEval(float(b), float(prim) / spec.alpha, spec.alpha * float(slope))


def _first_true(pred, lo: float, hi: float, iterations: int = 200) -> float:
    """Smallest point in [lo, hi] where a monotone predicate turns True.

    Assumes pred(lo) is False and pred(hi) is True (callers handle the
    degenerate ends).
    """
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _last_true(pred, lo: float, hi: float, iterations: int = 200) -> float:
    """Largest point in [lo, hi] where a monotone predicate remains True.

    Assumes pred(lo) is True and pred(hi) is False.
    """
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def link_inverse(spec: LinkSpec, y: float, domain: ScoreDomain) -> float:
    """Invert the link on a domain by bracketed bisection.

    Raises OutOfRange when y lies outside [h(s_min), h(s_max)] and
    NonInjectiveLink when the preimage of y is a flat segment (piecewise
    families with constant pieces).
    """
    if not math.isfinite(y):
        raise OutOfRange("target value must be finite")
    h_lo = float(link_value(spec, domain.s_min))
    h_hi = float(link_value(spec, domain.s_max))
    tol = 1e-12 * max(1.0, abs(h_lo), abs(h_hi))
    if y < h_lo - tol or y > h_hi + tol:
        raise OutOfRange(
            f"value {y} outside link image [{h_lo}, {h_hi}] on the domain"
        )
    y = min(max(y, h_lo), h_hi)

    # Leftmost z with h(z) >= y and rightmost z with h(z) <= y; for a strictly
    # increasing link both collapse onto the root, for a flat segment they
    # straddle it.
    if h_lo >= y:
        z_left = domain.s_min
    else:
        z_left = _first_true(lambda z: float(link_value(spec, z)) >= y,
                             domain.s_min, domain.s_max)
    if h_hi <= y:
        z_right = domain.s_max
    else:
        z_right = _last_true(lambda z: float(link_value(spec, z)) <= y,
                             domain.s_min, domain.s_max)

    if z_right - z_left > 1e-6 * domain.span:
        raise NonInjectiveLink(
            f"link is flat at value {y} over [{z_left}, {z_right}]"
        )
    # Piecewise links can jump over y entirely; such a y is not in the image.
    gap_tol = 1e-9 * max(1.0, abs(y))
    h_left = float(link_value(spec, z_left))
    h_right = float(link_value(spec, z_right))
    if h_left - y > gap_tol and y - h_right > gap_tol:
        raise OutOfRange(f"value {y} falls in a jump of the link image")
    return 0.5 * (z_left + z_right)
