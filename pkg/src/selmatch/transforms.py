"""Log-score-transforms Q(z), scaling functions q(z) = Q'(z), composite
Sigmoid probabilities, and amplified scalar losses.

The score-transform is f(z) = e^{Q(z)}; the composite Sigmoid is
p(z) = sigma(Q(z) / gamma) with regularization gamma > 0, primitive
H(z) = gamma * log(1 + e^{Q(z)/gamma}), and link h(z) = q(z) * p(z).
Family names refer to the shape of the scaling q(z); the same
x = alpha * (z - beta) convention as the link catalog applies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .errors import OutOfRange
from .links import EXP_CLAMP, clamped_exp, log_cosh, softplus

TRANSFORM_FAMILIES = (
    "linear",
    "convex_quadratic",
    "exponential",
    "anti_exponential",
    "sinh",
    "cosh",
    "sigmoid_scaling",
    "tanh_scaling",
    "relu",
    "smelu",
    "shifted_power",
)

# Families whose scaling q is non-decreasing everywhere, i.e. Q convex; the
# sufficient monotone-scaling convexity condition holds for these outright.
MONOTONE_Q_FAMILIES = (
    "linear",
    "convex_quadratic",
    "exponential",
    "anti_exponential",
    "sinh",
    "sigmoid_scaling",
    "tanh_scaling",
    "relu",
    "smelu",
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_SMALL_GAP = 1e-4


def _parse_extra(family: str, extra: dict | None, gamma: float) -> dict:
    extra = dict(extra or {})
    parsed: dict = {}
    if family == "smelu":
        c = float(extra.pop("c", 1.0))
        if c <= 0:
            raise ValueError("smelu half-width c must be > 0")
        parsed["c"] = c
    elif family == "shifted_power":
        d = float(extra.pop("degree", 2.0))
        shift = float(extra.pop("shift", 2.0))
        if d < 1:
            raise ValueError("shifted_power degree must be >= 1")
        if shift < 0:
            raise ValueError("shifted_power shift must be >= 0")
        bound = max(math.sqrt(2.0 * gamma * d), gamma * d - 0.5)
        if shift < bound:
            warnings.warn(
                f"shifted_power shift {shift} is below the convexity bound "
                f"{bound:.6g}; the induced loss may not be convex",
                UserWarning,
                stacklevel=4,
            )
        parsed["degree"] = d
        parsed["shift"] = shift
    if extra:
        raise ValueError(f"unknown extra key(s) for {family} transform: {sorted(extra)}")
    return parsed


@dataclass(frozen=True)
class TransformSpec:
    """A log-score-transform family instance with scale, shift, and
    regularization gamma."""

    family: str
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in TRANSFORM_FAMILIES:
            raise ValueError(f"unknown transform family '{self.family}'")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be a positive finite real")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be a positive finite real")
        object.__setattr__(self, "extra", _parse_extra(self.family, self.extra, self.gamma))

    def x(self, z):
        return self.alpha * (np.asarray(z, dtype=float) - self.beta)

    @property
    def monotone_scaling(self) -> bool:
        return self.family in MONOTONE_Q_FAMILIES


def _base_qQ(family: str, x, extra: dict):
    """Return (q~(x), Q~(x), q~'(x)) in x-space, with dQ~/dx = q~."""
    x = np.asarray(x, dtype=float)
    if family == "linear":
        one = np.ones_like(x)
        return one, x, np.zeros_like(x)
    if family == "convex_quadratic":
        return x, 0.5 * x * x, np.ones_like(x)
    if family == "exponential":
        e = clamped_exp(x)
        return e, e, e
    if family == "anti_exponential":
        e = clamped_exp(-x)
        return -e, e, e
    if family == "sinh":
        xc = np.clip(x, -EXP_CLAMP, EXP_CLAMP)
        return np.sinh(xc), np.cosh(xc), np.cosh(xc)
    if family == "cosh":
        xc = np.clip(x, -EXP_CLAMP, EXP_CLAMP)
        return np.cosh(xc), np.sinh(xc), np.sinh(xc)
    if family == "sigmoid_scaling":
        s = expit(x)
        return s, softplus(x), s * (1.0 - s)
    if family == "tanh_scaling":
        t = np.tanh(x)
        return t, log_cosh(x), 1.0 - t * t
    if family == "relu":
        v = (x >= 0).astype(float)
        return v, np.maximum(x, 0.0), np.zeros_like(x)
    if family == "smelu":
        c = extra["c"]
        q = np.where(x <= -c, 0.0, np.where(x < c, (x + c) / (2.0 * c), 1.0))
        Q = np.where(x <= -c, 0.0, np.where(x < c, (x + c) ** 2 / (4.0 * c), x))
        dq = np.where((x >= -c) & (x < c), 1.0 / (2.0 * c), 0.0)
        return q, Q, dq
    if family == "shifted_power":
        d, c = extra["degree"], extra["shift"]
        ax = np.abs(x)
        sign_rc = np.where(x >= 0, 1.0, -1.0)
        q = ax ** d + c
        Q = np.sign(x) * ax ** (d + 1) / (d + 1.0) + c * x
        dq = d * ax ** (d - 1.0) * sign_rc
        return q, Q, dq
    raise ValueError(f"unknown transform family '{family}'")


def scaling_value(spec: TransformSpec, z) -> np.ndarray:
    """Vectorized scaling q(z) = dQ/dz."""
    return spec.alpha * _base_qQ(spec.family, spec.x(z), spec.extra)[0]


def log_transform_value(spec: TransformSpec, z) -> np.ndarray:
    """Vectorized log-score-transform Q(z)."""
    return _base_qQ(spec.family, spec.x(z), spec.extra)[1]


def scaling_slope(spec: TransformSpec, z) -> np.ndarray:
    """Vectorized q'(z); right-limit convention at piecewise boundaries."""
    return spec.alpha ** 2 * _base_qQ(spec.family, spec.x(z), spec.extra)[2]


def transform_breakpoints(spec: TransformSpec) -> tuple[float, ...]:
    """z-space locations where q or q' is non-smooth."""
    if spec.family == "relu":
        xs = (0.0,)
    elif spec.family == "smelu":
        c = spec.extra["c"]
        xs = (-c, c)
    elif spec.family == "shifted_power":
        xs = (0.0,)
    else:
        return ()
    return tuple(spec.beta + x / spec.alpha for x in xs)


def composite_p(spec: TransformSpec, z) -> np.ndarray:
    """Composite Sigmoid probability p(z) = sigma(Q(z) / gamma)."""
    return expit(log_transform_value(spec, z) / spec.gamma)


def composite_h(spec: TransformSpec, z) -> np.ndarray:
    """Composite link h(z) = q(z) * p(z)."""
    return scaling_value(spec, z) * composite_p(spec, z)


def composite_h_slope(spec: TransformSpec, z) -> np.ndarray:
    """Sensitivity h'(z) = p * (q' + (1/gamma) (1 - p) q^2)."""
    q = scaling_value(spec, z)
    dq = scaling_slope(spec, z)
    p = composite_p(spec, z)
    return p * (dq + (1.0 - p) * q * q / spec.gamma)


def composite_primitive(spec: TransformSpec, z) -> np.ndarray:
    """Primitive H(z) = gamma * log(1 + e^{Q(z)/gamma}); dH/dz = h."""
    return spec.gamma * softplus(log_transform_value(spec, z) / spec.gamma)


class CompositeEval(NamedTuple):
    q: float
    Q: float
    f: float
    p: float
    h: float
    h_slope: float


def transform_eval(spec: TransformSpec, z: float) -> CompositeEval:
    """Evaluate scaling, log-transform, score-transform, composite Sigmoid,
    link, and sensitivity at a single finite score."""
    if not math.isfinite(z):
        raise OutOfRange("score must be finite")
    q = float(scaling_value(spec, z))
    Q = float(log_transform_value(spec, z))
    p = float(expit(Q / spec.gamma))
    dq = float(scaling_slope(spec, z))
    return CompositeEval(
        q=q,
        Q=Q,
        f=float(clamped_exp(Q)),
        p=p,
        h=q * p,
        h_slope=p * (dq + (1.0 - p) * q * q / spec.gamma),
    )


def _check_finite(*scores):
    for s in scores:
        if not math.isfinite(s):
            raise OutOfRange("scores must be finite")


def amplified_loss(spec: TransformSpec, s_hat: float, s: float) -> float:
    """Composite-Sigmoid matching loss
    gamma*log(1+e^{Q(sh)/gamma}) - gamma*log(1+e^{Q(s)/gamma}) - (sh-s) q(s) p(s)."""
    _check_finite(s_hat, s)
    if s_hat == s:
        return 0.0
    gap = s_hat - s
    if abs(gap) <= _SMALL_GAP:
        mid = 0.5 * (s_hat + s)
        zs = mid + 0.5 * gap * _GL_NODES
        vals = composite_h(spec, zs) - composite_h(spec, np.array(s))
        return float(0.5 * gap * np.dot(_GL_WEIGHTS, vals))
    h_s = float(composite_h(spec, s))
    return float(composite_primitive(spec, s_hat) - composite_primitive(spec, s)) - gap * h_s


def amplified_grad(spec: TransformSpec, s_hat: float, s: float) -> float:
    """Gradient of the amplified loss: q(sh) p(sh) - q(s) p(s)."""
    _check_finite(s_hat, s)
    return float(composite_h(spec, s_hat) - composite_h(spec, s))


def ce_loss_composite(spec: TransformSpec, s_hat: float, s: float) -> tuple[float, float]:
    """Cross-entropy loss/gradient under the composite Sigmoid probability.

    The gradient q(sh) * [p(sh) - p(s)] differs from the matching gradient
    unless Q is linear; injectivity of p on the evaluation domain is the
    caller's contract.
    """
    _check_finite(s_hat, s)
    Q_hat = float(log_transform_value(spec, s_hat))
    p_s = float(composite_p(spec, s))
    loss = spec.gamma * float(softplus(Q_hat / spec.gamma)) - p_s * Q_hat
    grad = float(scaling_value(spec, s_hat)) * (float(composite_p(spec, s_hat)) - p_s)
    return loss, grad
