"""Scalar matching losses, CE comparator, properness solving, and
bias-underspecification sensitivity (BUST/BLUST)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DegenerateDomain, OutOfRange, RootNotBracketed
from .links import (
    EXP_CLAMP,
    LinkSpec,
    ScoreDomain,
    link_eval,
    link_inverse,
    link_primitive,
    link_slope,
    link_value,
    softplus,
)

_EXP_FAMILIES = ("exponential", "anti_exponential", "sinh")

# Gauss-Legendre rule used for near-equal scores, where the closed Bregman
# form H(sh) - H(s) - (sh - s) h(s) loses all significant digits to
# cancellation.  The integral form keeps the loss exact and non-negative.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_SMALL_GAP = 1e-4


def _check_finite(*scores):
    for s in scores:
        if not math.isfinite(s):
            raise OutOfRange("scores must be finite")


def _warn_if_clamped(spec: LinkSpec, *scores):
    if spec.family in _EXP_FAMILIES:
        if any(abs(spec.x(s)) > EXP_CLAMP for s in scores):
            warnings.warn(
                "exponent argument exceeded the clamp; result is saturated",
                RuntimeWarning,
                stacklevel=3,
            )


def matching_loss(link: LinkSpec, s_hat: float, s: float) -> float:
    """Bregman loss H(sh) - H(s) - (sh - s) h(s); the area accumulated by
    the link between the observed score and the estimate."""
    _check_finite(s_hat, s)
    _warn_if_clamped(link, s_hat, s)
    if s_hat == s:
        return 0.0
    gap = s_hat - s
    if abs(gap) <= _SMALL_GAP:
        mid = 0.5 * (s_hat + s)
        zs = mid + 0.5 * gap * _GL_NODES
        vals = link_value(link, zs) - link_value(link, np.array(s))
        return float(0.5 * gap * np.dot(_GL_WEIGHTS, vals))
    h_s = float(link_value(link, s))
    return float(link_primitive(link, s_hat) - link_primitive(link, s)) - gap * h_s


def matching_grad(link: LinkSpec, s_hat: float, s: float) -> float:
    """Loss gradient with respect to the estimate: h(sh) - h(s)."""
    _check_finite(s_hat, s)
    return float(link_value(link, s_hat) - link_value(link, s))


def ce_loss_sigmoid(alpha: float, beta: float, s_hat: float, s: float) -> tuple[float, float]:
    """Cross-entropy loss/gradient for the Sigmoid probability p = sigma(alpha (z - beta)).

    Its gradient p(sh) - p(s) coincides with the Sigmoid-link matching
    gradient, which is what makes the Sigmoid case replicable by CE.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    _check_finite(s_hat, s)
    x_hat = alpha * (s_hat - beta)
    p_s = float(expit(alpha * (s - beta)))
    loss = (float(softplus(x_hat)) - p_s * x_hat) / alpha
    grad = float(expit(x_hat)) - p_s
    return loss, grad


@dataclass(frozen=True)
class WeightedScores:
    """A finite observed-score distribution: (score, weight) pairs.

    Weights are normalized internally; they only need to be positive.
    """

    entries: tuple

    def __init__(self, entries):
        pairs = tuple((float(s), float(w)) for s, w in entries)
        if not pairs:
            raise ValueError("at least one (score, weight) entry required")
        for s, w in pairs:
            if not math.isfinite(s):
                raise ValueError("scores must be finite")
            if not (math.isfinite(w) and w > 0):
                raise ValueError("weights must be positive finite reals")
        object.__setattr__(self, "entries", pairs)

    @property
    def scores(self) -> np.ndarray:
        return np.array([s for s, _ in self.entries])

    @property
    def weights(self) -> np.ndarray:
        w = np.array([w for _, w in self.entries])
        return w / w.sum()

    def mean(self) -> float:
        return float(np.dot(self.weights, self.scores))


def proper_prediction(link: LinkSpec, obs: WeightedScores, domain: ScoreDomain) -> float:
    """The loss-minimizing prediction: h^{-1} of the expected link value.

    Raises NonInjectiveLink on flat links and OutOfRange when the
    expectation falls outside the link image on the domain.
    """
    target = float(np.dot(obs.weights, link_value(link, obs.scores)))
    return link_inverse(link, target, domain)


@dataclass(frozen=True)
class BustConfig:
    """Setup for bias-underspecification sensitivity on a compact domain.

    w_u is the center of the biased observation interval, d the observation
    bias, and tau the interval width (used by the simulation oracle only).
    """

    domain: ScoreDomain
    w_u: float
    d: float
    tau: float = 1e-3

    def __post_init__(self):
        if not (math.isfinite(self.w_u) and math.isfinite(self.d)):
            raise ValueError("w_u and d must be finite")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError("tau must be a positive finite real")
        if self.tau > 0.1 * self.domain.span:
            raise ValueError("tau must be small relative to the domain span")
        if (self.w_u - 0.5 * self.tau < self.domain.s_min
                or self.w_u + 0.5 * self.tau > self.domain.s_max):
            raise ValueError("biased interval must lie inside the domain")


def _link_span(link: LinkSpec, domain: ScoreDomain) -> float:
    span = float(link_value(link, domain.s_max) - link_value(link, domain.s_min))
    if span <= 0.0:
        raise DegenerateDomain("link span h(s_max) - h(s_min) is not positive")
    return span


def bust(link: LinkSpec, cfg: BustConfig) -> float:
    """Normalized prediction offset caused by a localized observation bias:
    [h(w_u + d) - h(w_u)] / [h(s_max) - h(s_min)]."""
    span = _link_span(link, cfg.domain)
    return float(link_value(link, cfg.w_u + cfg.d) - link_value(link, cfg.w_u)) / span


def blust(link: LinkSpec, domain: ScoreDomain, w_u: float) -> float:
    """Local (infinitesimal-bias) sensitivity: h'(w_u) / [h(s_max) - h(s_min)]."""
    span = _link_span(link, domain)
    return float(link_slope(link, w_u)) / span


def bust_simulate(link: LinkSpec, cfg: BustConfig) -> float:
    """Independent oracle for bust(): solve the finite-width optimality
    equation for the prediction displacement and normalize by tau.

    The optimal displacement solves
        [H(s_max + delta) - H(s_max)] - [H(s_min + delta) - H(s_min)] = rhs
    where rhs is the primitive increment produced by shifting the biased
    interval; the equation's left side is non-decreasing in delta, so the
    root is found by expanding-bracket bisection.
    """
    dom, tau, d, w = cfg.domain, cfg.tau, cfg.d, cfg.w_u

    def H(z):
        return float(link_primitive(link, z))

    rhs = (H(w + 0.5 * tau + d) - H(w - 0.5 * tau + d)
           - H(w + 0.5 * tau) + H(w - 0.5 * tau))

    def g(delta):
        return (H(dom.s_max + delta) - H(dom.s_max)
                - H(dom.s_min + delta) + H(dom.s_min) - rhs)

    if rhs == 0.0:
        return 0.0

    radius = max(abs(d), tau, 1e-8)
    lo, hi = -radius, radius
    for _ in range(64):
        if g(lo) <= 0.0 <= g(hi):
            break
        radius *= 2.0
        lo, hi = -radius, radius
        if radius > 4.0 * dom.span:
            raise RootNotBracketed("no sign change for the displacement equation")
    else:
        raise RootNotBracketed("no sign change for the displacement equation")

    delta = 0.5 * (lo + hi)
    for _ in range(200):
        delta = 0.5 * (lo + hi)
        val = g(delta)
        if abs(val) <= 1e-12:
            break
        if val < 0.0:
            lo = delta
        else:
            hi = delta
    return delta / tau
