"""Multi-class selective matching losses via composite Softmax: log-partition,
link vector, loss/gradient/Hessian, diagonal decomposition, and the
standard-Softmax / CE baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch
from .links import LinkSpec
from .scalar import matching_loss, matching_grad
from .transforms import (
    TransformSpec,
    log_transform_value,
    scaling_slope,
    scaling_value,
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_SMALL_GAP = 1e-4


def as_score_vector(values) -> np.ndarray:
    """Validate and return a K-dimensional score vector (K >= 2, finite)."""
    z = np.asarray(values, dtype=float)
    if z.ndim != 1 or z.size < 2:
        raise ValueError("score vector must be one-dimensional with K >= 2")
    if not np.all(np.isfinite(z)):
        raise ValueError("score vector entries must be finite")
    return z


def _pair(s_hat, s) -> tuple[np.ndarray, np.ndarray]:
    s_hat = as_score_vector(s_hat)
    s = as_score_vector(s)
    if s_hat.shape != s.shape:
        raise DimensionMismatch(
            f"score vectors differ in length: {s_hat.size} vs {s.size}"
        )
    return s_hat, s


def composite_softmax(spec: TransformSpec, z) -> np.ndarray:
    """p_k = e^{Q(z_k)/gamma} / sum_j e^{Q(z_j)/gamma}, via max-subtraction."""
    z = as_score_vector(z)
    w = log_transform_value(spec, z) / spec.gamma
    e = np.exp(w - w.max())
    return e / e.sum()


def log_partition(spec: TransformSpec, z) -> float:
    """H(z) = gamma * log sum_k e^{Q(z_k)/gamma}, stable via max-subtraction."""
    z = as_score_vector(z)
    return spec.gamma * float(logsumexp(log_transform_value(spec, z) / spec.gamma))


def mc_link(spec: TransformSpec, z) -> np.ndarray:
    """Gradient of the log-partition: h_k(z) = q(z_k) * p_k(z)."""
    z = as_score_vector(z)
    return scaling_value(spec, z) * composite_softmax(spec, z)


def mc_matching_loss(spec: TransformSpec, s_hat, s) -> float:
    """Multi-class Bregman loss H(sh) - H(s) - sum_k (sh_k - s_k) q(s_k) p_k(s)."""
    s_hat, s = _pair(s_hat, s)
    delta = s_hat - s
    if not delta.any():
        return 0.0
    if np.max(np.abs(delta)) <= _SMALL_GAP:
        # Line-integral form along the segment; avoids Bregman cancellation.
        h_s = mc_link(spec, s)
        total = 0.0
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            t = 0.5 * (node + 1.0)
            total += 0.5 * weight * float(np.dot(mc_link(spec, s + t * delta) - h_s, delta))
        return total
    return (log_partition(spec, s_hat) - log_partition(spec, s)
            - float(np.dot(delta, mc_link(spec, s))))


def mc_matching_grad(spec: TransformSpec, s_hat, s) -> np.ndarray:
    """Componentwise gradient q(sh_k) p_k(sh) - q(s_k) p_k(s)."""
    s_hat, s = _pair(s_hat, s)
    return mc_link(spec, s_hat) - mc_link(spec, s)


def diagonal_loss(link: LinkSpec, s_hat, s) -> float:
    """Decomposed (diagonal-Hessian) loss: sum of per-dimension scalar losses."""
    s_hat, s = _pair(s_hat, s)
    return float(sum(matching_loss(link, float(a), float(b)) for a, b in zip(s_hat, s)))


def diagonal_grad(link: LinkSpec, s_hat, s) -> np.ndarray:
    """Gradient of the decomposed loss: h(sh_k) - h(s_k) per dimension."""
    s_hat, s = _pair(s_hat, s)
    return np.array([matching_grad(link, float(a), float(b)) for a, b in zip(s_hat, s)])


def mc_hessian(spec: TransformSpec, z) -> np.ndarray:
    """Hessian of the log-partition:
    H_kj = p_k * (kron_kj q'(z_k) + (1/gamma)(kron_kj - p_j) q(z_k) q(z_j))."""
    z = as_score_vector(z)
    p = composite_softmax(spec, z)
    q = scaling_value(spec, z)
    dq = scaling_slope(spec, z)
    a = p * q
    return np.diag(p * dq + p * q * q / spec.gamma) - np.outer(a, a) / spec.gamma


def mc_ce_loss(spec: TransformSpec, s_hat, s) -> tuple[float, np.ndarray]:
    """Cross-entropy baseline under the composite Softmax.

    loss = gamma*logsumexp(Q(sh)/gamma) - sum_k p_k(s) Q(sh_k);
    grad_k = q(sh_k) * [p_k(sh) - p_k(s)].  Not selective unless Q is linear.
    """
    s_hat, s = _pair(s_hat, s)
    p_s = composite_softmax(spec, s)
    Q_hat = log_transform_value(spec, s_hat)
    loss = spec.gamma * float(logsumexp(Q_hat / spec.gamma)) - float(np.dot(p_s, Q_hat))
    grad = scaling_value(spec, s_hat) * (composite_softmax(spec, s_hat) - p_s)
    return loss, grad


@dataclass(frozen=True)
class StandardSoftmaxSpec:
    """Shifted, scaled, gamma-regularized Softmax with per-class bias weights."""

    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 1.0
    rho: tuple | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be a positive finite real")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be a positive finite real")
        if self.rho is not None:
            rho = tuple(float(r) for r in self.rho)
            if any(not (math.isfinite(r) and r > 0) for r in rho):
                raise ValueError("all rho weights must be positive finite reals")
            object.__setattr__(self, "rho", rho)


class StandardSoftmaxResult(NamedTuple):
    p_hat: np.ndarray
    p: np.ndarray
    matching_loss: float
    ce_loss: float
    grad: np.ndarray


def _standard_weights(spec: StandardSoftmaxSpec, z: np.ndarray) -> np.ndarray:
    w = spec.alpha * (z - spec.beta) / spec.gamma
    if spec.rho is not None:
        rho = np.asarray(spec.rho, dtype=float)
        if rho.size != z.size:
            raise DimensionMismatch(
                f"rho has {rho.size} entries for a {z.size}-dimensional score"
            )
        w = w + np.log(rho) / spec.gamma
    return w


def _standard_softmax(spec: StandardSoftmaxSpec, z: np.ndarray) -> np.ndarray:
    w = _standard_weights(spec, z)
    e = np.exp(w - w.max())
    return e / e.sum()


def _standard_partition(spec: StandardSoftmaxSpec, z: np.ndarray) -> float:
    return spec.gamma * float(logsumexp(_standard_weights(spec, z)))


def standard_softmax_suite(spec: StandardSoftmaxSpec, s_hat, s) -> StandardSoftmaxResult:
    """Matching and CE losses for the generalized standard Softmax.

    Both losses share the gradient alpha * (p(sh) - p(s)); with alpha=1,
    beta=0, gamma=1, rho=1 the CE loss reduces to standard cross entropy.
    """
    s_hat, s = _pair(s_hat, s)
    p_hat = _standard_softmax(spec, s_hat)
    p_s = _standard_softmax(spec, s)
    match = (_standard_partition(spec, s_hat) - _standard_partition(spec, s)
             - spec.alpha * float(np.dot(s_hat - s, p_s)))
    ce = _standard_partition(spec, s_hat) - spec.alpha * float(np.dot(s_hat - spec.beta, p_s))
    grad = spec.alpha * (p_hat - p_s)
    return StandardSoftmaxResult(p_hat, p_s, match, ce, grad)


def batch_eval(spec: TransformSpec, s_hat_rows, s_rows) -> tuple[np.ndarray, np.ndarray]:
    """Per-row loss and gradient for matrices of score vectors.

    Each row pair is evaluated with the same code path as the scalar calls,
    so batch output equals the per-row library calls bit for bit.
    """
    s_hat_rows = np.atleast_2d(np.asarray(s_hat_rows, dtype=float))
    s_rows = np.atleast_2d(np.asarray(s_rows, dtype=float))
    if s_hat_rows.shape != s_rows.shape:
        raise DimensionMismatch("prediction and observation tables differ in shape")
    losses = np.empty(s_hat_rows.shape[0])
    grads = np.empty_like(s_hat_rows)
    for i, (sh, s) in enumerate(zip(s_hat_rows, s_rows)):
        losses[i] = mc_matching_loss(spec, sh, s)
        grads[i] = mc_matching_grad(spec, sh, s)
    return losses, grads
