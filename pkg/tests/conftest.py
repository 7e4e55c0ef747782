"""Shared spec catalogs and numerical helpers for the test suite."""

import numpy as np
import pytest

from selmatch.links import LinkSpec, link_breakpoints
from selmatch.transforms import TransformSpec, transform_breakpoints

# One canonical and one shifted/scaled instance per link family.
STAIR_EXTRA = {"breakpoints": [-2.0, 0.5, 2.0], "levels": [0.0, 0.5, 0.75, 2.0]}

LINK_SPECS = {
    "sigmoid": LinkSpec("sigmoid"),
    "identity": LinkSpec("identity"),
    "exponential": LinkSpec("exponential"),
    "anti_exponential": LinkSpec("anti_exponential"),
    "sinh": LinkSpec("sinh"),
    "tanh": LinkSpec("tanh"),
    "step": LinkSpec("step"),
    "sign": LinkSpec("sign"),
    "smelu_grad": LinkSpec("smelu_grad", extra={"c": 1.0}),
    "huber_grad": LinkSpec("huber_grad", extra={"threshold": 1.0}),
    "staircase": LinkSpec("staircase", extra=STAIR_EXTRA),
}

LINK_SPECS_SHIFTED = {
    "sigmoid": LinkSpec("sigmoid", alpha=1.7, beta=0.6),
    "identity": LinkSpec("identity", alpha=2.0, beta=1.0),
    "exponential": LinkSpec("exponential", alpha=1.3, beta=-0.4),
    "anti_exponential": LinkSpec("anti_exponential", alpha=1.3, beta=0.4),
    "sinh": LinkSpec("sinh", alpha=0.8, beta=0.3),
    "tanh": LinkSpec("tanh", alpha=1.7, beta=0.6),
    "step": LinkSpec("step", alpha=1.0, beta=0.5),
    "sign": LinkSpec("sign", alpha=1.0, beta=-0.5),
    "smelu_grad": LinkSpec("smelu_grad", alpha=1.4, beta=0.2, extra={"c": 1.2}),
    "huber_grad": LinkSpec("huber_grad", alpha=1.4, beta=-0.2, extra={"threshold": 0.8}),
    "staircase": LinkSpec("staircase", alpha=1.2, beta=0.1, extra=STAIR_EXTRA),
}

# Links with strictly increasing h (no flat segments): positivity and
# inverse round-trip properties apply to these.
STRICT_LINKS = {k: v for k, v in LINK_SPECS.items()
                if k in ("sigmoid", "identity", "exponential", "anti_exponential",
                         "sinh", "tanh")}

TRANSFORM_SPECS = {
    "linear": TransformSpec("linear"),
    "convex_quadratic": TransformSpec("convex_quadratic"),
    "exponential": TransformSpec("exponential"),
    "anti_exponential": TransformSpec("anti_exponential"),
    "sinh": TransformSpec("sinh"),
    "cosh": TransformSpec("cosh", gamma=0.7),
    "sigmoid_scaling": TransformSpec("sigmoid_scaling"),
    "tanh_scaling": TransformSpec("tanh_scaling"),
    "relu": TransformSpec("relu"),
    "smelu": TransformSpec("smelu", extra={"c": 1.0}),
    "shifted_power": TransformSpec("shifted_power", extra={"degree": 2.0, "shift": 2.0}),
}

TRANSFORM_SPECS_SHIFTED = {
    "linear": TransformSpec("linear", alpha=1.6, beta=0.3),
    "convex_quadratic": TransformSpec("convex_quadratic", alpha=0.9, beta=-0.2),
    "exponential": TransformSpec("exponential", alpha=1.2, beta=0.5),
    "anti_exponential": TransformSpec("anti_exponential", alpha=1.2, beta=-0.5),
    "sinh": TransformSpec("sinh", alpha=0.8, beta=0.4),
    "cosh": TransformSpec("cosh", alpha=0.9, beta=0.2, gamma=0.6),
    "sigmoid_scaling": TransformSpec("sigmoid_scaling", alpha=1.5, beta=0.7),
    "tanh_scaling": TransformSpec("tanh_scaling", alpha=1.1, beta=-0.3),
    "relu": TransformSpec("relu", alpha=1.3, beta=0.2),
    "smelu": TransformSpec("smelu", alpha=1.2, beta=-0.1, extra={"c": 0.8}),
    "shifted_power": TransformSpec("shifted_power", alpha=0.9, beta=0.3, gamma=0.8,
                                   extra={"degree": 2.0, "shift": 2.0}),
}

# Monotone-scaling (theorem-certified) transforms at their canonical
# parameters; loss convexity and Hessian PSD-ness are guaranteed for these.
THEOREM_CERTIFIED_TRANSFORMS = {
    k: v for k, v in TRANSFORM_SPECS.items()
    if k not in ("cosh", "shifted_power")
}

# Certified by the pointwise corollary condition on [-5, 5] (includes the
# non-monotone scalings with suitable parameters).
POINTWISE_CERTIFIED_TRANSFORMS = dict(TRANSFORM_SPECS)

# Transforms whose composite link is strictly increasing on [-5, 5]
# (positivity of the amplified loss applies to these).
STRICT_TRANSFORMS = {k: v for k, v in TRANSFORM_SPECS.items()
                     if k not in ("relu", "smelu")}


def away_from_breakpoints(rng, spec, n, lo=-5.0, hi=5.0, margin=2e-3):
    """Sample n points in [lo, hi] at least margin away from the spec's
    piecewise breakpoints."""
    if isinstance(spec, LinkSpec):
        breaks = link_breakpoints(spec)
    else:
        breaks = transform_breakpoints(spec)
    out = []
    while len(out) < n:
        z = rng.uniform(lo, hi, size=n)
        ok = np.ones(len(z), dtype=bool)
        for b in breaks:
            ok &= np.abs(z - b) > margin
        out.extend(z[ok].tolist())
    return np.array(out[:n])


def central_diff(f, x, eps):
    return (f(x + eps) - f(x - eps)) / (2.0 * eps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
