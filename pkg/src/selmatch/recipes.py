"""Data-driven design guidance: which link or scaling shape yields each
sensitivity profile, and which intuitive choices fail (with reasons).

Failing multi-class entries carry a machine-readable flag for the cases
where the composite Softmax factor negates the scaling's own sensitivity.
"""

from __future__ import annotations

PROFILES = ("low_norm", "high_norm", "high_score", "low_score")
ARITIES = ("scalar", "multiclass")


def _rec(description, config=None, note=""):
    return {"spec": description, "config": config, "note": note}


def _fail(description, reason, negated_by_softmax=False):
    return {
        "spec": description,
        "reason": reason,
        "negated_by_softmax": negated_by_softmax,
    }


RECIPES = {
    ("scalar", "low_norm"): {
        "recommended": [
            _rec("sigmoid link, unshifted", {"link": {"family": "sigmoid"}}),
            _rec("tanh link, unshifted", {"link": {"family": "tanh"}}),
            _rec("SmeLU-gradient link, unshifted",
                 {"link": {"family": "smelu_grad", "extra": {"c": 1.0}}}),
            _rec("Huber-gradient link, unshifted",
                 {"link": {"family": "huber_grad", "extra": {"threshold": 1.0}}}),
            _rec("sign or step link", {"link": {"family": "sign"}},
                 note="hinge-shaped loss; distinguishes between but not inside regions"),
        ],
        "documented_only": ["sign(z)|z|^d with 0<d<1", "sin on [-pi/2, pi/2]",
                            "arctan", "arcsinh"],
        "failing": [],
    },
    ("scalar", "high_norm"): {
        "recommended": [
            _rec("sinh link, unshifted", {"link": {"family": "sinh"}}),
        ],
        "documented_only": ["sign(z)|z|^d with d>1", "sign(z)log(1+|z|)",
                            "logit on [0,1]", "arcsin / arctanh on (-1,1)",
                            "tan on (-pi/2, pi/2)"],
        "failing": [],
    },
    ("scalar", "high_score"): {
        "recommended": [
            _rec("exponential link", {"link": {"family": "exponential"}}),
            _rec("right-shifted sigmoid link",
                 {"link": {"family": "sigmoid", "beta": 2.0}}),
            _rec("left-shifted sinh link",
                 {"link": {"family": "sinh", "beta": -2.0}}),
        ],
        "documented_only": ["-log(1-z) on [0,1]", "z^d for z>0"],
        "failing": [],
    },
    ("scalar", "low_score"): {
        "recommended": [
            _rec("anti-exponential link", {"link": {"family": "anti_exponential"}}),
            _rec("left-shifted sigmoid link",
                 {"link": {"family": "sigmoid", "beta": -2.0}}),
            _rec("right-shifted sinh link",
                 {"link": {"family": "sinh", "beta": 2.0}}),
        ],
        "documented_only": ["log(z) for z>0"],
        "failing": [],
    },
    ("multiclass", "low_norm"): {
        "recommended": [
            _rec("diagonal (decomposed) loss with sigmoid links",
                 {"link": {"family": "sigmoid"}},
                 note="apply per dimension; composite Softmax cannot give low-norm sensitivity"),
            _rec("diagonal loss with other Sigmoid-shape links (tanh, SmeLU/Huber gradient)",
                 {"link": {"family": "tanh"}}),
        ],
        "documented_only": [],
        "failing": [
            _fail("standard Softmax", "shift invariant; no region sensitivity"),
            _fail("square loss", "uniform sensitivity over the score range"),
            _fail("composite Softmax with any scaling",
                  "the Softmax factor pushes sensitivity toward other regions",
                  negated_by_softmax=True),
        ],
    },
    ("multiclass", "high_norm"): {
        "recommended": [
            _rec("composite Softmax with sinh-shape scaling",
                 {"transform": {"family": "sinh"}}),
            _rec("composite Softmax with cosh scaling, gamma <= 1/sqrt(2)",
                 {"transform": {"family": "cosh", "gamma": 0.7}},
                 note="also gives a monotone increasing probability mapping"),
        ],
        "documented_only": [],
        "failing": [
            _fail("standard Softmax", "shift invariant; no region sensitivity"),
            _fail("square loss", "uniform sensitivity over the score range"),
            _fail("decomposed sinh links",
                  "region sensitivity only; no constellation-shift ranking sensitivity"),
        ],
    },
    ("multiclass", "high_score"): {
        "recommended": [
            _rec("composite Softmax with exponential-shape scaling",
                 {"transform": {"family": "exponential"}}),
            _rec("right-shifted sigmoid scaling",
                 {"transform": {"family": "sigmoid_scaling", "beta": 2.0}}),
            _rec("left-shifted sinh scaling",
                 {"transform": {"family": "sinh", "beta": -2.0}}),
        ],
        "documented_only": [],
        "failing": [
            _fail("standard Softmax", "shift invariant; no region sensitivity"),
            _fail("square loss", "uniform sensitivity over the score range"),
            _fail("decomposed exponential links",
                  "region sensitivity only; no ranking sensitivity"),
            _fail("shifted tanh scaling q(z)=tanh(z-beta) and similar shapes",
                  "the decreasing log-transform segment gives a decreasing "
                  "Softmax that offsets the scaling's high-score emphasis",
                  negated_by_softmax=True),
        ],
    },
    ("multiclass", "low_score"): {
        "recommended": [
            _rec("composite Softmax with anti-exponential-shape scaling",
                 {"transform": {"family": "anti_exponential"}}),
            _rec("right-shifted sinh scaling",
                 {"transform": {"family": "sinh", "beta": 2.0}}),
        ],
        "documented_only": [],
        "failing": [
            _fail("standard Softmax", "shift invariant; no region sensitivity"),
            _fail("square loss", "uniform sensitivity over the score range"),
            _fail("decomposed anti-exponential links",
                  "region sensitivity only; no ranking sensitivity"),
            _fail("left-shifted sigmoid scaling q(z)=sigma(z+beta)",
                  "an increasing Softmax negates the scaling's low-score emphasis",
                  negated_by_softmax=True),
            _fail("left-shifted tanh scaling q(z)=tanh(z+beta) and similar shapes",
                  "an increasing Softmax negates the scaling's low-score emphasis",
                  negated_by_softmax=True),
        ],
    },
}


def lookup_design(arity: str, profile: str) -> dict:
    """Recommended and known-failing specs for a sensitivity profile."""
    if arity not in ARITIES:
        raise KeyError(f"unknown arity '{arity}'")
    if profile not in PROFILES:
        raise KeyError(f"unknown sensitivity profile '{profile}'")
    return RECIPES[(arity, profile)]
