"""Selective matching losses: scalar and multi-class Bregman losses whose
link/scaling functions concentrate sensitivity in designated score regions."""

from .errors import (
    ConfigError,
    DegenerateDomain,
    DimensionMismatch,
    Diverged,
    NonInjectiveLink,
    OutOfRange,
    RootNotBracketed,
    SelmatchError,
)
from .links import (
    LINK_FAMILIES,
    LinkSpec,
    ScoreDomain,
    link_eval,
    link_inverse,
    link_primitive,
    link_slope,
    link_value,
)
from .scalar import (
    BustConfig,
    WeightedScores,
    blust,
    bust,
    bust_simulate,
    ce_loss_sigmoid,
    matching_grad,
    matching_loss,
    proper_prediction,
)
from .transforms import (
    TRANSFORM_FAMILIES,
    CompositeEval,
    TransformSpec,
    amplified_grad,
    amplified_loss,
    ce_loss_composite,
    transform_eval,
)
from .multiclass import (
    StandardSoftmaxSpec,
    batch_eval,
    composite_softmax,
    diagonal_grad,
    diagonal_loss,
    log_partition,
    mc_ce_loss,
    mc_hessian,
    mc_link,
    mc_matching_grad,
    mc_matching_loss,
    standard_softmax_suite,
)
from .validity import (
    INVALID_TRANSFORMS,
    CustomTransform,
    ValidityReport,
    certify,
    check_f_condition,
    check_monotone_q,
    check_pointwise_condition,
    slope_scan,
)
from .curves import CurveTable
from .experiments import (
    SENSITIVITY_BUNDLES,
    StochasticConfig,
    UnderspecConfig,
    emit_curves,
    make_underspec_dataset,
    run_reweighting_demo,
    run_stochastic,
    run_underspec,
)
from .recipes import RECIPES, lookup_design

__version__ = "0.1.0"
