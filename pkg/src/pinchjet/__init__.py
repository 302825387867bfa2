"""Curvature, pinching relations and normal-form retraction for 2-jets of Riemannian metrics."""

from .curvature import (
    Plane,
    RelationSpec,
    SearchConfig,
    SecExtremes,
    christoffel,
    curvature_operator_bounds,
    relation_check,
    riemann,
    riemann_normalized,
    sec_extremes,
    sectional,
)
from .diffeo import (
    DiffeoJet3,
    compose,
    identity_jet,
    invert,
    make_diffeo_jet,
    pullback_metric_jet,
    push_forward_metric_jet,
    random_diffeo_jet,
)
from .jets import (
    FiberVector,
    MetricJet2,
    euclidean_jet,
    flatten,
    interpolate_jets,
    taylor_eval,
    unflatten,
    validate_jet,
)
from .models import conformal_jet, perturbed_jet, random_fa_sample
from .normal_coords import exp_jet3, geodesic_integrate, gram_schmidt, normalization_operator, normalize
from .retraction import RetractionTrace, retract, retract_check_fa

__version__ = "0.1.0"
