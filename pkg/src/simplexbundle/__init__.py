"""Information geometry of the closed probability simplex.

Fisher scores that survive boundary contact, the statistical bundle with
exponential and mixture transports, exponential geodesics, natural-gradient
flows, and exact derivation of score relations for binomial models.
"""

from .curves import (
    ParamCurve,
    ScoreResult,
    curve_from_table,
    fisher_information,
    gradient_orthogonality,
    score,
    sqrt_embedding,
    velocity,
)
from .errors import *  # noqa: F401,F403
from .natgrad import (
    FlowTrajectory,
    Functional,
    cramer_rao_gap,
    directional_derivative_check,
    entropy,
    entropy_functional,
    entropy_gradient,
    entropy_production,
    expectation_functional,
    natural_gradient,
    natural_gradient_flow,
)
from .poly import (
    Indeterminate,
    LinearScoreForm,
    Polynomial,
    binomial_score_relation,
    derive,
    face_factors,
    face_product,
    model_tangent_system,
    parse_polynomial,
    relation_residual,
)
from .simplex import (
    BundleElement,
    ContrastVector,
    ProbabilityVector,
    SampleSpace,
    SupportIndicator,
    center,
    contrast_basis,
    distribution_from_json,
    inner_product,
    make_distribution,
    tangent_membership,
)
from .transport import (
    ExpGeodesic,
    cumulant,
    cumulant_flow_derivative,
    displacement,
    duality_gap,
    e_transport,
    exp_geodesic_point,
    geodesic_ode_residual,
    kl,
    m_transport,
)
from .zoo import (
    GibbsSpec,
    MixtureSpec,
    entropy_curve,
    get_curve,
    gibbs_cumulant_derivative,
    gibbs_curve,
    independence_curve,
    line_model,
    marginal_homogeneity_curve,
    mixture_curve,
)

__version__ = "0.1.0"
