"""certikit: robust certificates for classifier predictions.

A certificate for a prediction (x, y) is a small subset of the training data
on which every hypothesis making at most b mistakes must still predict y at
x.  This package extracts such certificates, validates them, measures their
size against the combinatorial optimum, and runs the sample-complexity and
reweighting experiments that characterize when they exist.
"""

from .adversary import corrupt_random, corrupt_worst_case
from .certify import (
    caratheodory_certificate,
    chunk_lower_instance,
    chunked_certificate,
    minimal_certificate,
    minimum_certificate,
)
from .conic import (
    ConicInstance,
    ConicSolution,
    caratheodory_reduce,
    conic_membership,
    halfspace_consistency_lp,
)
from .domain import (
    Certificate,
    Dataset,
    LabeledExample,
    Point,
    WeightedExample,
    dataset,
    dpoint,
    flip,
    load_dataset,
    save_dataset,
    subsequence,
    vpoint,
    weighted_view,
)
from .errors import (
    CapacityError,
    CertikitError,
    InputError,
    InsufficientSampleError,
    NotCertifiableError,
    NumericalFailureError,
    UnboundableError,
)
from .hypoclasses import (
    FiniteFamily,
    HalfspaceFamily,
    HypothesisFamily,
    TargetHypothesis,
    finite_family_from_csv,
    label_dataset,
    predict,
    singletons,
    tightness_family,
)
from .oracles import (
    in_robust_agreement,
    is_certificate,
    is_minimal_certificate,
    is_robustly_realizable,
    weighted_error,
)
from .sampling import (
    BallIndicator,
    ConstantWeight,
    CurvePoint,
    Distribution,
    FiniteSupport,
    ReweightedResult,
    TableWeight,
    UniformBall,
    agreement_probability_curve,
    certificate_coefficient,
    certificate_coefficient_mc,
    missing_coupons_probability,
    reweighted_certificate,
    reweighted_distribution,
    rejection_sample,
    rejection_sample_many,
    sample_size_bound,
    tightness_experiments,
    trial_rng,
    uniform_support,
)
from .stars import (
    HollowStar,
    hardest_instance,
    largest_minimal_certificate,
    lift_star,
    robust_star_number,
    verify_star,
)

__version__ = "0.1.0"
