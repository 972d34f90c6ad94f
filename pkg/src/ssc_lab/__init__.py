"""Certified computations with ssc functions on sequence spaces.

Points of ``l_p`` are finite explicit prefixes plus a closed-form tail;
every real-valued answer is an ``Interval`` that contains the true value.
"""

from .errors import (
    DegenerateDenominator,
    NoConvergence,
    PreconditionError,
    SSCLabError,
    Unrepresentable,
    WidthExceeded,
)
from .interval import Interval
from .outcome import CheckReport, RadiusRecord, Verdict
from .seqpoint import (
    ZERO,
    ZERO_POINT,
    Geometric,
    Masked,
    PowerLaw,
    Projected,
    SeqPoint,
    SigmaOrder,
    Tail,
    Zero,
    basis,
    coord,
    dist_p,
    dist_trunc,
    dumps_point,
    l1_sum,
    loads_point,
    make_point,
    overwrite,
    p_norm,
    point_from_json,
    point_to_json,
    project,
    set_coord,
    set_coords,
    sigma_order,
    zero_point,
)
from .borel import (
    DYADIC,
    ClassIndex,
    PartitionScheme,
    SetOracle,
    baire2_indicator_A1,
    baire2_iterated_limit,
    class_is_s_open_check,
    class_membership,
    closed_ball,
    contracting_image,
    coordinate_zero_set,
    fixed_point,
    successor_image,
)
from .sscfun import (
    Ball,
    FuncExpr,
    WholeSpace,
    chi_class,
    const,
    evaluate,
    example41_fn,
    example_x,
    example_y,
    func_from_json,
    func_to_json,
    prescribed_discontinuity_fn,
    product_bump_fn,
    uniform_series,
    geometric_series,
)
from .verify import (
    ApproachSchedule,
    Infeasible,
    NearlyOpenBox,
    NormP,
    Pointwise,
    continuity_check,
    determining_demo,
    discontinuity_witness,
    lipschitz_ratio,
    ssc_check,
    ssc_modulus,
    superdensity_falsify,
)

__version__ = "0.1.0"
