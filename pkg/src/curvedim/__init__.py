"""Numerical certification of curvature-dimension conditions for drift diffusions.

Model spaces with closed-form geometry, exact 1-D optimal transport,
entropy functionals weighted by the work of a drift field, and checkers
for the inequality chains that a curvature-dimension bound implies:
displacement convexity, Jacobi/Riccati comparisons, volume and diameter
comparisons, warped-product certificates, and semigroup contraction
estimates.
"""

from .cdcheck import (
    CdVerdict,
    Instance1D,
    check_cd_entropic,
    check_cd_finite,
    check_cd_inf,
    check_jacobi_ode,
    check_pointwise,
    counterexample_scan,
    make_instance_1d,
)
from .comparison import (
    PackingReport,
    VolumeProfile,
    bishop_gromov_check,
    bonnet_myers_check,
    packing_ratios,
    volume_profile,
)
from .distortion import CurvatureDimension, ExtendedReal, INF, sigma, sin_kn, tau
from .entropy import DiscreteMeasure, ent, renyi, u_n, weighted_renyi
from .errors import (
    ConditionViolated,
    ConjugatePoint,
    CurvedimError,
    DegenerateWarp,
    LeavesChart,
    NegativeDensity,
    NonMapPlan,
    NotAbsolutelyContinuous,
    SizeExceeded,
    UnsupportedSpace,
)
from .fields import (
    BakryEmeryReport,
    FieldSpec,
    bakry_emery_at,
    bakry_emery_intro,
    line_integral,
    lower_bound_scan,
    symmetric_derivative,
    zero_field,
)
from .geometry import (
    GeodesicPath,
    JacobiMatrixPath,
    Kind,
    ModelSpace,
    circle,
    connecting_velocity,
    diameter,
    distance,
    flat_torus2,
    geodesic_shoot,
    interval,
    jacobi_evolve,
    ricci_at,
    sphere2,
)
from .semigroup import (
    FlowState,
    GeneratorMatrix,
    build_generator,
    contraction_check,
    density_state,
    evi_check,
    evolve,
    gradient_estimate_check,
    kuwada_speed_check,
)
from .transport import (
    DensityPath,
    DynamicalPlan,
    KantorovichResult,
    TransportPlan,
    density_measure,
    displacement_path,
    grid_measure_1d,
    hopf_lax,
    kantorovich_potential_1d,
    ot_1d,
    ot_exact,
    wasserstein2_sq,
)
from .warped import (
    SphereExampleBundle,
    WarpedSpec,
    build_warped,
    field_kappa,
    rotation_field,
    sphere_example,
    warped_ricci_check,
)

__version__ = "0.1.0"
