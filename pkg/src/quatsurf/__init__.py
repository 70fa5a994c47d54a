"""Quaternionic calculus for conformal surface grids: curvature data,
harmonicity certificates, Christoffel duals, Backlund/Darboux-type
transforms, and the Painleve III revolution-surface pipeline.
"""

from .analysis import (
    CharacterizationReport,
    ConformalityReport,
    ResidualReport,
    SphereData,
    SurfaceGrid,
    conformality_residual,
    default_curvature_floor,
    ghimc_report,
    ghimc_residual,
    hopf_form,
    hopf_projection_residual,
    inverse_curvature_characterization,
    mean_curvature,
    normals,
    transform_surface,
    willmore_diagnostics,
)
from .errors import (
    AllBranch,
    Blowup,
    Degenerate,
    DomainError,
    GridMismatch,
    MinimalPoint,
    NotClassical,
    NotClosed,
    NotComplexStructure,
    NotConformal,
    NotGHIMC,
    NotImaginary,
    NotRevolution,
    NotUnit,
    ParseError,
    PathInconsistent,
    QuatSurfError,
    SeedConstraintViolated,
    ZeroDenominator,
)
from .grid import (
    GridSpec,
    OneForm,
    ScalarField,
    TwoForm,
    closedness_residual,
    decompose_left,
    decompose_right,
    differential,
    exterior_derivative,
    fd1d,
    hodge_star,
    integrate_potential,
    integrate_potential_two_path,
    interior_max,
    interior_mean,
    wedge,
)
from .quaternion import (
    I,
    J,
    K,
    ONE,
    apply_motion,
    exp_imaginary,
    from_components,
    qabs,
    qconj,
    qim,
    qinv,
    qmul,
    qre,
    quat,
)
from .revolution import (
    EquivariantResult,
    PhiSolution,
    PiiiTransformResult,
    RevolutionProfile,
    equivariant_darboux_revolution,
    inverse_curvature_fit,
    phi_from_surface,
    piii_integrate,
    piii_residual,
    piii_transform,
    profile_from_phi,
    seed_partner,
    surface_from_profile,
)
from .transforms import (
    BackwardResult,
    ChristoffelResult,
    DarbouxData,
    TransformReport,
    backward_baecklund,
    christoffel,
    darboux_from_backward,
    darboux_identities,
    darboux_solve,
    equivariance_check,
)

__version__ = "0.1.0"
