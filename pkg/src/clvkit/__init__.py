"""Tangent-space vector fields along transient orbits.

Forward QR sweep plus backward triangular pullback along an orbit that
settles onto an equilibrium; the composed unit vectors converge to the
eigenvectors of the linearization and can steer perturbed orbits along
chosen eigendirections.
"""

from .errors import (
    ArgumentError,
    CheckpointError,
    ClvKitError,
    ConfigError,
    DegenerateCoefficientError,
    DegenerateFrameError,
    NotConvergedError,
    NotFoundError,
    NumericError,
    RadiusNotReachedError,
    SingularSolveError,
)
from .experiments import (
    AlignmentReport,
    PerturbationSpec,
    RunConfig,
    TransientRun,
    alignment_report,
    direction_test,
    find_orbit_point,
    first_radius_crossing,
    perturb_and_evolve,
    run_transient_clv,
)
from .ginelli import (
    BackwardRecord,
    ExponentEstimate,
    ForwardRecord,
    VectorField,
    backward_pass,
    canonicalize_signs,
    compose_vectors,
    forward_pass,
    lyapunov_exponents,
    replay_residual,
    seed_coefficients,
)
from .integrate import Trajectory, integrate_orbit, rk4_step, rk4_tangent_step
from .linalg import (
    identity_frame,
    is_orthogonal,
    is_upper_triangular,
    normalize_columns,
    qr_positive,
    random_orthogonal,
    solve_upper,
)
from .systems import (
    SystemDef,
    builtin_systems,
    eval_field,
    eval_jacobian,
    fd_jacobian,
    make_system,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport",
    "ArgumentError",
    "BackwardRecord",
    "CheckpointError",
    "ClvKitError",
    "ConfigError",
    "DegenerateCoefficientError",
    "DegenerateFrameError",
    "ExponentEstimate",
    "ForwardRecord",
    "NotConvergedError",
    "NotFoundError",
    "NumericError",
    "PerturbationSpec",
    "RadiusNotReachedError",
    "RunConfig",
    "SingularSolveError",
    "SystemDef",
    "Trajectory",
    "TransientRun",
    "VectorField",
    "alignment_report",
    "backward_pass",
    "builtin_systems",
    "canonicalize_signs",
    "compose_vectors",
    "direction_test",
    "eval_field",
    "eval_jacobian",
    "fd_jacobian",
    "find_orbit_point",
    "first_radius_crossing",
    "forward_pass",
    "identity_frame",
    "integrate_orbit",
    "is_orthogonal",
    "is_upper_triangular",
    "lyapunov_exponents",
    "make_system",
    "normalize_columns",
    "perturb_and_evolve",
    "qr_positive",
    "random_orthogonal",
    "replay_residual",
    "rk4_step",
    "rk4_tangent_step",
    "run_transient_clv",
    "seed_coefficients",
    "solve_upper",
]
