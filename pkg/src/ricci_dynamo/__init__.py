"""Kinematic dynamo growth on Ricci-flowed metrics: geometry, flow, induction and energy."""

__version__ = "0.1.0"

from .errors import (
    FlowSingularity,
    InconsistentFrame,
    InvalidInput,
    NotEinstein,
    NumericalBlowup,
    RicciDynamoError,
    SingularMetric,
)
from .geometry import (
    ConformalLyapunov,
    DiagonalCustom,
    EinsteinScaled,
    EuclideanFlat,
    HyperbolicSpace,
    MetricField,
    RoundSphere,
    christoffel,
    connection,
    einstein_check,
    einstein_fit,
    paper_symmetry_check,
    ricci,
    ricci_tensor,
    volume_element,
)
from .ricci_flow import (
    MetricTrajectory,
    LyapunovSpectrum,
    evolve,
    frozen_eigenvalue_gap,
    lyapunov_metric,
    lyapunov_spectrum,
    ricci_eigenvalues,
)
from .kinematics import (
    FlowDecomposition,
    GridSampled,
    LinearGradient,
    PaperSteady,
    RigidRotation,
    Uniform,
    VelocityField,
    covariant_gradient,
    decompose,
    frame_vorticity,
    planar_shear,
)
from .induction import (
    MagneticMode,
    MagneticState,
    evolve_B,
    fast_dynamo_operator,
    induction_rhs,
    magnetic_mode,
    mode_growth_rate,
)
from .energy import (
    classify,
    energy_rate,
    energy_rate_numeric,
    magnetic_energy,
    marginal_shear,
)
from .numerics import QuadratureSpec
from .scenario import ConfigError, load_scenario, parse_scenario
