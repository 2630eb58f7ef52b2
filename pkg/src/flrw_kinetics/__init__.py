"""Spatially homogeneous relativistic kinetic matter on a flat FLRW background.

The package couples a Boltzmann gas of massive particles to the scale factor,
a homogeneous Maxwell field and a massive scalar field, all driven by a
cosmological constant.  See README.md for the evolved system and the layout.
"""

from .phase_space import (
    GridFunction,
    MomentumGrid,
    SobolevParams,
    gaussian_profile,
    load_grid_function,
    make_grid,
    moment_energy,
    moment_number,
    moment_pressure,
    charge_density,
    save_grid_function,
    sobolev_norm,
    u_zero,
)
from .collision import (
    CollisionConfig,
    DegenerateDenominatorError,
    Kernel,
    SphereQuadrature,
    btilde,
    collision_term,
    elementary_energy,
    gain_and_loss,
    jacobian_residual,
    kernel_by_name,
    post_collision,
    q_gain,
    q_loss,
    sphere_quadrature,
)
from .cosmo import (
    EPS_E,
    EPS_PSI,
    BoundCheck,
    BoundReport,
    ConstraintUnsolvableError,
    CosmoState,
    Moments,
    PhysParams,
    PsiDegenerateError,
    apriori_check,
    compute_moments,
    conserved_em_flux,
    cosmo_rhs,
    hamiltonian_residual,
    solve_constraint_for_U,
)
from .transport import (
    AdvectionState,
    advection_speed,
    shift_interpolate,
    transport_step,
)
from .solver import (
    STATUS_COMPLETED,
    STATUS_HORIZON,
    ContractionReport,
    DecayResult,
    InequalityReport,
    InvalidInitialDataError,
    MisalignedTrajectoriesError,
    NoContractionError,
    SolveConfig,
    Trajectory,
    cauchy_norm,
    decay_check,
    direct_solve,
    energy_estimate_check,
    picard_solve,
    save_trajectory,
)

__version__ = "0.1.0"
