"""Entanglement dynamics of two fiber-coupled optomechanical cavities.

Three solver pipelines over a shared Gaussian-state core:

* ``bo_unitary``: closed-form adiabatic evolution of the two mirrors,
  weighted over the cavities' photon statistics;
* ``bo_dissipative``: the same branches with mirror damping, solved through
  the normal-ordered characteristic function, plus decaying photon weights;
* ``langevin``: linearized steady states of the driven, lossy system via a
  Lyapunov solve of the 8x8 covariance.

The ``optomech`` command line wraps all three as CSV-emitting sweeps.
"""

from .bo_dissipative import (
    CharState,
    CharSystem,
    DissipativeParams,
    build_char_system,
    char_rhs,
    covariance_from_char,
    decayed_weights,
    dissipative_negativity,
    integrate_char,
)
from .bo_unitary import (
    BOBranch,
    BOParams,
    BranchWeights,
    MirrorPropagator,
    branch_weights,
    evolve_covariance,
    make_branch,
    negativity_curve,
    propagator,
    weighted_negativity,
)
from .errors import (
    BODomainError,
    ConfigError,
    ConvergenceError,
    IntegrationError,
    OptomechError,
    ParameterError,
    StabilityError,
    UnphysicalCovarianceError,
)
from .gaussian import (
    CovarianceMatrix,
    TwoModeCM,
    extract_pair,
    log_negativity,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_min_pt,
)
from .langevin import (
    BareDrive,
    DriftModel,
    DriveParams,
    EffectiveDrive,
    SteadyState,
    SweepResult,
    build_drift,
    is_stable,
    pair_negativity,
    rotate_to_real,
    solve_lyapunov,
    solve_steady_state,
    sweep,
)
from .numerics import OdeSpec, SolveReport, eigenvalues, integrate, lyapunov_solve

__version__ = "0.1.0"
