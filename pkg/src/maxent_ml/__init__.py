"""Maximum entropy and maximum likelihood for linear inverse problems on the simplex."""

__version__ = "0.1.0"

from .core import (
    ConstraintSystem,
    DualSolution,
    Pmf,
    Potential,
    Sample,
    coherence,
    dist,
    entropy_of_potential,
    log_likelihood,
    log_partition,
    mean_value,
    scale,
    shannon_entropy,
    shift,
)
from .errors import (
    DegeneratePotential,
    DimensionMismatch,
    EnumerationTooLarge,
    InfeasibleTarget,
    InvalidInput,
    InvalidRange,
    MaxEntError,
    MaxIterExceeded,
    NoCoherentType,
    NoFeasiblePoint,
    SupportMismatch,
)
from .maxprob import TypeClass, enumerate_types, most_probable_coherent_type
from .oracle import SimplexGrid, grid_maxent, grid_ml
from .solver import (
    SolverConfig,
    orthogonality_check,
    solve_inverse,
    solve_maxent_coherent,
    solve_ml_scalar,
)
