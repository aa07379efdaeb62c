"""Exact battery discharge model for the joint linear complexity of multisequences."""

from .core import (
    Action,
    BdmState,
    IVector,
    canonical_path,
    class_delta,
    class_of,
    feasible_actions,
    generation,
    i_vector,
    initial_state,
    mirror_state,
    witness_state,
)
from .errors import (
    BdmError,
    BudgetExceededError,
    IncompletePredecessorsError,
    InvalidStateError,
    NotPrimeError,
    ParameterError,
    ParseError,
    UnreachableStateError,
)
from .field_oracle import FieldSpec, Multisequence, Profile, exhaustive_histogram, joint_lc, profile, solve_recurrence
from .gamma import GammaQuery, epsilon, gamma_closed, gamma_enumerated, mean_deviation, theta_lower_check
from .mass import MassDistribution, StateCensus, balance_residual, enumerate_states, run_to_column, stationary_mass, step
from .partitions import PartitionTable, partition_asymptotic, partition_count, partition_gf, partition_gf_truncated
from .simulation import SimulationStats, simulate
from .verify import VerificationReport

__version__ = "0.1.0"
