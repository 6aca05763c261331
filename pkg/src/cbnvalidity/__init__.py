"""Interventional validity of causal Bayesian networks.

Exact finite (rational) and linear Gaussian engines for checking whether a
CBN is a valid model of a data-generating process under a chosen reading of
which intervention each action performs.
"""

from .abstraction import (
    FiniteScm,
    HardIntervention,
    abstraction_validity_experiment,
    hard_to_intervention,
    is_tau_abstraction,
    omega_tau,
    scm_solve,
    scm_to_cbn,
    verify_exogenous_map,
)
from .cbn import (
    Cbn,
    Dag,
    Intervention,
    InterventionClass,
    classify_intervention,
    complete_cbn_from_dist,
    interventional_dist,
    is_compatible,
    is_markov,
    observational_dist,
)
from .dgp import (
    OBSERVATIONAL,
    AffineExpectation,
    Dgp,
    Emulation,
    ExpectedCost,
    ReverseEntropy,
    action_laws,
    build_dgp_from_cbn,
    emulate,
)
from .distributions import (
    DEFAULT_TOL,
    FiniteDist,
    GaussianDist,
    Tolerances,
    ci_test,
    conditional_cross_covariance,
    entropy,
    equal,
    expectation,
    marginal,
    mean_vector,
    pushforward,
)
from .errors import (
    AmbiguousInterventionError,
    CausalValidityError,
    FamilyMismatchError,
    NotAnInterventionError,
    PreconditionError,
    ScenarioError,
    SearchBoundError,
    ShapeMismatchError,
    UnsupportedOperationError,
    VariableMismatchError,
)
from .interpretations import (
    IntC,
    IntK,
    IntM,
    IntP,
    IntS,
    IntSTilde,
    IntTildeIF,
    check_desideratum,
    interpret,
)
from .kernels import FiniteKernel, LinearGaussianKernel, conditional, describe_kernel, kernel_compatible
from .maps import AffineMap, IdentityMap, TableMap, compose
from .scenario_format import Scenario, load_scenario, parse_scenario
from .scenarios import builtin_scenarios, run_scenario
from .validity import (
    FALSIFIED,
    VALID,
    check_pheno_validity,
    check_validity,
    construct_intM_falsifier,
    construct_intP_falsifier,
    construct_intS_falsifier,
    find_falsifier,
)

__version__ = "0.1.0"
