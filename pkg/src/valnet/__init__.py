"""Uncertainty propagation in valuation networks by local computation.

The same structural model (variables and relations) can be evaluated under
several calculi: probability, belief functions, Boolean constraints,
possibility, or a user-defined one registered with
:func:`register_calculus`.
"""

from .calculi import (
    BELIEF,
    BOOLEAN,
    POSSIBILITY,
    PROBABILITY,
    Calculus,
    DegenerateValuationError,
    KindMismatchError,
    MarginalReadout,
    MassValuation,
    PointValuation,
    combine,
    default_valuation,
    get_calculus,
    marginalize,
    normalize,
    point_calculus,
    readout,
    register_calculus,
    registry,
)
from .frames import (
    ConfigSet,
    Configuration,
    ModelError,
    Scope,
    ScopeError,
    Variable,
    enumerate_configurations,
    extend_config,
    project_config,
    project_config_set,
)
from .network import (
    Hypergraph,
    MarkovTree,
    ValuationSystem,
    build_hypergraph,
    build_markov_tree,
    validate_tree,
)
from .propagation import (
    PropagationResult,
    assign_potentials,
    evaluate,
    global_evaluate,
    marginal,
    propagate,
)

__version__ = "0.1.0"

__all__ = [
    "BELIEF",
    "BOOLEAN",
    "POSSIBILITY",
    "PROBABILITY",
    "Calculus",
    "DegenerateValuationError",
    "KindMismatchError",
    "MarginalReadout",
    "MassValuation",
    "PointValuation",
    "combine",
    "default_valuation",
    "get_calculus",
    "marginalize",
    "normalize",
    "point_calculus",
    "readout",
    "register_calculus",
    "registry",
    "ConfigSet",
    "Configuration",
    "ModelError",
    "Scope",
    "ScopeError",
    "Variable",
    "enumerate_configurations",
    "extend_config",
    "project_config",
    "project_config_set",
    "Hypergraph",
    "MarkovTree",
    "ValuationSystem",
    "build_hypergraph",
    "build_markov_tree",
    "validate_tree",
    "PropagationResult",
    "assign_potentials",
    "evaluate",
    "global_evaluate",
    "marginal",
    "propagate",
]
