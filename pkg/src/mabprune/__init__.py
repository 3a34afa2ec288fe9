"""Branch-and-bound planning for information gathering with bandit-relaxation bounds."""
from ._jit import BACKEND
from .belief import (
    FactoredBelief,
    IDENTITY_CHAIN,
    MarkovChainParams,
    ZeroProbabilityObservation,
    bayes_update,
    observation_prior,
    predict,
    predict_marginal,
    tau,
)
from .bounds import (
    BoundPair,
    greedy_action,
    greedy_value_constrained,
    relaxed_greedy_value,
    upper_bound,
)
from .infotheory import binary_entropy, mutual_information, mutual_information_bruteforce
from .model import (
    InstanceSampler,
    InvalidAction,
    MonitoringModel,
    actions,
    internal_transition,
    observation_likelihood,
    sample_case1,
    sample_case2,
)
from .search import SearchResult, SearchStats, exhaustive, q_value, rtbss

__version__ = "0.1.0"
