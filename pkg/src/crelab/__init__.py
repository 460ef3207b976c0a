"""Simulation and testing toolkit for the common ratio effect under stochastic choice."""

from .core import (
    CommonRatioProblem,
    CRRAUtility,
    IdentityWeighting,
    Lottery,
    PowerUtility,
    PrelecWeighting,
    TKWeighting,
    TwoPointUtility,
    expected_utility,
    make_problem,
    utility_invert,
    weight_eval,
)
from .exceptions import ConfigError, ConstructionError, CrelabError, DataError, DomainError, ModelError, UsageError
from .rng import RngStream, rng_derive
from .testkit import (
    FrequencyPair,
    ValuationSampleSet,
    Verdict,
    ci_strong_consistency,
    mean_test,
    mnoss_region_test,
    sign_test,
    strong_test,
    weak_test,
)

__version__ = "0.1.0"

__all__ = [
    "CommonRatioProblem",
    "CRRAUtility",
    "IdentityWeighting",
    "Lottery",
    "PowerUtility",
    "PrelecWeighting",
    "TKWeighting",
    "TwoPointUtility",
    "expected_utility",
    "make_problem",
    "utility_invert",
    "weight_eval",
    "ConfigError",
    "ConstructionError",
    "CrelabError",
    "DataError",
    "DomainError",
    "ModelError",
    "UsageError",
    "RngStream",
    "rng_derive",
    "FrequencyPair",
    "ValuationSampleSet",
    "Verdict",
    "ci_strong_consistency",
    "mean_test",
    "mnoss_region_test",
    "sign_test",
    "strong_test",
    "weak_test",
]
