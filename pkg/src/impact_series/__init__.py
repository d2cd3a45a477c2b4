"""Exact and simulated detection statistics for the two-photon impact-series
experiment, comparing full three-path superposition (QM) with the pairwise
multisimultaneous causal model (MC)."""

__version__ = "0.1.0"

from .core_model import (  # noqa: E402
    OUTCOMES,
    ArmLengths,
    ClassTag,
    OutcomePair,
    PathPair,
    PhaseSettings,
    ProbabilityTable,
    classify_subensemble,
    enumerate_path_pairs,
    path_length,
)
from .probability import (  # noqa: E402
    MC_SPEC,
    QM_SPEC,
    CausalModelSpec,
    SpecialSettings,
    correlation_E,
    marginal_side1,
    marginal_side2,
    mc_joint,
    model_joint,
    qm_joint,
    singles_visibility,
    special_settings,
)

__all__ = [
    "__version__",
    "OUTCOMES",
    "ArmLengths",
    "ClassTag",
    "OutcomePair",
    "PathPair",
    "PhaseSettings",
    "ProbabilityTable",
    "classify_subensemble",
    "enumerate_path_pairs",
    "path_length",
    "MC_SPEC",
    "QM_SPEC",
    "CausalModelSpec",
    "SpecialSettings",
    "correlation_E",
    "marginal_side1",
    "marginal_side2",
    "mc_joint",
    "model_joint",
    "qm_joint",
    "singles_visibility",
    "special_settings",
]
