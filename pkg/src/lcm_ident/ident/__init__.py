from .classify import (
    EVIDENCE_KINDS,
    Evidence,
    IdentClass,
    IdentConfig,
    ModelAnalyzer,
    RegistryEntry,
    Verdict,
    classify_model,
    classify_parameter,
)
from .fiber import FiberReport, fiber_sample, sample_base_point
from .rank import (
    RankAnalysis,
    cached_coefficient_map,
    jacobian,
    model_identifiability,
    parameter_local_identifiability,
    rank_analysis,
)
from .symmetry import SymmetryWitness, image_parameter, permute_point, symmetry_sling_witness

__all__ = [
    "EVIDENCE_KINDS", "Evidence", "IdentClass", "IdentConfig", "ModelAnalyzer", "RegistryEntry",
    "Verdict", "classify_model", "classify_parameter", "FiberReport", "fiber_sample",
    "sample_base_point", "RankAnalysis", "cached_coefficient_map", "jacobian",
    "model_identifiability", "parameter_local_identifiability", "rank_analysis",
    "SymmetryWitness", "image_parameter", "permute_point", "symmetry_sling_witness",
]
