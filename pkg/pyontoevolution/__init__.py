"""pyontoevolution is a Python library to analyse and predict ontology mapping evolution."""

# flake8: noqa
from .backtest import emit_report, run_backtest
from .diff import (
    apply_diff,
    classify_concepts,
    compute_basic_diff,
    compute_diff,
    detect_complex_changes,
    ontology_change_ratio,
)
from .evolution import impact_matrix, impact_ratio, mapping_change_ratio, mapping_diff
from .matcher import build_trigram_index, concept_similarity, match, trigram_similarity
from .ontology import children_of, get_concept, parents_of, parse_ontology
from .pipeline import OntologyEvolutionPipeline
from .prediction import (
    ie_aggregate_irs,
    ie_beta,
    ie_predict,
    make_weights,
    me_predict,
    predict,
)

__version__ = "1.0.0"  # pragma: no cover

__all__ = [
    "OntologyEvolutionPipeline",
    "apply_diff",
    "build_trigram_index",
    "children_of",
    "classify_concepts",
    "compute_basic_diff",
    "compute_diff",
    "concept_similarity",
    "detect_complex_changes",
    "emit_report",
    "get_concept",
    "ie_aggregate_irs",
    "ie_beta",
    "ie_predict",
    "impact_matrix",
    "impact_ratio",
    "make_weights",
    "mapping_change_ratio",
    "mapping_diff",
    "match",
    "me_predict",
    "ontology_change_ratio",
    "parents_of",
    "parse_ontology",
    "predict",
    "run_backtest",
    "trigram_similarity",
]
