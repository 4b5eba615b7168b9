"""Models for pyontoevolution library."""

from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
import json
import logging
from typing import Any

from dataclasses_json import dataclass_json
import networkx as nx

from pyontoevolution.const import (
    DEFAULT_H_RANGE,
    DEFAULT_MAX_DELTA,
    DEFAULT_TARGET_COUNT,
    DEFAULT_THRESHOLD,
    HIERARCHY_KINDS,
    IMPACT_CELL_KEYS,
    REL_IS_A,
    WEIGHT_SUM_TOLERANCE,
)
from pyontoevolution.exceptions import (
    PyOntoEvolutionConfigError,
    PyOntoEvolutionDanglingRelationshipError,
    PyOntoEvolutionUnknownAccessionError,
    PyOntoEvolutionValidationError,
)

_LOGGER = logging.getLogger(__name__)


def _sorted_unique(values: list[str]) -> list[str]:
    return sorted(set(values))


def canonical_json(data: Any) -> str:
    """Dump data with stable key order."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ChangeCategory(StrEnum):
    """Information category of a change operation."""

    EXTENSION = "extension"
    REDUCTION = "reduction"
    REVISION = "revision"


class ChangeKind(StrEnum):
    """Ontology change operations."""

    ADD_CONCEPT = "add_concept"
    DEL_CONCEPT = "del_concept"
    ADD_SUBGRAPH = "add_subgraph"
    DEL_SUBGRAPH = "del_subgraph"
    ADD_RELATIONSHIP = "add_relationship"
    DEL_RELATIONSHIP = "del_relationship"
    ADD_ATTRIBUTE = "add_attribute"
    DEL_ATTRIBUTE = "del_attribute"
    CHANGE_ATTRIBUTE_VALUE = "change_attribute_value"
    MARK_OBSOLETE = "mark_obsolete"
    MARK_NON_OBSOLETE = "mark_non_obsolete"
    SPLIT = "split"
    MERGE = "merge"
    SUBSTITUTE = "substitute"
    MOVE = "move"

    @property
    def category(self) -> ChangeCategory:
        """Return the information category of this operation."""
        return CHANGE_CATEGORIES[self]


CHANGE_CATEGORIES: dict[ChangeKind, ChangeCategory] = {
    ChangeKind.ADD_CONCEPT: ChangeCategory.EXTENSION,
    ChangeKind.ADD_SUBGRAPH: ChangeCategory.EXTENSION,
    ChangeKind.ADD_RELATIONSHIP: ChangeCategory.EXTENSION,
    ChangeKind.ADD_ATTRIBUTE: ChangeCategory.EXTENSION,
    ChangeKind.MARK_NON_OBSOLETE: ChangeCategory.EXTENSION,
    ChangeKind.DEL_CONCEPT: ChangeCategory.REDUCTION,
    ChangeKind.DEL_SUBGRAPH: ChangeCategory.REDUCTION,
    ChangeKind.DEL_RELATIONSHIP: ChangeCategory.REDUCTION,
    ChangeKind.DEL_ATTRIBUTE: ChangeCategory.REDUCTION,
    ChangeKind.MARK_OBSOLETE: ChangeCategory.REDUCTION,
    ChangeKind.SPLIT: ChangeCategory.REVISION,
    ChangeKind.MERGE: ChangeCategory.REVISION,
    ChangeKind.SUBSTITUTE: ChangeCategory.REVISION,
    ChangeKind.MOVE: ChangeCategory.REVISION,
    ChangeKind.CHANGE_ATTRIBUTE_VALUE: ChangeCategory.REVISION,
}


class ConceptSide(StrEnum):
    """Version side a changed concept belongs to."""

    OLD = "old"
    NEW = "new"
    BOTH = "both"


class MatchStrategy(StrEnum):
    """Trigram match strategies."""

    NAME = "name"
    NAMESYN = "namesyn"
    CONTEXT = "context"


class WeightKind(StrEnum):
    """Weighting functions over historical transitions."""

    AVG = "avg"
    QUADRATIC = "w2"


class EstimationMethod(StrEnum):
    """Mapping-based or impact-based estimation."""

    ME = "ME"
    IE = "IE"


class PredictionMethod(StrEnum):
    """Estimation method combined with its weighting."""

    ME_AVG = "ME-avg"
    ME_W2 = "ME-w2"
    IE_AVG = "IE-avg"
    IE_W2 = "IE-w2"

    @property
    def estimation(self) -> EstimationMethod:
        """Return the estimation method."""
        return EstimationMethod(self.value.split("-", 1)[0])

    @property
    def weight_kind(self) -> WeightKind:
        """Return the weighting function."""
        return WeightKind(self.value.split("-", 1)[1])


DEFAULT_METHODS: list[PredictionMethod] = [
    PredictionMethod.ME_AVG,
    PredictionMethod.ME_W2,
    PredictionMethod.IE_W2,
]


@dataclass_json
@dataclass(frozen=True)
class Concept:
    """Object holding one ontology concept."""

    accession: str
    name: str
    synonyms: list[str] = field(default_factory=list)
    definition: str | None = None
    obsolete: bool = False
    # Kept as metadata for complex change detection
    replaced_by: list[str] = field(default_factory=list)
    consider: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Keep multi-valued attributes sorted and unique."""
        object.__setattr__(self, "synonyms", _sorted_unique(self.synonyms))
        object.__setattr__(self, "replaced_by", _sorted_unique(self.replaced_by))
        object.__setattr__(self, "consider", _sorted_unique(self.consider))

    @property
    def labels(self) -> list[str]:
        """Return name and synonyms."""
        return [self.name, *self.synonyms]


@dataclass_json
@dataclass(frozen=True, order=True)
class Relationship:
    """Object holding a typed directed relationship."""

    source: str
    target: str
    kind: str = REL_IS_A

    @property
    def hierarchical(self) -> bool:
        """Return if the relationship defines parent and child."""
        return self.kind in HIERARCHY_KINDS


@dataclass_json
@dataclass(frozen=True)
class OntologyVersion:
    """Object holding an ontology snapshot released at one point in time."""

    ontology_id: str
    version: int = 1
    release_date: str | None = None
    concepts: dict[str, Concept] = field(default_factory=dict)
    relationships: list[Relationship] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Keep relationships sorted and unique."""
        object.__setattr__(self, "relationships", sorted(set(self.relationships)))

    @cached_property
    def _parents(self) -> dict[str, list[str]]:
        parents: dict[str, set[str]] = {}
        for rel in self.relationships:
            if rel.hierarchical:
                parents.setdefault(rel.source, set()).add(rel.target)
        return {key: sorted(value) for key, value in parents.items()}

    @cached_property
    def _children(self) -> dict[str, list[str]]:
        children: dict[str, set[str]] = {}
        for rel in self.relationships:
            if rel.hierarchical:
                children.setdefault(rel.target, set()).add(rel.source)
        return {key: sorted(value) for key, value in children.items()}

    @cached_property
    def accessions(self) -> frozenset[str]:
        """Return all concept accessions."""
        return frozenset(self.concepts)

    def get_concept(self, accession: str) -> Concept | None:
        """Return concept or None for an unknown accession."""
        return self.concepts.get(accession)

    def _require(self, accession: str) -> None:
        if accession not in self.concepts:
            msg = f"Unknown accession {accession} in {self.ontology_id} v{self.version}"
            raise PyOntoEvolutionUnknownAccessionError(msg)

    def parents_of(self, accession: str) -> list[str]:
        """Return is_a/part_of parents sorted by accession."""
        self._require(accession)
        return list(self._parents.get(accession, []))

    def children_of(self, accession: str) -> list[str]:
        """Return is_a/part_of children sorted by accession."""
        self._require(accession)
        return list(self._children.get(accession, []))

    def outgoing(self, accession: str) -> list[Relationship]:
        """Return relationships starting at accession."""
        return [rel for rel in self.relationships if rel.source == accession]

    def validate(self) -> None:
        """Check concept and relationship invariants."""
        for accession, concept in self.concepts.items():
            if not accession or accession != concept.accession:
                msg = f"Concept keyed {accession!r} has accession {concept.accession!r}"
                raise PyOntoEvolutionValidationError(msg)
            if not concept.obsolete and not concept.name.strip():
                msg = f"Concept {accession} has an empty name"
                raise PyOntoEvolutionValidationError(msg)

        for rel in self.relationships:
            if rel.source == rel.target:
                msg = f"Self-loop {rel.kind} on {rel.source}"
                raise PyOntoEvolutionValidationError(msg)
            if rel.source not in self.concepts or rel.target not in self.concepts:
                raise PyOntoEvolutionDanglingRelationshipError(rel.source, rel.target)

        graph = nx.DiGraph()
        graph.add_edges_from(
            (rel.source, rel.target)
            for rel in self.relationships
            if rel.kind == REL_IS_A
        )
        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            msg = "is_a cycle: " + " -> ".join(edge[0] for edge in cycle)
            raise PyOntoEvolutionValidationError(msg)

    def canonical_dict(self) -> dict[str, Any]:
        """Return a dict with concepts sorted by accession."""
        return {
            "ontology_id": self.ontology_id,
            "version": self.version,
            "release_date": self.release_date,
            "concepts": [
                self.concepts[key].to_dict()  # type: ignore[attr-defined]
                for key in sorted(self.concepts)
            ],
            "relationships": [
                rel.to_dict()  # type: ignore[attr-defined]
                for rel in self.relationships
            ],
        }

    def to_canonical_json(self) -> str:
        """Return canonical JSON serialization."""
        return canonical_json(self.canonical_dict())


@dataclass_json
@dataclass(frozen=True)
class ChangeOp:
    """Object holding one change operation."""

    kind: ChangeKind
    subjects: list[str]
    payload: dict[str, Any] = field(default_factory=dict)

    @property
    def category(self) -> ChangeCategory:
        """Return the information category."""
        return self.kind.category

    def sort_key(self) -> str:
        """Return a key giving a deterministic order."""
        return json.dumps(
            [self.kind.value, self.subjects, self.payload], sort_keys=True
        )


def sort_ops(ops: list[ChangeOp]) -> list[ChangeOp]:
    """Sort and deduplicate change operations."""
    unique = {op.sort_key(): op for op in ops}
    return [unique[key] for key in sorted(unique)]


@dataclass_json
@dataclass(frozen=True, order=True)
class ChangedConcept:
    """Object holding a changed concept and the side it belongs to."""

    accession: str
    side: ConceptSide


@dataclass_json
@dataclass
class DiffResult:
    """Object holding diff(O_v, O_v+1) with its concept sets."""

    ontology_id: str
    old_version: int
    new_version: int
    ops: list[ChangeOp] = field(default_factory=list)
    ext_set: list[ChangedConcept] = field(default_factory=list)
    red_set: list[ChangedConcept] = field(default_factory=list)
    rev_set: list[ChangedConcept] = field(default_factory=list)

    @property
    def ext(self) -> set[str]:
        """Return accessions of extended concepts."""
        return {item.accession for item in self.ext_set}

    @property
    def red(self) -> set[str]:
        """Return accessions of reduced concepts."""
        return {item.accession for item in self.red_set}

    @property
    def rev(self) -> set[str]:
        """Return accessions of revised concepts."""
        return {item.accession for item in self.rev_set}

    @property
    def changed(self) -> set[str]:
        """Return accessions of all changed concepts."""
        return self.ext | self.red | self.rev

    def changes_of(self, change_class: str) -> set[str]:
        """Return the concept set for ext, red or rev."""
        return {"ext": self.ext, "red": self.red, "rev": self.rev}[change_class]

    def to_canonical_json(self) -> str:
        """Return canonical JSON serialization."""
        data = self.to_dict(encode_json=True)  # type: ignore[attr-defined]
        return canonical_json(data)


@dataclass_json
@dataclass(frozen=True)
class MatcherConfig:
    """Object holding match strategy parameters."""

    strategy: MatchStrategy = MatchStrategy.NAME
    threshold: float = DEFAULT_THRESHOLD
    max_delta: float = DEFAULT_MAX_DELTA

    def __post_init__(self) -> None:
        """Check parameter bounds."""
        try:
            object.__setattr__(self, "strategy", MatchStrategy(self.strategy))
        except ValueError as ex:
            msg = f"Unknown match strategy {self.strategy!r}"
            raise PyOntoEvolutionConfigError(msg) from ex
        if not 0.0 <= self.threshold <= 1.0:
            msg = f"Threshold {self.threshold} outside [0, 1]"
            raise PyOntoEvolutionConfigError(msg)
        if not 0.0 <= self.max_delta <= 1.0:
            msg = f"MaxDelta {self.max_delta} outside [0, 1]"
            raise PyOntoEvolutionConfigError(msg)

    @property
    def label(self) -> str:
        """Return a short label such as namesyn-0.6."""
        label = f"{self.strategy.value}-{self.threshold:g}"
        if self.max_delta != DEFAULT_MAX_DELTA:
            label += f"-d{self.max_delta:g}"
        return label


@dataclass_json
@dataclass(frozen=True, order=True)
class Correspondence:
    """Object holding one correspondence between two concepts."""

    left: str
    right: str
    confidence: float = field(compare=False, default=1.0)

    @property
    def pair(self) -> tuple[str, str]:
        """Return the identity of this correspondence."""
        return (self.left, self.right)


@dataclass_json
@dataclass
class Mapping:
    """Object holding a set of correspondences between two versions."""

    left_ontology: str
    right_ontology: str
    left_version: int
    right_version: int
    config: MatcherConfig
    correspondences: list[Correspondence] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Keep correspondences sorted by pair."""
        self.correspondences = sorted(self.correspondences)

    @property
    def pairs(self) -> set[tuple[str, str]]:
        """Return the accession pairs."""
        return {item.pair for item in self.correspondences}

    def __len__(self) -> int:
        """Return the number of correspondences."""
        return len(self.correspondences)


@dataclass_json
@dataclass
class MappingDiff:
    """Object holding Add and Del sets of two mapping versions."""

    old_label: int
    new_label: int
    add_set: list[tuple[str, str]] = field(default_factory=list)
    del_set: list[tuple[str, str]] = field(default_factory=list)
    unchanged_count: int = 0

    @property
    def changed_pairs(self) -> set[tuple[str, str]]:
        """Return added and deleted pairs."""
        return set(self.add_set) | set(self.del_set)

    def changes_of(self, change_class: str) -> list[tuple[str, str]]:
        """Return the pair list for add or del."""
        return {"add": self.add_set, "del": self.del_set}[change_class]


@dataclass_json
@dataclass
class ImpactCell:
    """Object holding one impact ratio IR(O_Ch, M_Ch)."""

    ontology_change: str
    mapping_change: str
    impacted_count: int
    total_changed_concepts: int
    ratio: float | None = None

    @property
    def key(self) -> str:
        """Return cell key such as ext_add."""
        return f"{self.ontology_change}_{self.mapping_change}"

    @property
    def defined(self) -> bool:
        """Return if there were changed concepts for this cell."""
        return self.ratio is not None


@dataclass_json
@dataclass
class ImpactMatrix:
    """Object holding the six impact cells of one transition."""

    old_label: int
    new_label: int
    cells: list[ImpactCell] = field(default_factory=list)

    def cell(self, key: str) -> ImpactCell:
        """Return cell by key."""
        for cell in self.cells:
            if cell.key == key:
                return cell
        msg = f"Unknown impact cell {key}"
        raise KeyError(msg)

    def ratios(self) -> dict[str, float | None]:
        """Return ratio per cell key."""
        return {cell.key: cell.ratio for cell in self.cells}

    def count_of(self, change_class: str) -> int:
        """Return |O_Ch| for ext, red or rev."""
        return self.cell(f"{change_class}_add").total_changed_concepts


@dataclass_json
@dataclass
class TransitionRecord:
    """Object holding observed changes of one version transition."""

    old_label: int
    new_label: int
    add_count: int
    del_count: int
    ext_count: int
    red_count: int
    rev_count: int
    impact_ratios: dict[str, float | None] = field(
        default_factory=lambda: {key: None for key in IMPACT_CELL_KEYS}
    )
    # |M| of the new mapping version
    mapping_size: int = 0

    def count_of(self, change_class: str) -> int:
        """Return |Ext|, |Red| or |Rev|."""
        return {
            "ext": self.ext_count,
            "red": self.red_count,
            "rev": self.rev_count,
        }[change_class]

    def actual_of(self, mapping_change: str) -> int:
        """Return |Add| or |Del|."""
        return {"add": self.add_count, "del": self.del_count}[mapping_change]

    @property
    def label(self) -> str:
        """Return transition label such as 3->4."""
        return f"{self.old_label}->{self.new_label}"


@dataclass_json
@dataclass
class CurrentChanges:
    """Object holding ontology change counts of the transition to predict."""

    ext_count: int
    red_count: int
    rev_count: int

    def count_of(self, change_class: str) -> int:
        """Return |Ext|, |Red| or |Rev|."""
        return {
            "ext": self.ext_count,
            "red": self.red_count,
            "rev": self.rev_count,
        }[change_class]


@dataclass_json
@dataclass
class EvolutionHistory:
    """Object holding the window of transitions preceding a prediction."""

    transitions: list[TransitionRecord]
    current: CurrentChanges | None = None

    @property
    def h(self) -> int:
        """Return number of versions in the window."""
        return len(self.transitions) + 1


@dataclass_json
@dataclass
class WeightVector:
    """Object holding normalized weights, oldest transition first."""

    kind: WeightKind
    weights: list[float]

    def __post_init__(self) -> None:
        """Check normalization."""
        if abs(sum(self.weights) - 1.0) > WEIGHT_SUM_TOLERANCE:
            msg = f"Weights {self.weights} do not sum to 1"
            raise PyOntoEvolutionConfigError(msg)
        if any(weight < 0 for weight in self.weights):
            msg = f"Weights {self.weights} contain negative values"
            raise PyOntoEvolutionConfigError(msg)

    def __len__(self) -> int:
        """Return number of weights."""
        return len(self.weights)


@dataclass_json
@dataclass
class Prediction:
    """Object holding estimated Add and Del counts."""

    method: EstimationMethod
    weight_kind: WeightKind
    h: int
    add_estimate: float
    del_estimate: float
    add_rounded: int
    del_rounded: int
    beta_add: float | None = None
    beta_del: float | None = None
    aggregated_irs: dict[str, float] | None = None
    # IE fell back to ME for at least one side
    fallback: bool = False
    warnings: list[str] = field(default_factory=list)


@dataclass_json
@dataclass
class EvolutionSeries:
    """Object holding all transitions of one scenario and matcher."""

    scenario: str
    matcher: str
    transitions: list[TransitionRecord]
    initial_mapping_size: int = 0

    @property
    def version_count(self) -> int:
        """Return number of versions k."""
        return len(self.transitions) + 1


@dataclass_json
@dataclass
class BacktestRow:
    """Object holding CR versus PR of one prediction."""

    scenario: str
    matcher: str
    method: PredictionMethod
    h: int
    target: str
    cr_add: int
    pr_add: int
    cr_del: int
    pr_del: int
    mapping_size: int
    add_estimate: float = 0.0
    del_estimate: float = 0.0

    @property
    def abs_error_add(self) -> int:
        """Return |CR - PR| for additions."""
        return abs(self.cr_add - self.pr_add)

    @property
    def abs_error_del(self) -> int:
        """Return |CR - PR| for deletions."""
        return abs(self.cr_del - self.pr_del)

    @property
    def abs_error(self) -> int:
        """Return summed absolute error of additions and deletions."""
        return self.abs_error_add + self.abs_error_del

    @property
    def err_add(self) -> float:
        """Return error rate for additions."""
        return self.abs_error_add / max(self.mapping_size, 1)

    @property
    def err_del(self) -> float:
        """Return error rate for deletions."""
        return self.abs_error_del / max(self.mapping_size, 1)


@dataclass_json
@dataclass
class BacktestSummary:
    """Object holding errSum and avg(errSum) of a method and window size."""

    method: PredictionMethod
    h: int
    targets: int
    err_sum: int
    err_sum_add: int
    err_sum_del: int
    avg_err_sum: float


@dataclass_json
@dataclass
class EvaluationReport:
    """Object holding a backtest report."""

    rows: list[BacktestRow] = field(default_factory=list)
    summaries: list[BacktestSummary] = field(default_factory=list)


@dataclass_json
@dataclass
class EvolutionStats:
    """Object holding change ratios of one transition."""

    transition: str
    ocr_left: float
    ocr_right: float
    ocr_combined: float
    add_count: int
    del_count: int
    mcr: float
    mapping_size: int


@dataclass_json
@dataclass
class GrowthFactors:
    """Object holding growth between first and last version."""

    first_concepts: int
    last_concepts: int
    concept_factor: float | None
    first_mapping_size: int
    last_mapping_size: int
    mapping_factor: float | None
    left_coverage: float
    right_coverage: float


@dataclass_json
@dataclass
class AggregatedImpact:
    """Object holding averages over transitions of an impact series."""

    transitions: int
    avg_ext_count: float
    avg_red_count: float
    avg_rev_count: float
    avg_ratios: dict[str, float | None] = field(default_factory=dict)


@dataclass_json
@dataclass
class OntologySeries:
    """Object holding ordered version files of both ontologies."""

    left: list[str]
    right: list[str]


@dataclass_json
@dataclass
class PredictionSettings:
    """Object holding prediction settings of a pipeline run."""

    methods: list[PredictionMethod] = field(
        default_factory=lambda: list(DEFAULT_METHODS)
    )
    h_range: list[int] = field(default_factory=lambda: list(DEFAULT_H_RANGE))
    targets: int = DEFAULT_TARGET_COUNT

    def __post_init__(self) -> None:
        """Coerce method names."""
        try:
            self.methods = [PredictionMethod(method) for method in self.methods]
        except ValueError as ex:
            msg = f"Unknown prediction method in {self.methods}"
            raise PyOntoEvolutionConfigError(msg) from ex


@dataclass_json
@dataclass
class PipelineConfig:
    """Object holding a version series description."""

    scenario: str
    ontologies: OntologySeries
    output: str
    matchers: list[MatcherConfig] = field(
        default_factory=lambda: [MatcherConfig()]
    )
    prediction: PredictionSettings | None = field(
        default_factory=PredictionSettings
    )

    def validate(self) -> None:
        """Check series and prediction settings."""
        left, right = self.ontologies.left, self.ontologies.right
        if len(left) != len(right):
            msg = (
                f"Series lengths differ: {len(left)} left versions"
                f" but {len(right)} right versions"
            )
            raise PyOntoEvolutionConfigError(msg)
        if len(left) < 2:
            msg = "At least two versions per ontology are required"
            raise PyOntoEvolutionConfigError(msg)
        if not self.matchers:
            msg = "At least one matcher is required"
            raise PyOntoEvolutionConfigError(msg)
        labels = [matcher.label for matcher in self.matchers]
        if len(set(labels)) != len(labels):
            msg = f"Duplicate matcher configurations: {labels}"
            raise PyOntoEvolutionConfigError(msg)
        if self.prediction is not None:
            if any(h < 2 for h in self.prediction.h_range):
                msg = f"Window sizes must be >= 2: {self.prediction.h_range}"
                raise PyOntoEvolutionConfigError(msg)
            if self.prediction.targets < 1:
                msg = "At least one prediction target is required"
                raise PyOntoEvolutionConfigError(msg)
            if not self.prediction.methods:
                msg = "At least one prediction method is required"
                raise PyOntoEvolutionConfigError(msg)


@dataclass_json
@dataclass
class ArtifactEntry:
    """Object holding one artifact written by the pipeline."""

    stage: str
    kind: str
    path: str
    sha256: str
    sidecar: str | None = None


@dataclass_json
@dataclass
class PipelineManifest:
    """Object holding the artifact tree of a pipeline run."""

    scenario: str
    status: str
    artifacts: list[ArtifactEntry] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)
    failed_stage: str | None = None
    error: str | None = None
    manifest_hash: str | None = None

    def body(self) -> dict[str, Any]:
        """Return manifest content without its hash."""
        data: dict[str, Any] = self.to_dict(encode_json=True)  # type: ignore[attr-defined]
        data.pop("manifest_hash", None)
        return data

    def artifacts_of(self, kind: str) -> list[ArtifactEntry]:
        """Return artifacts of one kind."""
        return [entry for entry in self.artifacts if entry.kind == kind]
