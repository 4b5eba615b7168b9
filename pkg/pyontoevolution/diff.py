"""Change operations between two versions of one ontology."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
import logging
from typing import Any

import networkx as nx

from .const import (
    ATTR_CONSIDER,
    ATTR_DEFINITION,
    ATTR_NAME,
    ATTR_REPLACED_BY,
    ATTR_SYNONYM,
    HIERARCHY_KINDS,
)
from .exceptions import (
    PyOntoEvolutionApplyDiffError,
    PyOntoEvolutionOntologyMismatchError,
    PyOntoEvolutionValidationError,
)
from .models import (
    ChangeCategory,
    ChangedConcept,
    ChangeKind,
    ChangeOp,
    Concept,
    ConceptSide,
    DiffResult,
    OntologyVersion,
    Relationship,
    sort_ops,
)

_LOGGER = logging.getLogger(__name__)

# Concept fields holding multi-valued attributes
MULTI_VALUED_FIELDS: dict[str, str] = {
    ATTR_SYNONYM: "synonyms",
    ATTR_REPLACED_BY: "replaced_by",
    ATTR_CONSIDER: "consider",
}
REMOVED_CONCEPT_KINDS = (ChangeKind.DEL_CONCEPT, ChangeKind.DEL_SUBGRAPH)
ADDED_CONCEPT_KINDS = (ChangeKind.ADD_CONCEPT, ChangeKind.ADD_SUBGRAPH)


def _rel_payload(rel: Relationship) -> dict[str, str]:
    return {"source": rel.source, "target": rel.target, "kind": rel.kind}


def _rel_from_payload(data: dict[str, str]) -> Relationship:
    return Relationship(source=data["source"], target=data["target"], kind=data["kind"])


def _attribute_op(
    kind: ChangeKind, accession: str, attribute: str, **values: Any
) -> ChangeOp:
    return ChangeOp(kind=kind, subjects=[accession], payload={"attribute": attribute, **values})


def _single_valued_ops(
    accession: str, attribute: str, old_value: str | None, new_value: str | None
) -> list[ChangeOp]:
    if old_value == new_value:
        return []
    if old_value is None:
        return [_attribute_op(ChangeKind.ADD_ATTRIBUTE, accession, attribute, value=new_value)]
    if new_value is None:
        return [_attribute_op(ChangeKind.DEL_ATTRIBUTE, accession, attribute, value=old_value)]
    return [
        _attribute_op(
            ChangeKind.CHANGE_ATTRIBUTE_VALUE,
            accession,
            attribute,
            old=old_value,
            new=new_value,
        )
    ]


def _concept_ops(old: Concept, new: Concept) -> list[ChangeOp]:
    accession = old.accession
    ops = _single_valued_ops(accession, ATTR_NAME, old.name, new.name)
    ops.extend(
        _single_valued_ops(accession, ATTR_DEFINITION, old.definition, new.definition)
    )

    for attribute, field_name in MULTI_VALUED_FIELDS.items():
        old_values = set(getattr(old, field_name))
        new_values = set(getattr(new, field_name))
        ops.extend(
            _attribute_op(ChangeKind.ADD_ATTRIBUTE, accession, attribute, value=value)
            for value in sorted(new_values - old_values)
        )
        ops.extend(
            _attribute_op(ChangeKind.DEL_ATTRIBUTE, accession, attribute, value=value)
            for value in sorted(old_values - new_values)
        )

    if not old.obsolete and new.obsolete:
        ops.append(ChangeOp(kind=ChangeKind.MARK_OBSOLETE, subjects=[accession]))
    elif old.obsolete and not new.obsolete:
        ops.append(ChangeOp(kind=ChangeKind.MARK_NON_OBSOLETE, subjects=[accession]))

    return ops


def compute_basic_diff(old: OntologyVersion, new: OntologyVersion) -> list[ChangeOp]:
    """Return the basic operations transforming old into new."""
    if old.ontology_id != new.ontology_id:
        msg = f"Cannot diff {old.ontology_id} against {new.ontology_id}"
        raise PyOntoEvolutionOntologyMismatchError(msg)

    ops: list[ChangeOp] = []

    for accession in sorted(new.accessions - old.accessions):
        ops.append(
            ChangeOp(
                kind=ChangeKind.ADD_CONCEPT,
                subjects=[accession],
                payload={"concept": new.concepts[accession].to_dict()},  # type: ignore[attr-defined]
            )
        )
    for accession in sorted(old.accessions - new.accessions):
        ops.append(ChangeOp(kind=ChangeKind.DEL_CONCEPT, subjects=[accession]))

    old_rels, new_rels = set(old.relationships), set(new.relationships)
    # Attributed to the source concept only
    ops.extend(
        ChangeOp(
            kind=ChangeKind.ADD_RELATIONSHIP,
            subjects=[rel.source],
            payload=_rel_payload(rel),
        )
        for rel in sorted(new_rels - old_rels)
    )
    ops.extend(
        ChangeOp(
            kind=ChangeKind.DEL_RELATIONSHIP,
            subjects=[rel.source],
            payload=_rel_payload(rel),
        )
        for rel in sorted(old_rels - new_rels)
    )

    for accession in sorted(old.accessions & new.accessions):
        ops.extend(_concept_ops(old.concepts[accession], new.concepts[accession]))

    _LOGGER.debug(
        "Basic diff %s v%d -> v%d: %d operations",
        old.ontology_id,
        old.version,
        new.version,
        len(ops),
    )

    return sort_ops(ops)


class ComplexChangeDetector:
    """Rule based folding of basic operations into complex ones."""

    def __init__(
        self, old: OntologyVersion, new: OntologyVersion, basic: Iterable[ChangeOp]
    ) -> None:
        """Initialize ComplexChangeDetector."""
        self._old = old
        self._new = new
        self._remaining = sort_ops(list(basic))
        self._complex: list[ChangeOp] = []

        self._added = {
            op.subjects[0] for op in self._remaining if op.kind == ChangeKind.ADD_CONCEPT
        }
        self._deleted = {
            op.subjects[0] for op in self._remaining if op.kind == ChangeKind.DEL_CONCEPT
        }
        self._shared = old.accessions & new.accessions

    def _consume(self, consumed: list[ChangeOp]) -> None:
        keys = {op.sort_key() for op in consumed}
        self._remaining = [op for op in self._remaining if op.sort_key() not in keys]

    def _replacements(self, accession: str, field_name: str) -> set[str]:
        listed = set(getattr(self._old.concepts[accession], field_name))
        found = {item for item in listed if item in self._new.accessions}
        found.update(
            other
            for other, concept in self._new.concepts.items()
            if accession in getattr(concept, field_name)
        )
        return found

    def _synonym_target(self, accession: str) -> str | None:
        name = self._old.concepts[accession].name.strip().lower()
        if not name:
            return None
        targets = {
            op.subjects[0]
            for op in self._remaining
            if op.kind == ChangeKind.ADD_ATTRIBUTE
            and op.payload.get("attribute") == ATTR_SYNONYM
            and str(op.payload.get("value", "")).strip().lower() == name
            and op.subjects[0] in self._shared
        }
        if len(targets) == 1:
            return targets.pop()
        return None

    def _del_concept_op(self, accession: str) -> ChangeOp:
        return ChangeOp(kind=ChangeKind.DEL_CONCEPT, subjects=[accession])

    def _detect_replacements(self) -> set[str]:
        """Fold deleted concepts into split, substitute and merge.

        Returns the added concepts taking part in a split or substitute.
        """
        merges: dict[str, list[str]] = defaultdict(list)
        participants: set[str] = set()

        for accession in sorted(self._deleted):
            replacements = self._replacements(accession, ATTR_REPLACED_BY)
            if not replacements:
                replacements = self._replacements(accession, ATTR_CONSIDER)
            added = sorted(replacements & self._added)
            surviving = sorted(replacements & self._shared)

            if len(added) >= 2:
                self._complex.append(
                    ChangeOp(
                        kind=ChangeKind.SPLIT,
                        subjects=[accession, *added],
                        payload={"source": accession, "targets": added},
                    )
                )
                participants.update(added)
            elif len(added) == 1 and not surviving:
                self._complex.append(
                    ChangeOp(
                        kind=ChangeKind.SUBSTITUTE,
                        subjects=[accession, added[0]],
                        payload={"source": accession, "target": added[0]},
                    )
                )
                participants.update(added)
            elif len(surviving) == 1:
                merges[surviving[0]].append(accession)
                continue
            elif (target := self._synonym_target(accession)) is not None:
                merges[target].append(accession)
                continue
            else:
                continue

            self._consume([self._del_concept_op(accession)])

        for target, sources in sorted(merges.items()):
            self._complex.append(
                ChangeOp(
                    kind=ChangeKind.MERGE,
                    subjects=[*sorted(sources), target],
                    payload={"sources": sorted(sources), "target": target},
                )
            )
            self._consume([self._del_concept_op(source) for source in sources])

        return participants

    def _detect_moves(self) -> None:
        by_source: dict[str, dict[ChangeKind, list[ChangeOp]]] = defaultdict(
            lambda: defaultdict(list)
        )
        for op in self._remaining:
            if (
                op.kind in (ChangeKind.ADD_RELATIONSHIP, ChangeKind.DEL_RELATIONSHIP)
                and op.payload["kind"] in HIERARCHY_KINDS
                and op.subjects[0] in self._shared
            ):
                by_source[op.subjects[0]][op.kind].append(op)

        for accession, groups in sorted(by_source.items()):
            removed = groups[ChangeKind.DEL_RELATIONSHIP]
            added = groups[ChangeKind.ADD_RELATIONSHIP]
            if not removed or not added:
                continue
            self._complex.append(
                ChangeOp(
                    kind=ChangeKind.MOVE,
                    subjects=[accession],
                    payload={
                        "removed": [op.payload for op in removed],
                        "added": [op.payload for op in added],
                    },
                )
            )
            self._consume(removed + added)

    @staticmethod
    def _subtrees(
        members: set[str], version: OntologyVersion, shared: set[str]
    ) -> list[tuple[list[str], str, str]]:
        """Return (members, root, parent) of tree components hanging off one concept."""
        graph = nx.Graph()
        graph.add_nodes_from(members)
        internal: set[tuple[str, str]] = set()
        crossing: dict[str, set[tuple[str, str]]] = defaultdict(set)
        incoming: set[str] = set()

        for rel in version.relationships:
            if not rel.hierarchical:
                continue
            if rel.source in members and rel.target in members:
                graph.add_edge(rel.source, rel.target)
                internal.add((rel.source, rel.target))
            elif rel.source in members:
                crossing[rel.source].add((rel.source, rel.target))
            elif rel.target in members:
                incoming.add(rel.target)

        result = []
        for component in nx.connected_components(graph):
            if len(component) < 2 or component & incoming:
                continue
            edges = {edge for edge in internal if edge[0] in component}
            if len(edges) != len(component) - 1:
                continue
            attachments = set().union(*(crossing[member] for member in component))
            if len(attachments) != 1:
                continue
            root, parent = next(iter(attachments))
            if parent not in shared:
                continue
            result.append((sorted(component), root, parent))

        return sorted(result)

    def _detect_subgraphs(self, participants: set[str]) -> None:
        consumed_deleted = {
            subject
            for op in self._complex
            if op.kind in (ChangeKind.MERGE, ChangeKind.SPLIT, ChangeKind.SUBSTITUTE)
            for subject in op.subjects
        }
        added = self._added - participants
        deleted = self._deleted - consumed_deleted

        for members, root, parent in self._subtrees(added, self._new, self._shared):
            member_set = set(members)
            relationships = [
                _rel_payload(rel)
                for rel in self._new.relationships
                if rel.source in member_set
            ]
            self._complex.append(
                ChangeOp(
                    kind=ChangeKind.ADD_SUBGRAPH,
                    subjects=members,
                    payload={
                        "root": root,
                        "parent": parent,
                        "concepts": [
                            self._new.concepts[member].to_dict()  # type: ignore[attr-defined]
                            for member in members
                        ],
                        "relationships": relationships,
                    },
                )
            )
            self._consume(
                [
                    op
                    for op in self._remaining
                    if (op.kind == ChangeKind.ADD_CONCEPT and op.subjects[0] in member_set)
                    or (
                        op.kind == ChangeKind.ADD_RELATIONSHIP
                        and op.subjects[0] in member_set
                    )
                ]
            )

        for members, root, parent in self._subtrees(deleted, self._old, self._shared):
            member_set = set(members)
            relationships = [
                _rel_payload(rel)
                for rel in self._old.relationships
                if rel.source in member_set
            ]
            self._complex.append(
                ChangeOp(
                    kind=ChangeKind.DEL_SUBGRAPH,
                    subjects=members,
                    payload={
                        "root": root,
                        "parent": parent,
                        "concepts": members,
                        "relationships": relationships,
                    },
                )
            )
            self._consume(
                [
                    op
                    for op in self._remaining
                    if (op.kind == ChangeKind.DEL_CONCEPT and op.subjects[0] in member_set)
                    or (
                        op.kind == ChangeKind.DEL_RELATIONSHIP
                        and op.subjects[0] in member_set
                    )
                ]
            )

    def detect(self) -> list[ChangeOp]:
        """Return basic remainder and complex operations."""
        participants = self._detect_replacements()
        self._detect_moves()
        self._detect_subgraphs(participants)

        _LOGGER.debug(
            "Detected %d complex operations, %d basic operations remain",
            len(self._complex),
            len(self._remaining),
        )

        return sort_ops(self._remaining + self._complex)


def detect_complex_changes(
    old: OntologyVersion, new: OntologyVersion, basic: Iterable[ChangeOp]
) -> list[ChangeOp]:
    """Rewrite subsets of basic operations into complex operations."""
    return ComplexChangeDetector(old, new, basic).detect()


def _side(
    accession: str,
    kinds: set[ChangeKind],
    old: OntologyVersion | None,
    new: OntologyVersion | None,
) -> ConceptSide:
    if old is not None and new is not None:
        in_old = accession in old.concepts
        in_new = accession in new.concepts
        if in_old and not in_new:
            return ConceptSide.OLD
        if in_new and not in_old:
            return ConceptSide.NEW
        return ConceptSide.BOTH
    if kinds & set(ADDED_CONCEPT_KINDS):
        return ConceptSide.NEW
    if kinds & set(REMOVED_CONCEPT_KINDS):
        return ConceptSide.OLD
    return ConceptSide.BOTH


def classify_concepts(
    ops: Iterable[ChangeOp],
    old: OntologyVersion | None = None,
    new: OntologyVersion | None = None,
) -> tuple[list[ChangedConcept], list[ChangedConcept], list[ChangedConcept]]:
    """Partition concepts named by ops into Ext, Red and Rev."""
    categories: dict[str, set[ChangeCategory]] = defaultdict(set)
    kinds: dict[str, set[ChangeKind]] = defaultdict(set)
    for op in ops:
        for subject in op.subjects:
            categories[subject].add(op.category)
            kinds[subject].add(op.kind)

    ext_set, red_set, rev_set = [], [], []
    for accession in sorted(categories):
        item = ChangedConcept(accession, _side(accession, kinds[accession], old, new))
        if categories[accession] == {ChangeCategory.EXTENSION}:
            ext_set.append(item)
        elif categories[accession] == {ChangeCategory.REDUCTION}:
            red_set.append(item)
        else:
            rev_set.append(item)

    return ext_set, red_set, rev_set


def compute_diff(old: OntologyVersion, new: OntologyVersion) -> DiffResult:
    """Return diff(old, new) with complex changes and concept sets."""
    ops = detect_complex_changes(old, new, compute_basic_diff(old, new))
    ext_set, red_set, rev_set = classify_concepts(ops, old, new)

    return DiffResult(
        ontology_id=old.ontology_id,
        old_version=old.version,
        new_version=new.version,
        ops=ops,
        ext_set=ext_set,
        red_set=red_set,
        rev_set=rev_set,
    )


def ontology_change_ratio(
    diff: DiffResult, old: OntologyVersion, new: OntologyVersion
) -> float:
    """Return |Ext u Red u Rev| / |C_old u C_new|, 0 for two empty versions."""
    total = len(old.accessions | new.accessions)
    if total == 0:
        return 0.0

    return len(diff.changed) / total


class _DiffApplier:
    """Grouped, order independent application of change operations."""

    def __init__(self, old: OntologyVersion) -> None:
        self._old = old
        self.rel_remove: set[Relationship] = set()
        self.rel_add: set[Relationship] = set()
        self.concept_remove: set[str] = set()
        self.concept_add: dict[str, dict[str, Any]] = {}
        self.attribute_ops: list[ChangeOp] = []

    def collect(self, op: ChangeOp) -> None:
        payload = op.payload
        if op.kind == ChangeKind.ADD_CONCEPT:
            self.concept_add[op.subjects[0]] = payload["concept"]
        elif op.kind == ChangeKind.DEL_CONCEPT:
            self.concept_remove.add(op.subjects[0])
        elif op.kind == ChangeKind.ADD_RELATIONSHIP:
            self.rel_add.add(_rel_from_payload(payload))
        elif op.kind == ChangeKind.DEL_RELATIONSHIP:
            self.rel_remove.add(_rel_from_payload(payload))
        elif op.kind == ChangeKind.ADD_SUBGRAPH:
            for concept in payload["concepts"]:
                self.concept_add[concept["accession"]] = concept
            self.rel_add.update(_rel_from_payload(rel) for rel in payload["relationships"])
        elif op.kind == ChangeKind.DEL_SUBGRAPH:
            self.concept_remove.update(payload["concepts"])
            self.rel_remove.update(
                _rel_from_payload(rel) for rel in payload["relationships"]
            )
        elif op.kind == ChangeKind.MERGE:
            self.concept_remove.update(payload["sources"])
        elif op.kind in (ChangeKind.SPLIT, ChangeKind.SUBSTITUTE):
            self.concept_remove.add(payload["source"])
        elif op.kind == ChangeKind.MOVE:
            self.rel_remove.update(_rel_from_payload(rel) for rel in payload["removed"])
            self.rel_add.update(_rel_from_payload(rel) for rel in payload["added"])
        else:
            self.attribute_ops.append(op)

    def _apply_attribute(self, concepts: dict[str, dict[str, Any]], op: ChangeOp) -> None:
        accession = op.subjects[0]
        if accession not in concepts:
            msg = f"{op.kind.value} references absent accession {accession}"
            raise PyOntoEvolutionApplyDiffError(msg)
        concept = concepts[accession]

        if op.kind == ChangeKind.MARK_OBSOLETE:
            concept["obsolete"] = True
            return
        if op.kind == ChangeKind.MARK_NON_OBSOLETE:
            concept["obsolete"] = False
            return

        attribute = op.payload["attribute"]
        if attribute in MULTI_VALUED_FIELDS:
            values: list[str] = concept[MULTI_VALUED_FIELDS[attribute]]
            if op.kind == ChangeKind.ADD_ATTRIBUTE:
                values.append(op.payload["value"])
            elif op.payload["value"] in values:
                values.remove(op.payload["value"])
            else:
                msg = f"{accession} has no {attribute} {op.payload['value']!r}"
                raise PyOntoEvolutionApplyDiffError(msg)
        elif op.kind == ChangeKind.CHANGE_ATTRIBUTE_VALUE:
            concept[attribute] = op.payload["new"]
        elif op.kind == ChangeKind.ADD_ATTRIBUTE:
            concept[attribute] = op.payload["value"]
        else:
            concept[attribute] = None

    def apply(
        self, version: int, release_date: str | None
    ) -> OntologyVersion:
        relationships = set(self._old.relationships)
        missing_rels = self.rel_remove - relationships
        if missing_rels:
            rel = min(missing_rels)
            msg = f"Relationship {rel.source} {rel.kind} {rel.target} is absent"
            raise PyOntoEvolutionApplyDiffError(msg)
        relationships -= self.rel_remove

        concepts: dict[str, dict[str, Any]] = {
            accession: concept.to_dict()  # type: ignore[attr-defined]
            for accession, concept in self._old.concepts.items()
        }
        for accession in sorted(self.concept_remove):
            if accession not in concepts:
                msg = f"Cannot delete absent accession {accession}"
                raise PyOntoEvolutionApplyDiffError(msg)
            del concepts[accession]

        for accession, data in sorted(self.concept_add.items()):
            if accession in concepts:
                msg = f"Cannot add existing accession {accession}"
                raise PyOntoEvolutionApplyDiffError(msg)
            concepts[accession] = dict(data)
            for field_name in MULTI_VALUED_FIELDS.values():
                concepts[accession][field_name] = list(data.get(field_name, []))

        relationships |= self.rel_add

        for op in self.attribute_ops:
            self._apply_attribute(concepts, op)

        result = OntologyVersion(
            ontology_id=self._old.ontology_id,
            version=version,
            release_date=release_date,
            concepts={
                accession: Concept.from_dict(data)  # type: ignore[attr-defined]
                for accession, data in concepts.items()
            },
            relationships=list(relationships),
        )
        try:
            result.validate()
        except PyOntoEvolutionValidationError as ex:
            msg = f"Applying operations yields an invalid version: {ex}"
            raise PyOntoEvolutionApplyDiffError(msg) from ex

        return result


def apply_diff(
    old: OntologyVersion,
    ops: Iterable[ChangeOp],
    version: int | None = None,
    release_date: str | None = None,
) -> OntologyVersion:
    """Apply change operations to old, independent of their order."""
    applier = _DiffApplier(old)
    for op in ops:
        applier.collect(op)

    return applier.apply(
        version=old.version + 1 if version is None else version,
        release_date=release_date,
    )
