"""Mapping evolution: Add/Del sets, change ratios and impact of ontology changes."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
import logging
from statistics import fmean

from .const import IMPACT_CELL_KEYS, MAPPING_CHANGE_CLASSES, ONTOLOGY_CHANGE_CLASSES
from .diff import ontology_change_ratio
from .exceptions import PyOntoEvolutionDataError, PyOntoEvolutionMappingMismatchError
from .models import (
    AggregatedImpact,
    DiffResult,
    EvolutionSeries,
    EvolutionStats,
    GrowthFactors,
    ImpactCell,
    ImpactMatrix,
    Mapping,
    MappingDiff,
    OntologyVersion,
    TransitionRecord,
)

_LOGGER = logging.getLogger(__name__)

Pair = tuple[str, str]


def mapping_diff(m_old: Mapping, m_new: Mapping) -> MappingDiff:
    """Return Add and Del sets of two mapping versions."""
    if (m_old.left_ontology, m_old.right_ontology) != (
        m_new.left_ontology,
        m_new.right_ontology,
    ):
        msg = (
            f"Mappings connect different ontologies: "
            f"{m_old.left_ontology}/{m_old.right_ontology} and "
            f"{m_new.left_ontology}/{m_new.right_ontology}"
        )
        raise PyOntoEvolutionMappingMismatchError(msg)
    if m_old.config != m_new.config:
        msg = (
            f"Mappings were produced by different matchers: "
            f"{m_old.config.label} and {m_new.config.label}"
        )
        raise PyOntoEvolutionMappingMismatchError(msg)

    old_pairs, new_pairs = m_old.pairs, m_new.pairs

    return MappingDiff(
        old_label=m_old.left_version,
        new_label=m_new.left_version,
        add_set=sorted(new_pairs - old_pairs),
        del_set=sorted(old_pairs - new_pairs),
        unchanged_count=len(old_pairs & new_pairs),
    )


def mapping_change_ratio(diff: MappingDiff) -> float:
    """Return |Add u Del| / |M_old u M_new|, 0 for two empty mappings."""
    changed = len(diff.add_set) + len(diff.del_set)
    total = changed + diff.unchanged_count
    if total == 0:
        return 0.0

    return changed / total


def impact_ratio(o_ch: Iterable[str], m_ch: Iterable[Pair]) -> float | None:
    """Return the share of changed concepts on either side of a changed pair.

    None marks an undefined ratio for an empty change set.
    """
    changed = set(o_ch)
    if not changed:
        return None
    endpoints = {accession for pair in m_ch for accession in pair}

    return len(changed & endpoints) / len(changed)


def impact_matrix(
    left_diff: DiffResult, right_diff: DiffResult, md: MappingDiff
) -> ImpactMatrix:
    """Return the six impact cells of one transition.

    Changed concepts of the left ontology are looked up on the left side of
    changed correspondences, those of the right ontology on the right side.
    """
    cells = []
    for mapping_change in MAPPING_CHANGE_CLASSES:
        pairs = md.changes_of(mapping_change)
        lefts = {pair[0] for pair in pairs}
        rights = {pair[1] for pair in pairs}
        for ontology_change in ONTOLOGY_CHANGE_CLASSES:
            left_changed = left_diff.changes_of(ontology_change)
            right_changed = right_diff.changes_of(ontology_change)
            total = len(left_changed) + len(right_changed)
            impacted = len(left_changed & lefts) + len(right_changed & rights)
            cells.append(
                ImpactCell(
                    ontology_change=ontology_change,
                    mapping_change=mapping_change,
                    impacted_count=impacted,
                    total_changed_concepts=total,
                    ratio=impacted / total if total else None,
                )
            )

    matrix = ImpactMatrix(old_label=md.old_label, new_label=md.new_label, cells=cells)
    undefined = [cell.key for cell in cells if not cell.defined]
    if undefined:
        _LOGGER.debug(
            "Transition %s->%s has undefined impact cells: %s",
            md.old_label,
            md.new_label,
            ", ".join(undefined),
        )
    return matrix


def transition_stats(
    left: tuple[OntologyVersion, OntologyVersion, DiffResult],
    right: tuple[OntologyVersion, OntologyVersion, DiffResult],
    md: MappingDiff,
    mapping_size: int,
) -> EvolutionStats:
    """Return OCR of both ontologies, their combined OCR, |Add|, |Del| and MCR."""
    left_old, left_new, left_diff = left
    right_old, right_new, right_diff = right
    union = len(left_old.accessions | left_new.accessions) + len(
        right_old.accessions | right_new.accessions
    )
    changed = len(left_diff.changed) + len(right_diff.changed)

    return EvolutionStats(
        transition=f"{md.old_label}->{md.new_label}",
        ocr_left=ontology_change_ratio(left_diff, left_old, left_new),
        ocr_right=ontology_change_ratio(right_diff, right_old, right_new),
        ocr_combined=changed / union if union else 0.0,
        add_count=len(md.add_set),
        del_count=len(md.del_set),
        mcr=mapping_change_ratio(md),
        mapping_size=mapping_size,
    )


def _coverage(version: OntologyVersion, matched: set[str]) -> float:
    active = {acc for acc, concept in version.concepts.items() if not concept.obsolete}
    if not active:
        return 0.0
    return len(active & matched) / len(active)


def growth_factors(
    left_versions: Sequence[OntologyVersion],
    right_versions: Sequence[OntologyVersion],
    mappings: Sequence[Mapping],
) -> GrowthFactors:
    """Return size growth between the first and the last version of a series."""
    if not left_versions or not right_versions or not mappings:
        msg = "Growth factors need at least one version and one mapping"
        raise PyOntoEvolutionDataError(msg)

    first_concepts = len(left_versions[0].concepts) + len(right_versions[0].concepts)
    last_concepts = len(left_versions[-1].concepts) + len(right_versions[-1].concepts)
    first_size, last_size = len(mappings[0]), len(mappings[-1])
    last_pairs = mappings[-1].pairs

    return GrowthFactors(
        first_concepts=first_concepts,
        last_concepts=last_concepts,
        concept_factor=last_concepts / first_concepts if first_concepts else None,
        first_mapping_size=first_size,
        last_mapping_size=last_size,
        mapping_factor=last_size / first_size if first_size else None,
        left_coverage=_coverage(left_versions[-1], {pair[0] for pair in last_pairs}),
        right_coverage=_coverage(right_versions[-1], {pair[1] for pair in last_pairs}),
    )


def aggregate_impact(matrices: Sequence[ImpactMatrix]) -> AggregatedImpact:
    """Average change counts and impact ratios over transitions.

    Undefined cells are skipped; a cell undefined everywhere stays None.
    """
    if not matrices:
        return AggregatedImpact(
            transitions=0,
            avg_ext_count=0.0,
            avg_red_count=0.0,
            avg_rev_count=0.0,
            avg_ratios={key: None for key in IMPACT_CELL_KEYS},
        )

    avg_ratios: dict[str, float | None] = {}
    for key in IMPACT_CELL_KEYS:
        defined = [
            ratio for matrix in matrices if (ratio := matrix.cell(key).ratio) is not None
        ]
        avg_ratios[key] = fmean(defined) if defined else None

    return AggregatedImpact(
        transitions=len(matrices),
        avg_ext_count=fmean(matrix.count_of("ext") for matrix in matrices),
        avg_red_count=fmean(matrix.count_of("red") for matrix in matrices),
        avg_rev_count=fmean(matrix.count_of("rev") for matrix in matrices),
        avg_ratios=avg_ratios,
    )


def build_transition_record(
    left_diff: DiffResult,
    right_diff: DiffResult,
    md: MappingDiff,
    matrix: ImpactMatrix,
    mapping_size: int,
) -> TransitionRecord:
    """Assemble the observed changes of one transition, both ontologies combined."""
    return TransitionRecord(
        old_label=md.old_label,
        new_label=md.new_label,
        add_count=len(md.add_set),
        del_count=len(md.del_set),
        ext_count=len(left_diff.ext) + len(right_diff.ext),
        red_count=len(left_diff.red) + len(right_diff.red),
        rev_count=len(left_diff.rev) + len(right_diff.rev),
        impact_ratios=matrix.ratios(),
        mapping_size=mapping_size,
    )


def build_series(
    scenario: str,
    matcher: str,
    left_diffs: Sequence[DiffResult],
    right_diffs: Sequence[DiffResult],
    mappings: Sequence[Mapping],
) -> EvolutionSeries:
    """Assemble an EvolutionSeries from the diffs and mappings of k versions."""
    if not len(left_diffs) == len(right_diffs) == len(mappings) - 1:
        msg = (
            f"Expected {len(mappings) - 1} diffs per ontology for {len(mappings)} "
            f"mappings, got {len(left_diffs)} and {len(right_diffs)}"
        )
        raise PyOntoEvolutionDataError(msg)

    records = []
    for pos, (left_diff, right_diff) in enumerate(zip(left_diffs, right_diffs)):
        md = mapping_diff(mappings[pos], mappings[pos + 1])
        records.append(
            build_transition_record(
                left_diff,
                right_diff,
                md,
                impact_matrix(left_diff, right_diff, md),
                len(mappings[pos + 1]),
            )
        )

    return EvolutionSeries(
        scenario=scenario,
        matcher=matcher,
        transitions=records,
        initial_mapping_size=len(mappings[0]) if mappings else 0,
    )
