"""Readers and writers for mapping, diff, impact and series artifacts."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any

from .const import (
    FLOAT_FORMAT,
    IMPACT_TSV_HEADER,
    MAPPING_DIFF_TSV_HEADER,
    MAPPING_TSV_HEADER,
    SERIES_TSV_HEADER,
    UNDEFINED_VALUE,
)
from .exceptions import PyOntoEvolutionDataError
from .models import (
    Correspondence,
    DiffResult,
    EvolutionHistory,
    EvolutionSeries,
    EvolutionStats,
    ImpactMatrix,
    Mapping,
    MappingDiff,
    MatcherConfig,
    canonical_json,
)

_LOGGER = logging.getLogger(__name__)


def to_tsv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as tab separated text with LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter="\t", lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _read_tsv(text: str, header: Sequence[str], source: str) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
    if not rows or tuple(rows[0]) != tuple(header):
        msg = f"{source}: expected header {'/'.join(header)}"
        raise PyOntoEvolutionDataError(msg)
    return [row for row in rows[1:] if row]


def sha256_text(text: str) -> str:
    """Return hex SHA-256 of UTF-8 encoded text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_text(path: Path, text: str) -> str:
    """Write text, creating parent directories, and return its SHA-256."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as file:
        file.write(text)
    _LOGGER.debug("Wrote %s", path)
    return sha256_text(text)


def read_text(path: str | Path) -> str:
    """Read a UTF-8 text file, reporting failures as data errors."""
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as ex:
        msg = f"Unable to read {path}: {ex}"
        raise PyOntoEvolutionDataError(msg) from ex


def read_json(path: str | Path) -> Any:
    """Read and decode a JSON file."""
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as ex:
        msg = f"{path} is not valid JSON: {ex}"
        raise PyOntoEvolutionDataError(msg) from ex


def mapping_to_tsv(mapping: Mapping) -> str:
    """Render correspondences sorted by accession pair."""
    return to_tsv(
        MAPPING_TSV_HEADER,
        (
            (item.left, item.right, FLOAT_FORMAT.format(item.confidence))
            for item in mapping.correspondences
        ),
    )


def mapping_sidecar(mapping: Mapping) -> str:
    """Render matcher configuration and version labels of a mapping."""
    return canonical_json(
        {
            "left_ontology": mapping.left_ontology,
            "right_ontology": mapping.right_ontology,
            "left_version": mapping.left_version,
            "right_version": mapping.right_version,
            "config": mapping.config.to_dict(encode_json=True),  # type: ignore[attr-defined]
            "size": len(mapping),
        }
    )


def sidecar_path(tsv_path: str | Path) -> Path:
    """Return the JSON sidecar path belonging to a mapping TSV."""
    return Path(tsv_path).with_suffix(".json")


def parse_mapping(tsv: str, sidecar: dict[str, Any], source: str = "mapping") -> Mapping:
    """Build a Mapping from its TSV rows and decoded sidecar."""
    correspondences = []
    for row in _read_tsv(tsv, MAPPING_TSV_HEADER, source):
        if len(row) != len(MAPPING_TSV_HEADER):
            msg = f"{source}: malformed row {row}"
            raise PyOntoEvolutionDataError(msg)
        try:
            confidence = float(row[2])
        except ValueError as ex:
            msg = f"{source}: invalid confidence {row[2]!r}"
            raise PyOntoEvolutionDataError(msg) from ex
        correspondences.append(Correspondence(row[0], row[1], confidence))

    try:
        return Mapping(
            left_ontology=sidecar["left_ontology"],
            right_ontology=sidecar["right_ontology"],
            left_version=int(sidecar["left_version"]),
            right_version=int(sidecar["right_version"]),
            config=MatcherConfig.from_dict(sidecar["config"]),  # type: ignore[attr-defined]
            correspondences=correspondences,
        )
    except (KeyError, TypeError, ValueError) as ex:
        msg = f"{source}: incomplete sidecar ({ex})"
        raise PyOntoEvolutionDataError(msg) from ex


def load_mapping(tsv_path: str | Path) -> Mapping:
    """Read a mapping TSV together with its JSON sidecar."""
    sidecar = read_json(sidecar_path(tsv_path))
    return parse_mapping(read_text(tsv_path), sidecar, source=str(tsv_path))


def mapping_diff_to_tsv(diff: MappingDiff) -> str:
    """Render Add and Del pairs with an op column."""
    rows = [("ADD", left, right) for left, right in diff.add_set]
    rows.extend(("DEL", left, right) for left, right in diff.del_set)
    return to_tsv(MAPPING_DIFF_TSV_HEADER, rows)


def impact_to_tsv(matrix: ImpactMatrix) -> str:
    """Render the six impact cells, NA for undefined ratios."""
    return to_tsv(
        IMPACT_TSV_HEADER,
        (
            (
                cell.ontology_change,
                cell.mapping_change,
                cell.impacted_count,
                cell.total_changed_concepts,
                UNDEFINED_VALUE if cell.ratio is None else FLOAT_FORMAT.format(cell.ratio),
            )
            for cell in matrix.cells
        ),
    )


def series_to_tsv(stats: Sequence[EvolutionStats]) -> str:
    """Render per transition OCR and MCR for plotting."""
    return to_tsv(
        SERIES_TSV_HEADER,
        (
            (
                item.transition,
                FLOAT_FORMAT.format(item.ocr_left),
                FLOAT_FORMAT.format(item.ocr_right),
                FLOAT_FORMAT.format(item.ocr_combined),
                item.add_count,
                item.del_count,
                FLOAT_FORMAT.format(item.mcr),
                item.mapping_size,
            )
            for item in stats
        ),
    )


def to_json(item: Any) -> str:
    """Render a dataclasses_json model as canonical JSON."""
    return canonical_json(item.to_dict(encode_json=True))


def _load_model(path: str | Path, model: Any) -> Any:
    data = read_json(path)
    try:
        return model.from_dict(data)
    except (KeyError, TypeError, ValueError) as ex:
        msg = f"{path} is not a valid {model.__name__}: {ex}"
        raise PyOntoEvolutionDataError(msg) from ex


def load_diff(path: str | Path) -> DiffResult:
    """Read a DiffResult JSON artifact."""
    diff: DiffResult = _load_model(path, DiffResult)
    return diff


def load_history(path: str | Path) -> EvolutionHistory:
    """Read an EvolutionHistory JSON document."""
    history: EvolutionHistory = _load_model(path, EvolutionHistory)
    return history


def load_series(path: str | Path) -> EvolutionSeries:
    """Read an EvolutionSeries JSON document."""
    series: EvolutionSeries = _load_model(path, EvolutionSeries)
    return series
