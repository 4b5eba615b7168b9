"""Pipeline running a whole version series: parse, diff, match, impact, back-test."""

from __future__ import annotations

import asyncio
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import replace
import logging
from pathlib import Path
import time
from types import TracebackType
from typing import Any, Self

import yaml

from .artifacts import (
    impact_to_tsv,
    mapping_diff_to_tsv,
    mapping_sidecar,
    mapping_to_tsv,
    series_to_tsv,
    sha256_text,
    to_json,
    write_text,
)
from .backtest import emit_report, feasible_h_range, run_backtest
from .const import (
    DEFAULT_JOBS,
    LEFT_SIDE,
    MANIFEST_FILE,
    MANIFEST_STATUS_FAILED,
    MANIFEST_STATUS_OK,
    NOTICE_INSUFFICIENT_HISTORY,
    RIGHT_SIDE,
)
from .diff import compute_diff
from .evolution import (
    aggregate_impact,
    build_transition_record,
    growth_factors,
    impact_matrix,
    mapping_diff,
    transition_stats,
)
from .exceptions import (
    PyOntoEvolutionConfigError,
    PyOntoEvolutionError,
    PyOntoEvolutionStageError,
)
from .matcher import match
from .models import (
    ArtifactEntry,
    DiffResult,
    EvolutionSeries,
    EvolutionStats,
    ImpactMatrix,
    Mapping,
    MappingDiff,
    OntologySeries,
    OntologyVersion,
    PipelineConfig,
    PipelineManifest,
    canonical_json,
)
from .ontology import load_ontology

_LOGGER = logging.getLogger(__name__)


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    """Read a YAML pipeline config, resolving paths against its directory."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as ex:
        msg = f"Unable to read config {path}: {ex}"
        raise PyOntoEvolutionConfigError(msg) from ex
    except yaml.YAMLError as ex:
        msg = f"Config {path} is not valid YAML: {ex}"
        raise PyOntoEvolutionConfigError(msg) from ex

    if not isinstance(data, dict):
        msg = f"Config {path} must be a mapping"
        raise PyOntoEvolutionConfigError(msg)

    try:
        config: PipelineConfig = PipelineConfig.from_dict(data)  # type: ignore[attr-defined]
    except (KeyError, TypeError, ValueError, AttributeError) as ex:
        msg = f"Config {path} is incomplete: {ex}"
        raise PyOntoEvolutionConfigError(msg) from ex

    base = path.parent

    def resolve(item: str) -> str:
        return str(base / item)

    config = replace(
        config,
        ontologies=OntologySeries(
            left=[resolve(item) for item in config.ontologies.left],
            right=[resolve(item) for item in config.ontologies.right],
        ),
        output=resolve(config.output),
    )
    config.validate()

    return config


class OntologyEvolutionPipeline:
    """Class running all stages for one scenario."""

    logger: logging.Logger = logging.getLogger(__name__)

    def __init__(self, config: PipelineConfig, jobs: int = DEFAULT_JOBS) -> None:
        """Initialize OntologyEvolutionPipeline Class."""
        config.validate()
        self._config = config
        self._jobs = jobs
        self._output = Path(config.output)
        self._manifest = PipelineManifest(
            scenario=config.scenario, status=MANIFEST_STATUS_OK
        )

        self._left: list[OntologyVersion] = []
        self._right: list[OntologyVersion] = []
        self._diffs: dict[str, list[DiffResult]] = {LEFT_SIDE: [], RIGHT_SIDE: []}
        self._mappings: dict[str, list[Mapping]] = {}
        self._mapping_diffs: dict[str, list[MappingDiff]] = {}
        self._series: list[EvolutionSeries] = []
        self._current_stage: str | None = None

    @property
    def manifest(self) -> PipelineManifest:
        """Return the manifest of the current run."""
        return self._manifest

    @contextmanager
    def _stage(self, name: str, source: str) -> Iterator[None]:
        self._current_stage = name
        start = time.perf_counter()
        try:
            yield
        except PyOntoEvolutionStageError:
            raise
        except Exception as ex:  # pylint: disable=broad-except
            self.logger.error("Stage %s failed for %s: %s", name, source, ex)
            raise PyOntoEvolutionStageError(name, source, ex) from ex
        self.logger.info(
            "Stage %s finished in %.3f s", name, time.perf_counter() - start
        )

    def _write(
        self,
        stage: str,
        kind: str,
        relative: str,
        text: str,
        sidecar: tuple[str, str] | None = None,
    ) -> None:
        sha256 = write_text(self._output / relative, text)
        sidecar_relative = None
        if sidecar is not None:
            sidecar_relative, sidecar_text = sidecar
            write_text(self._output / sidecar_relative, sidecar_text)
        self._manifest.artifacts.append(
            ArtifactEntry(
                stage=stage,
                kind=kind,
                path=relative,
                sha256=sha256,
                sidecar=sidecar_relative,
            )
        )

    async def _parse_file(self, path: str, version: int) -> OntologyVersion:
        try:
            return await asyncio.to_thread(load_ontology, path, version)
        except PyOntoEvolutionError as ex:
            self.logger.error("Stage parse failed for %s: %s", path, ex)
            raise PyOntoEvolutionStageError("parse", path, ex) from ex

    async def _parse(self) -> None:
        with self._stage("parse", self._config.scenario):
            series = self._config.ontologies
            left = [self._parse_file(path, pos) for pos, path in enumerate(series.left, 1)]
            right = [
                self._parse_file(path, pos) for pos, path in enumerate(series.right, 1)
            ]
            versions = await asyncio.gather(*left, *right)
            self._left = list(versions[: len(left)])
            self._right = list(versions[len(left) :])

    async def _diff(self) -> None:
        for side, versions in ((LEFT_SIDE, self._left), (RIGHT_SIDE, self._right)):
            for old, new in zip(versions, versions[1:]):
                source = f"{side} v{old.version}->v{new.version}"
                with self._stage("diff", source):
                    diff = await asyncio.to_thread(compute_diff, old, new)
                    self._diffs[side].append(diff)
                    self._write(
                        "diff",
                        "diff",
                        f"diffs/{side}_{old.version}_{new.version}.json",
                        diff.to_canonical_json(),
                    )

    def _match(self) -> None:
        for config in self._config.matchers:
            mappings = []
            for left, right in zip(self._left, self._right):
                with self._stage("match", f"{config.label} v{left.version}"):
                    mapping = match(left, right, config, jobs=self._jobs)
                    relative = f"mappings/{config.label}/mapping_{left.version}"
                    self._write(
                        "match",
                        "mapping",
                        f"{relative}.tsv",
                        mapping_to_tsv(mapping),
                        sidecar=(f"{relative}.json", mapping_sidecar(mapping)),
                    )
                mappings.append(mapping)
            self._mappings[config.label] = mappings

    def _mapdiff(self) -> None:
        for label, mappings in self._mappings.items():
            diffs = []
            for old, new in zip(mappings, mappings[1:]):
                with self._stage("mapdiff", f"{label} v{old.left_version}->v{new.left_version}"):
                    diff = mapping_diff(old, new)
                    self._write(
                        "mapdiff",
                        "mapdiff",
                        f"mapdiffs/{label}/mapdiff_{diff.old_label}_{diff.new_label}.tsv",
                        mapping_diff_to_tsv(diff),
                    )
                diffs.append(diff)
            self._mapping_diffs[label] = diffs

    def _impact(self) -> None:
        for label, diffs in self._mapping_diffs.items():
            mappings = self._mappings[label]
            matrices: list[ImpactMatrix] = []
            stats: list[EvolutionStats] = []
            records = []
            for pos, diff in enumerate(diffs):
                with self._stage("impact", f"{label} v{diff.old_label}->v{diff.new_label}"):
                    left_diff = self._diffs[LEFT_SIDE][pos]
                    right_diff = self._diffs[RIGHT_SIDE][pos]
                    matrix = impact_matrix(left_diff, right_diff, diff)
                    relative = f"impact/{label}/impact_{diff.old_label}_{diff.new_label}"
                    self._write(
                        "impact",
                        "impact",
                        f"{relative}.json",
                        to_json(matrix),
                        sidecar=(f"{relative}.tsv", impact_to_tsv(matrix)),
                    )
                matrices.append(matrix)
                size = len(mappings[pos + 1])
                stats.append(
                    transition_stats(
                        (self._left[pos], self._left[pos + 1], left_diff),
                        (self._right[pos], self._right[pos + 1], right_diff),
                        diff,
                        size,
                    )
                )
                records.append(
                    build_transition_record(left_diff, right_diff, diff, matrix, size)
                )

            series = EvolutionSeries(
                scenario=self._config.scenario,
                matcher=label,
                transitions=records,
                initial_mapping_size=len(mappings[0]),
            )
            self._series.append(series)

            with self._stage("impact", f"{label} series"):
                self._write("impact", "series", f"series/{label}.tsv", series_to_tsv(stats))
                self._write("impact", "series_json", f"series/{label}.json", to_json(series))
                growth = growth_factors(self._left, self._right, mappings)
                aggregated = aggregate_impact(matrices)
                summary: dict[str, Any] = {
                    "growth": growth.to_dict(),  # type: ignore[attr-defined]
                    "impact": aggregated.to_dict(),  # type: ignore[attr-defined]
                }
                self._write("impact", "summary", f"summary/{label}.json", canonical_json(summary))

    def _predict(self) -> None:
        settings = self._config.prediction
        if settings is None:
            return

        version_count = len(self._left)
        h_range = feasible_h_range(version_count, settings.h_range, settings.targets)
        if not h_range:
            self.logger.warning(
                "Skipping prediction for %d versions: %s",
                version_count,
                NOTICE_INSUFFICIENT_HISTORY,
            )
            self._manifest.notices.append(NOTICE_INSUFFICIENT_HISTORY)
            return
        skipped = sorted(set(settings.h_range) - set(h_range))
        if skipped:
            self._manifest.notices.append(
                f"{NOTICE_INSUFFICIENT_HISTORY} for h={','.join(map(str, skipped))}"
            )

        with self._stage("predict", self._config.scenario):
            report = run_backtest(self._series, settings.methods, h_range, settings.targets)
            self._write("predict", "report", "backtest/report.tsv", emit_report(report, "tsv"))
            self._write(
                "predict", "report_summary", "backtest/summary.tsv", emit_report(report, "summary")
            )
            self._write(
                "predict", "report_json", "backtest/report.json", emit_report(report, "json")
            )

    def _fail(self, stage: str, error: str) -> None:
        self._manifest.status = MANIFEST_STATUS_FAILED
        self._manifest.failed_stage = stage
        self._manifest.error = error

    def _write_manifest(self) -> None:
        self._manifest.artifacts.sort(key=lambda entry: entry.path)
        self._manifest.manifest_hash = sha256_text(canonical_json(self._manifest.body()))
        write_text(self._output / MANIFEST_FILE, to_json(self._manifest))

    async def run(self) -> PipelineManifest:
        """Run all stages and write the manifest, also on failure."""
        self.logger.info(
            "Running scenario %s with %d versions",
            self._config.scenario,
            len(self._config.ontologies.left),
        )
        try:
            await self._parse()
            await self._diff()
            self._match()
            self._mapdiff()
            self._impact()
            self._predict()
        except PyOntoEvolutionStageError as ex:
            self._fail(ex.stage, str(ex))
            raise
        except Exception as ex:
            # Raised between stages
            self._fail(self._current_stage or "setup", f"{type(ex).__name__}: {ex}")
            raise
        finally:
            self._write_manifest()

        return self._manifest

    async def close(self) -> None:
        """Release pipeline state."""
        self._left.clear()
        self._right.clear()
        self._mappings.clear()

    async def __aenter__(self) -> Self:
        """Async enter."""
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        """Async exit."""
        await self.close()
