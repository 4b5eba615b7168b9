"""Command line interface for pyontoevolution."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path
import sys
from typing import Any

import click

from .artifacts import (
    impact_to_tsv,
    load_diff,
    load_history,
    load_mapping,
    load_series,
    mapping_diff_to_tsv,
    mapping_sidecar,
    mapping_to_tsv,
    sidecar_path,
    to_json,
    write_text,
)
from .backtest import emit_report, run_backtest
from .const import (
    DEFAULT_H_RANGE,
    DEFAULT_JOBS,
    DEFAULT_MAX_DELTA,
    DEFAULT_TARGET_COUNT,
    DEFAULT_THRESHOLD,
    EXIT_DATA,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_USAGE,
    LOG_DATE_FORMAT,
    LOG_FORMAT,
    RATIO_SUMMARY_FORMAT,
    REPORT_FORMATS,
)
from .diff import compute_diff, ontology_change_ratio
from .evolution import impact_matrix, mapping_change_ratio, mapping_diff
from .exceptions import (
    PyOntoEvolutionConfigError,
    PyOntoEvolutionDataError,
    PyOntoEvolutionReportFormatError,
    PyOntoEvolutionStageError,
)
from .matcher import match
from .models import (
    DEFAULT_METHODS,
    MatcherConfig,
    MatchStrategy,
    PredictionMethod,
    canonical_json,
)
from .ontology import OboParser, load_ontology
from .pipeline import OntologyEvolutionPipeline, load_pipeline_config
from .prediction import predict as run_prediction

_LOGGER = logging.getLogger(__name__)

USAGE_ERRORS = (PyOntoEvolutionConfigError, PyOntoEvolutionReportFormatError)
DATA_ERRORS = (PyOntoEvolutionDataError, OSError)


def exit_code_for(ex: BaseException) -> int:
    """Return the process exit code for an exception."""
    if isinstance(ex, PyOntoEvolutionStageError):
        return exit_code_for(ex.cause)
    if isinstance(ex, USAGE_ERRORS):
        return EXIT_USAGE
    if isinstance(ex, DATA_ERRORS):
        return EXIT_DATA
    return EXIT_INTERNAL


class PyOntoEvolutionGroup(click.Group):
    """Click group mapping failures to exit codes."""

    def main(self, *args: Any, **kwargs: Any) -> Any:  # type: ignore[override]
        """Run the command and exit with 0, 1, 2 or 3."""
        kwargs["standalone_mode"] = False
        try:
            result = super().main(*args, **kwargs)
        except click.ClickException as ex:
            ex.show()
            sys.exit(EXIT_USAGE)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except Exception as ex:  # pylint: disable=broad-except
            code = exit_code_for(ex)
            if code == EXIT_INTERNAL:
                _LOGGER.exception("Unexpected error")
            click.echo(f"Error: {ex}", err=True)
            sys.exit(code)

        sys.exit(result if isinstance(result, int) else EXIT_OK)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        write_text(output, text)


OUTPUT_OPTION = click.option(
    "-o",
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the artifact to this file instead of standard output.",
)


@click.group(cls=PyOntoEvolutionGroup)
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages.")
def cli(verbose: bool) -> None:
    """Ontology diff, matching, mapping evolution and change prediction."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        stream=sys.stderr,
    )


@cli.command()
@click.argument("obo_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--version", "version", type=click.IntRange(min=1), default=1)
@OUTPUT_OPTION
def parse(obo_file: Path, version: int, output: Path | None) -> None:
    """Parse an OBO file into canonical JSON."""
    try:
        text = obo_file.read_text(encoding="utf-8")
    except OSError as ex:
        msg = f"Unable to read {obo_file}: {ex}"
        raise PyOntoEvolutionDataError(msg) from ex

    parser = OboParser(text, version=version)
    ontology = parser.parse()
    _emit(ontology.to_canonical_json(), output)
    if output is not None:
        click.echo(
            f"Concepts={len(ontology.concepts)} "
            f"Relationships={len(ontology.relationships)} "
            f"Ignored={sum(parser.warnings.values())}"
        )


@cli.command()
@click.argument("old_file", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("new_file", type=click.Path(dir_okay=False, path_type=Path))
@OUTPUT_OPTION
def diff(old_file: Path, new_file: Path, output: Path | None) -> None:
    """Diff two versions of one ontology."""
    old = load_ontology(old_file, version=1)
    new = load_ontology(new_file, version=2)
    result = compute_diff(old, new)
    if output is not None:
        write_text(output, result.to_canonical_json())

    ocr = RATIO_SUMMARY_FORMAT.format(ontology_change_ratio(result, old, new))
    click.echo(
        f"Ext={len(result.ext)} Red={len(result.red)} Rev={len(result.rev)} OCR={ocr}"
    )


@cli.command("match")
@click.argument("left_file", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("right_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--strategy",
    type=click.Choice([item.value for item in MatchStrategy]),
    default=MatchStrategy.NAME.value,
    show_default=True,
)
@click.option(
    "--threshold",
    type=click.FloatRange(0.0, 1.0),
    default=DEFAULT_THRESHOLD,
    show_default=True,
)
@click.option(
    "--max-delta",
    type=click.FloatRange(0.0, 1.0),
    default=DEFAULT_MAX_DELTA,
    show_default=True,
)
@click.option("--version", "version", type=click.IntRange(min=1), default=1)
@click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True)
@click.option(
    "-o",
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Mapping TSV; the JSON sidecar is written next to it.",
)
def match_command(
    left_file: Path,
    right_file: Path,
    strategy: str,
    threshold: float,
    max_delta: float,
    version: int,
    jobs: int,
    output: Path,
) -> None:
    """Match two ontology versions of the same version number."""
    config = MatcherConfig(
        strategy=MatchStrategy(strategy), threshold=threshold, max_delta=max_delta
    )
    mapping = match(
        load_ontology(left_file, version=version),
        load_ontology(right_file, version=version),
        config,
        jobs=jobs,
    )
    write_text(output, mapping_to_tsv(mapping))
    write_text(sidecar_path(output), mapping_sidecar(mapping))
    click.echo(f"Correspondences={len(mapping)}")


@cli.command()
@click.argument("old_mapping", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("new_mapping", type=click.Path(dir_okay=False, path_type=Path))
@OUTPUT_OPTION
def mapdiff(old_mapping: Path, new_mapping: Path, output: Path | None) -> None:
    """Diff two mapping versions into Add and Del sets."""
    result = mapping_diff(load_mapping(old_mapping), load_mapping(new_mapping))
    if output is not None:
        write_text(output, mapping_diff_to_tsv(result))

    mcr = RATIO_SUMMARY_FORMAT.format(mapping_change_ratio(result))
    click.echo(f"Add={len(result.add_set)} Del={len(result.del_set)} MCR={mcr}")


@cli.command()
@click.argument("left_diff", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("right_diff", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("old_mapping", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("new_mapping", type=click.Path(dir_okay=False, path_type=Path))
@OUTPUT_OPTION
def impact(
    left_diff: Path,
    right_diff: Path,
    old_mapping: Path,
    new_mapping: Path,
    output: Path | None,
) -> None:
    """Compute the impact matrix from two diff JSONs and two mappings."""
    matrix = impact_matrix(
        load_diff(left_diff),
        load_diff(right_diff),
        mapping_diff(load_mapping(old_mapping), load_mapping(new_mapping)),
    )
    if output is not None:
        write_text(output, to_json(matrix))
    click.echo(impact_to_tsv(matrix), nl=False)


@cli.command()
@click.argument("history_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--method",
    "methods",
    type=click.Choice([item.value for item in PredictionMethod]),
    multiple=True,
    help="Repeat for several methods.",
)
def predict(history_file: Path, methods: tuple[str, ...]) -> None:
    """Estimate |Add| and |Del| of the next transition from a history JSON."""
    history = load_history(history_file)
    chosen = methods or tuple(method.value for method in DEFAULT_METHODS)
    predictions = [
        run_prediction(history, method).to_dict(encode_json=True)  # type: ignore[attr-defined]
        for method in chosen
    ]
    click.echo(canonical_json(predictions), nl=False)


@cli.command()
@click.argument(
    "series_files", nargs=-1, required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.option(
    "--method",
    "methods",
    type=click.Choice([item.value for item in PredictionMethod]),
    multiple=True,
)
@click.option("--h", "h_range", type=click.IntRange(min=2), multiple=True)
@click.option(
    "--targets",
    type=click.IntRange(min=1),
    default=DEFAULT_TARGET_COUNT,
    show_default=True,
)
@click.option(
    "--format", "fmt", type=click.Choice(REPORT_FORMATS), default="tsv", show_default=True
)
@OUTPUT_OPTION
def backtest(
    series_files: tuple[Path, ...],
    methods: tuple[str, ...],
    h_range: tuple[int, ...],
    targets: int,
    fmt: str,
    output: Path | None,
) -> None:
    """Back-test prediction methods on evolution series JSONs."""
    report = run_backtest(
        [load_series(path) for path in series_files],
        methods=list(methods) or None,
        h_range=list(h_range) or list(DEFAULT_H_RANGE),
        targets=targets,
    )
    _emit(emit_report(report, fmt), output)


@cli.command()
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True)
def pipeline(config_file: Path, jobs: int) -> None:
    """Run all stages for the version series of a YAML config."""
    config = load_pipeline_config(config_file)

    async def run() -> None:
        async with OntologyEvolutionPipeline(config, jobs=jobs) as runner:
            manifest = await runner.run()
        click.echo(f"Status={manifest.status} Artifacts={len(manifest.artifacts)}")
        for notice in manifest.notices:
            click.echo(f"Notice: {notice}")

    asyncio.run(run())


def main() -> None:
    """Run the command line interface."""
    cli(prog_name="pyontoevolution")  # pylint: disable=no-value-for-parameter
