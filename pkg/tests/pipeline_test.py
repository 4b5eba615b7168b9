"""Test for the version series pipeline."""

from __future__ import annotations

from pathlib import Path
import shutil

import pytest
import yaml

from pyontoevolution import pipeline
from pyontoevolution.artifacts import load_series, read_json, sha256_text
from pyontoevolution.backtest import run_backtest
from pyontoevolution.cli import exit_code_for
from pyontoevolution.const import EXIT_INTERNAL, MANIFEST_FILE
from pyontoevolution.exceptions import (
    PyOntoEvolutionConfigError,
    PyOntoEvolutionStageError,
)
from pyontoevolution.models import MatchStrategy
from pyontoevolution.ontology import serialize_ontology
from pyontoevolution.pipeline import OntologyEvolutionPipeline, load_pipeline_config

from tests.conftest import FakeScenario


def _write_scenario(
    fake_scenario: FakeScenario,
    path: Path,
    versions: int,
    prediction: dict | None = None,
    output: str = "out",
) -> Path:
    left = fake_scenario.evolution(5, versions, size=30)
    right = fake_scenario.evolution(6, versions, size=30)
    files: dict[str, list[str]] = {"left": [], "right": []}
    for side, series, prefix in (("left", left, "L"), ("right", right, "S")):
        for version in series:
            name = f"{side}_{version.version}.obo"
            relabeled = fake_scenario.relabel(version, prefix, side)
            (path / name).write_text(serialize_ontology(relabeled), encoding="utf-8")
            files[side].append(name)

    config = {
        "scenario": "random",
        "ontologies": files,
        "output": output,
        "matchers": [{"strategy": "name", "threshold": 0.6}],
    }
    if prediction is not None:
        config["prediction"] = prediction
    config_path = path / "pipeline.yaml"
    config_path.write_text(yaml.safe_dump(config), encoding="utf-8")

    return config_path


async def _run(config_path: Path):
    config = load_pipeline_config(config_path)
    async with OntologyEvolutionPipeline(config) as runner:
        manifest = await runner.run()

    return manifest


def test_load_pipeline_config(fake_scenario: FakeScenario, tmp_path: Path):
    """Test paths are resolved against the config directory."""
    for name in ("pipeline.yaml", "o1_v1.obo", "o1_v2.obo", "o2_v1.obo", "o2_v2.obo"):
        shutil.copy(fake_scenario.fixture_path(name), tmp_path / name)

    config = load_pipeline_config(tmp_path / "pipeline.yaml")

    assert config.scenario == "example"
    assert config.ontologies.left == [str(tmp_path / "o1_v1.obo"), str(tmp_path / "o1_v2.obo")]
    assert config.output == str(tmp_path / "out")
    assert [matcher.label for matcher in config.matchers] == ["name-0.6", "namesyn-0.8"]
    assert config.matchers[1].strategy == MatchStrategy.NAMESYN
    assert config.prediction is not None
    assert config.prediction.h_range == [2, 3]


@pytest.mark.parametrize(
    "content",
    [
        "scenario: broken\n",
        "- just\n- a list\n",
        "scenario: [unclosed\n",
        (
            "scenario: uneven\noutput: out\n"
            "ontologies:\n  left: [a.obo, b.obo]\n  right: [a.obo]\n"
        ),
        (
            "scenario: short\noutput: out\n"
            "ontologies:\n  left: [a.obo]\n  right: [b.obo]\n"
        ),
        (
            "scenario: window\noutput: out\n"
            "ontologies:\n  left: [a.obo, b.obo]\n  right: [c.obo, d.obo]\n"
            "prediction:\n  h_range: [1]\n"
        ),
        (
            "scenario: strategy\noutput: out\n"
            "ontologies:\n  left: [a.obo, b.obo]\n  right: [c.obo, d.obo]\n"
            "matchers:\n  - strategy: soundex\n"
        ),
    ],
)
def test_invalid_config(tmp_path: Path, content: str):
    """Test broken configs raise config errors."""
    path = tmp_path / "pipeline.yaml"
    path.write_text(content, encoding="utf-8")

    with pytest.raises(PyOntoEvolutionConfigError):
        load_pipeline_config(path)


def test_missing_config(tmp_path: Path):
    """Test a missing config file."""
    with pytest.raises(PyOntoEvolutionConfigError):
        load_pipeline_config(tmp_path / "missing.yaml")


@pytest.mark.asyncio
async def test_pipeline_artifacts(fake_scenario: FakeScenario, tmp_path: Path):
    """Test a four version run writes one artifact per stage and transition."""
    config_path = _write_scenario(fake_scenario, tmp_path, 4)

    manifest = await _run(config_path)

    assert manifest.status == "OK"
    assert len(manifest.artifacts_of("diff")) == 6
    assert len(manifest.artifacts_of("mapping")) == 4
    assert len(manifest.artifacts_of("mapdiff")) == 3
    assert len(manifest.artifacts_of("impact")) == 3
    assert len(manifest.artifacts_of("series")) == 1
    assert len(manifest.artifacts_of("series_json")) == 1
    assert len(manifest.artifacts_of("summary")) == 1
    assert manifest.artifacts_of("report") == []
    assert manifest.notices == ["insufficient history"]

    output = tmp_path / "out"
    for entry in manifest.artifacts:
        text = (output / entry.path).read_text(encoding="utf-8")
        assert sha256_text(text) == entry.sha256
        if entry.sidecar is not None:
            assert (output / entry.sidecar).is_file()
    assert [entry.path for entry in manifest.artifacts] == sorted(
        entry.path for entry in manifest.artifacts
    )

    stored = read_json(output / MANIFEST_FILE)
    assert stored["status"] == "OK"
    assert stored["manifest_hash"] == manifest.manifest_hash
    assert (output / "mappings/name-0.6/mapping_4.json").is_file()
    assert (output / "diffs/right_3_4.json").is_file()

    series = load_series(output / "series/name-0.6.json")
    assert series.version_count == 4
    report = run_backtest(series, methods=["ME-w2", "IE-w2"], h_range=[2], targets=2)
    assert len(report.rows) == 4


@pytest.mark.asyncio
async def test_pipeline_backtest(fake_scenario: FakeScenario, tmp_path: Path):
    """Test a long series is back-tested for every feasible window size."""
    config_path = _write_scenario(
        fake_scenario,
        tmp_path,
        7,
        prediction={
            "methods": ["ME-avg", "ME-w2", "IE-w2"],
            "h_range": [2, 3, 4, 5],
            "targets": 3,
        },
    )

    manifest = await _run(config_path)

    assert manifest.notices == ["insufficient history for h=5"]
    (report,) = manifest.artifacts_of("report")
    lines = (tmp_path / "out" / report.path).read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + 3 * 3 * 3
    assert {line.split("\t")[3] for line in lines[1:]} == {"2", "3", "4"}
    (summary,) = manifest.artifacts_of("report_summary")
    summary_lines = (tmp_path / "out" / summary.path).read_text(encoding="utf-8").splitlines()
    assert len(summary_lines) == 1 + 3 * 3
    assert len(manifest.artifacts_of("report_json")) == 1


@pytest.mark.asyncio
async def test_pipeline_example(fake_scenario: FakeScenario, tmp_path: Path):
    """Test the two version example with two matchers."""
    for name in ("pipeline.yaml", "o1_v1.obo", "o1_v2.obo", "o2_v1.obo", "o2_v2.obo"):
        shutil.copy(fake_scenario.fixture_path(name), tmp_path / name)

    manifest = await _run(tmp_path / "pipeline.yaml")

    assert manifest.scenario == "example"
    assert len(manifest.artifacts) == 16
    assert manifest.notices == ["insufficient history"]
    mapdiff = (tmp_path / "out/mapdiffs/name-0.6/mapdiff_1_2.tsv").read_text(encoding="utf-8")
    assert mapdiff.splitlines() == [
        "op\tleft_accession\tright_accession",
        "ADD\tb1\tb2",
        "ADD\tf1\tf2",
        "DEL\tb1\tc2",
        "DEL\td1\td2",
    ]


@pytest.mark.asyncio
async def test_manifest_hash_deterministic(fake_scenario: FakeScenario, tmp_path: Path):
    """Test identical inputs give identical manifests in different output trees."""
    config_path = _write_scenario(fake_scenario, tmp_path, 3, output="first")
    first = await _run(config_path)

    config = yaml.safe_load(config_path.read_text(encoding="utf-8"))
    config["output"] = "second"
    config_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    second = await _run(config_path)

    assert first.manifest_hash is not None
    assert first.manifest_hash == second.manifest_hash
    assert (tmp_path / "first" / MANIFEST_FILE).read_text(encoding="utf-8") == (
        tmp_path / "second" / MANIFEST_FILE
    ).read_text(encoding="utf-8")


@pytest.mark.asyncio
async def test_pipeline_failure(fake_scenario: FakeScenario, tmp_path: Path):
    """Test a malformed version fails the parse stage and still writes a manifest."""
    config_path = _write_scenario(fake_scenario, tmp_path, 3)
    (tmp_path / "right_2.obo").write_text("[Term\nid: S:1\n", encoding="utf-8")

    with pytest.raises(PyOntoEvolutionStageError) as err:
        await _run(config_path)

    assert err.value.stage == "parse"
    assert err.value.source.endswith("right_2.obo")
    stored = read_json(tmp_path / "out" / MANIFEST_FILE)
    assert stored["status"] == "FAILED"
    assert stored["failed_stage"] == "parse"
    assert stored["artifacts"] == []
    assert "right_2.obo" in stored["error"]


@pytest.mark.asyncio
async def test_pipeline_unexpected_error(
    fake_scenario: FakeScenario, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
):
    """Test an unexpected exception in a stage still marks the manifest failed."""
    config_path = _write_scenario(fake_scenario, tmp_path, 3)

    def broken_match(*args, **kwargs):
        raise RuntimeError("worker died")

    monkeypatch.setattr(pipeline, "match", broken_match)

    with pytest.raises(PyOntoEvolutionStageError) as err:
        await _run(config_path)

    assert err.value.stage == "match"
    assert isinstance(err.value.cause, RuntimeError)
    assert exit_code_for(err.value) == EXIT_INTERNAL
    stored = read_json(tmp_path / "out" / MANIFEST_FILE)
    assert stored["status"] == "FAILED"
    assert stored["failed_stage"] == "match"
    assert "worker died" in stored["error"]
    # Diffs of the finished stage are kept
    assert len(stored["artifacts"]) == 4
