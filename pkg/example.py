# pylint: skip-file
"""Demo file for testing."""
import asyncio
import logging
import sys

from pyontoevolution import OntologyEvolutionPipeline, compute_diff, match, predict
from pyontoevolution.evolution import mapping_change_ratio, mapping_diff
from pyontoevolution.exceptions import PyOntoEvolutionError
from pyontoevolution.models import PredictionMethod
from pyontoevolution.ontology import load_ontology
from pyontoevolution.pipeline import load_pipeline_config

logging.basicConfig(
    level=logging.DEBUG,
    format="[%(asctime)s] %(levelname)s [%(name)s.%(funcName)s:%(lineno)d] %(message)s",
    datefmt="%d/%b/%Y %H:%M:%S",
)
_LOGGER = logging.getLogger(__name__)

FIXTURES = "tests/fixtures"


class OntologyEvolutionDemo:
    def compare_versions(self):
        """Diff and match the two example versions."""
        o1_old = load_ontology(f"{FIXTURES}/o1_v1.obo", version=1)
        o1_new = load_ontology(f"{FIXTURES}/o1_v2.obo", version=2)
        o2_old = load_ontology(f"{FIXTURES}/o2_v1.obo", version=1)
        o2_new = load_ontology(f"{FIXTURES}/o2_v2.obo", version=2)

        diff = compute_diff(o2_old, o2_new)
        for op in diff.ops:
            print(f"{op.kind.value}: {', '.join(op.subjects)}")

        md = mapping_diff(match(o1_old, o2_old), match(o1_new, o2_new))
        print(f"Add: {md.add_set}")
        print(f"Del: {md.del_set}")
        print(f"MCR: {mapping_change_ratio(md):.4f}")

    async def run_pipeline(self, config_file: str):
        """Run all stages of a YAML config."""
        try:
            config = load_pipeline_config(config_file)
            async with OntologyEvolutionPipeline(config, jobs=2) as pipeline:
                pipeline.logger = _LOGGER
                manifest = await pipeline.run()
        except PyOntoEvolutionError as ex:
            _LOGGER.error(ex)
            return

        _LOGGER.info("Pipeline %s: %d artifacts", manifest.status, len(manifest.artifacts))
        for notice in manifest.notices:
            _LOGGER.warning(notice)

        for entry in manifest.artifacts_of("series_json"):
            _LOGGER.debug("Series written to %s/%s", config.output, entry.path)


demo = OntologyEvolutionDemo()
demo.compare_versions()
if len(sys.argv) > 1:
    asyncio.run(demo.run_pipeline(sys.argv[1]))
else:
    # Next version prediction from a hand made history
    from tests.conftest import FakeScenario

    history = FakeScenario().worked_history()
    for method in PredictionMethod:
        prediction = predict(history, method)
        print(f"{method.value}: Add={prediction.add_rounded} Del={prediction.del_rounded}")
