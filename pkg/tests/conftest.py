"""Conftest for pyontoevolution."""
from __future__ import annotations

from dataclasses import dataclass, replace
import os.path
import random
import string

import pytest

from pyontoevolution.const import REL_IS_A, REL_PART_OF
from pyontoevolution.models import (
    Concept,
    CurrentChanges,
    EvolutionHistory,
    EvolutionSeries,
    OntologyVersion,
    Relationship,
    TransitionRecord,
)
from pyontoevolution.ontology import load_ontology

DIR_NAME = os.path.dirname(__file__)

WORDS = (
    "heart",
    "lung",
    "bone",
    "renal",
    "cortex",
    "muscle",
    "nerve",
    "vessel",
    "tissue",
    "gland",
    "duct",
    "cell",
    "membrane",
    "valve",
    "lobe",
    "fiber",
    "artery",
    "vein",
)
REL_DEVELOPS_FROM = "develops_from"


def _accession(prefix: str, number: int) -> str:
    return f"{prefix}:{number:07d}"


def _number(accession: str) -> int:
    return int(accession.split(":", 1)[1])


def _name(rng: random.Random) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))


def _invented_name(rng: random.Random) -> str:
    return " ".join(
        "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(4, 9)))
        for _ in range(2)
    )


def _hierarchy_parent(version: OntologyVersion, accession: str) -> Relationship | None:
    for rel in version.outgoing(accession):
        if rel.hierarchical:
            return rel
    return None


@dataclass
class FakeScenario:
    """Class for fake ontology evolution scenarios."""

    prefix: str = "R"

    def fixture_path(self, name: str) -> str:
        """Path of a file below tests/fixtures."""
        return f"{DIR_NAME}/fixtures/{name}"

    def fixture_text(self, name: str) -> str:
        """Content of a file below tests/fixtures."""
        with open(self.fixture_path(name), encoding="utf-8") as file:
            data = file.read()

        return data

    def version(self, name: str, version: int = 1) -> OntologyVersion:
        """Fixture ontology parsed from tests/fixtures/<name>.obo."""
        return load_ontology(self.fixture_path(f"{name}.obo"), version=version)

    def o1(self) -> tuple[OntologyVersion, OntologyVersion]:
        """Both versions of the first example ontology."""
        return self.version("o1_v1", 1), self.version("o1_v2", 2)

    def o2(self) -> tuple[OntologyVersion, OntologyVersion]:
        """Both versions of the second example ontology."""
        return self.version("o2_v1", 1), self.version("o2_v2", 2)

    def complex_pair(self) -> tuple[OntologyVersion, OntologyVersion]:
        """Versions containing every kind of complex change."""
        return self.version("complex_v1", 1), self.version("complex_v2", 2)

    def random_ontology(
        self,
        seed: int,
        size: int = 40,
        ontology_id: str = "random",
        version: int = 1,
        invented_names: bool = False,
    ) -> OntologyVersion:
        """Random single-parent tree with a few obsolete concepts.

        Every relationship points from a higher to a lower accession number.
        """
        rng = random.Random(seed)
        concepts: dict[str, Concept] = {}
        relationships: list[Relationship] = []

        for number in range(size):
            accession = _accession(self.prefix, number)
            concepts[accession] = Concept(
                accession=accession,
                name=_invented_name(rng) if invented_names else _name(rng),
                synonyms=[_name(rng)] if rng.random() < 0.3 else [],
                definition=f"definition {number}" if rng.random() < 0.3 else None,
                obsolete=number > 0 and rng.random() < 0.05,
            )
            if number == 0:
                continue
            parent = _accession(self.prefix, rng.randrange(number))
            kind = REL_PART_OF if rng.random() < 0.2 else REL_IS_A
            relationships.append(Relationship(accession, parent, kind))
            if number > 1 and rng.random() < 0.1:
                other = _accession(self.prefix, rng.randrange(number))
                relationships.append(Relationship(accession, other, REL_DEVELOPS_FROM))

        return OntologyVersion(
            ontology_id=ontology_id,
            version=version,
            concepts=concepts,
            relationships=relationships,
        )

    def relabel(
        self, version: OntologyVersion, prefix: str, ontology_id: str
    ) -> OntologyVersion:
        """Copy of version with accessions moved to another prefix."""

        def move(accession: str) -> str:
            return _accession(prefix, _number(accession))

        return OntologyVersion(
            ontology_id=ontology_id,
            version=version.version,
            release_date=version.release_date,
            concepts={
                move(acc): replace(concept, accession=move(acc))
                for acc, concept in version.concepts.items()
            },
            relationships=[
                Relationship(move(rel.source), move(rel.target), rel.kind)
                for rel in version.relationships
            ],
        )

    def rename(self, version: OntologyVersion, seed: int, share: float) -> OntologyVersion:
        """Copy of version with about share of the names replaced by invented ones."""
        rng = random.Random(seed)
        concepts = {}
        for accession in sorted(version.concepts):
            concept = version.concepts[accession]
            if rng.random() < share:
                concept = replace(concept, name=_invented_name(rng))
            concepts[accession] = concept

        return replace(version, concepts=concepts)

    def evolve(self, old: OntologyVersion, seed: int) -> OntologyVersion:
        """Next version containing merges, a split, a substitute, a move, subgraphs and edits."""
        rng = random.Random(seed)
        prefix = next(iter(old.concepts)).split(":", 1)[0]
        ordered = sorted(old.concepts)
        root = ordered[0]
        next_number = _number(ordered[-1]) + 1

        def descendants(accession: str) -> set[str]:
            found = {accession}
            for child in old.children_of(accession):
                found |= descendants(child)
            return found

        # Detached subtree of 2 to 4 concepts
        subtree: set[str] = set()
        subtree_parent = None
        for accession in rng.sample(ordered[1:], len(ordered) - 1):
            members = descendants(accession)
            if 2 <= len(members) <= 4:
                subtree = members
                parent = _hierarchy_parent(old, accession)
                subtree_parent = parent.target if parent else None
                break

        leaves = [
            acc
            for acc in ordered[1:]
            if not old.children_of(acc) and acc not in subtree
        ]
        rng.shuffle(leaves)
        merged, synonym_merged, split_source, substituted, dropped = (
            leaves[:5] + [None] * 5
        )[:5]
        deleted = subtree | {
            acc for acc in (merged, synonym_merged, split_source, substituted, dropped) if acc
        }
        survivors = [acc for acc in ordered if acc not in deleted]

        concepts = {acc: old.concepts[acc] for acc in survivors}
        relationships = {
            rel
            for rel in old.relationships
            if rel.source not in deleted and rel.target not in deleted
        }

        def pick(candidates: list[str]) -> str:
            return rng.choice(candidates)

        if merged:
            target = pick(survivors)
            concepts[target] = replace(
                concepts[target], replaced_by=[*concepts[target].replaced_by, merged]
            )
        if synonym_merged:
            target = pick(survivors)
            concepts[target] = replace(
                concepts[target],
                synonyms=[*concepts[target].synonyms, old.concepts[synonym_merged].name],
            )

        def add_concept(parent: str, replaced: str | None = None) -> str:
            nonlocal next_number
            accession = _accession(prefix, next_number)
            next_number += 1
            concepts[accession] = Concept(
                accession=accession,
                name=_name(rng),
                replaced_by=[replaced] if replaced else [],
            )
            relationships.add(Relationship(accession, parent, REL_IS_A))
            return accession

        if split_source:
            add_concept(pick(survivors), split_source)
            add_concept(pick(survivors), split_source)
        if substituted:
            add_concept(pick(survivors), substituted)
        add_concept(pick(survivors))

        chain_parent = pick(survivors)
        for _ in range(rng.randint(2, 3)):
            chain_parent = add_concept(chain_parent)

        movable = [
            acc
            for acc in survivors
            if acc != root and acc != subtree_parent and _hierarchy_parent(old, acc)
        ]
        for accession in rng.sample(movable, min(2, len(movable))):
            current = _hierarchy_parent(old, accession)
            assert current is not None
            targets = [
                acc
                for acc in survivors
                if acc < accession and acc != current.target
            ]
            if not targets:
                continue
            relationships.discard(current)
            relationships.add(Relationship(accession, pick(targets), current.kind))

        for accession in survivors:
            concept = concepts[accession]
            if concept.obsolete and rng.random() < 0.5:
                concepts[accession] = replace(concept, obsolete=False)
                continue
            roll = rng.random()
            if roll < 0.1:
                concept = replace(concept, name=f"{concept.name} {rng.choice(WORDS)}")
            elif roll < 0.2:
                concept = replace(
                    concept,
                    synonyms=[*concept.synonyms, f"alt {rng.choice(WORDS)} {rng.randrange(1000)}"],
                )
            elif roll < 0.25 and concept.synonyms:
                concept = replace(concept, synonyms=concept.synonyms[1:])
            elif roll < 0.3:
                concept = replace(
                    concept,
                    definition=None if concept.definition else f"new definition {accession}",
                )
            elif roll < 0.35 and concept.definition:
                concept = replace(concept, definition=f"{concept.definition} revised")
            elif roll < 0.4:
                concept = replace(concept, obsolete=not concept.obsolete)
            elif roll < 0.45:
                concept = replace(concept, consider=[*concept.consider, pick(survivors)])
            concepts[accession] = concept

        return OntologyVersion(
            ontology_id=old.ontology_id,
            version=old.version + 1,
            concepts=concepts,
            relationships=list(relationships),
        )

    def evolution(self, seed: int, versions: int, size: int = 40) -> list[OntologyVersion]:
        """Series of versions, each evolved from its predecessor."""
        series = [self.random_ontology(seed, size=size)]
        for step in range(1, versions):
            series.append(self.evolve(series[-1], seed * 1000 + step))
        return series

    def worked_history(self) -> EvolutionHistory:
        """Two transitions followed by the changes of the transition to predict."""
        return EvolutionHistory(
            transitions=[
                TransitionRecord(
                    old_label=1,
                    new_label=2,
                    add_count=20,
                    del_count=6,
                    ext_count=60,
                    red_count=10,
                    rev_count=15,
                    impact_ratios={
                        "ext_add": 0.3,
                        "red_add": 0.1,
                        "rev_add": 0.2,
                        "ext_del": 0.05,
                        "red_del": 0.3,
                        "rev_del": 0.1,
                    },
                    mapping_size=200,
                ),
                TransitionRecord(
                    old_label=2,
                    new_label=3,
                    add_count=10,
                    del_count=4,
                    ext_count=30,
                    red_count=8,
                    rev_count=10,
                    impact_ratios={
                        "ext_add": 0.4,
                        "red_add": 0.0,
                        "rev_add": 0.1,
                        "ext_del": 0.0,
                        "red_del": 0.25,
                        "rev_del": 0.2,
                    },
                    mapping_size=206,
                ),
            ],
            current=CurrentChanges(ext_count=40, red_count=4, rev_count=12),
        )

    def synthetic_series(self) -> EvolutionSeries:
        """Eight versions with hand-picked mapping change counts."""
        adds = (10, 20, 30, 10, 20, 40, 10)
        dels = (2, 4, 2, 6, 0, 4, 8)
        sizes = (100, 110, 120, 125, 140, 170, 175)
        return EvolutionSeries(
            scenario="synthetic",
            matcher="name-0.6",
            transitions=[
                TransitionRecord(
                    old_label=pos + 1,
                    new_label=pos + 2,
                    add_count=add,
                    del_count=dele,
                    ext_count=add * 2,
                    red_count=dele,
                    rev_count=5,
                    mapping_size=size,
                )
                for pos, (add, dele, size) in enumerate(zip(adds, dels, sizes))
            ],
            initial_mapping_size=92,
        )

    def constant_series(
        self, versions: int, add: int = 10, dele: int = 2
    ) -> EvolutionSeries:
        """Series whose mapping changes never vary."""
        return EvolutionSeries(
            scenario="constant",
            matcher="name-0.6",
            transitions=[
                TransitionRecord(
                    old_label=pos,
                    new_label=pos + 1,
                    add_count=add,
                    del_count=dele,
                    ext_count=add,
                    red_count=dele,
                    rev_count=0,
                    impact_ratios={
                        "ext_add": 1.0,
                        "red_add": None,
                        "rev_add": None,
                        "ext_del": 0.0,
                        "red_del": 1.0,
                        "rev_del": None,
                    },
                    mapping_size=100 + pos * (add - dele),
                )
                for pos in range(1, versions)
            ],
            initial_mapping_size=100,
        )


@pytest.fixture
def fake_scenario():
    """Fixture for fake scenarios."""
    return FakeScenario()
