"""Trigram based matchers producing ontology mappings."""

from __future__ import annotations

from collections import Counter, defaultdict
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging
import math
import time

from .const import (
    DEFAULT_JOBS,
    MATCH_CHUNK_SIZE,
    TRIGRAM_PAD_END,
    TRIGRAM_PAD_START,
    TRIGRAM_SIZE,
)
from .models import (
    Concept,
    Correspondence,
    Mapping,
    MatcherConfig,
    MatchStrategy,
    OntologyVersion,
)

_LOGGER = logging.getLogger(__name__)

Token = tuple[str, int]


def normalize(text: str) -> str:
    """Lowercase, trim and collapse whitespace runs."""
    return " ".join(text.lower().split())


def trigrams(text: str) -> Counter[str]:
    """Return the padded trigram multiset of the normalized text."""
    normalized = normalize(text)
    if not normalized:
        return Counter()
    padded = f"{TRIGRAM_PAD_START}{normalized}{TRIGRAM_PAD_END}"
    return Counter(
        padded[pos : pos + TRIGRAM_SIZE]
        for pos in range(len(padded) - TRIGRAM_SIZE + 1)
    )


def trigram_tokens(text: str) -> frozenset[Token]:
    """Return trigrams numbered by occurrence, so set overlap equals multiset overlap."""
    return frozenset(
        (gram, occurrence)
        for gram, count in trigrams(text).items()
        for occurrence in range(count)
    )


def _dice(shared: int, size1: int, size2: int) -> float:
    return 2.0 * shared / (size1 + size2)


def trigram_similarity(text1: str, text2: str) -> float:
    """Return the Dice coefficient over padded trigram multisets."""
    grams1, grams2 = trigrams(text1), trigrams(text2)
    size1, size2 = sum(grams1.values()), sum(grams2.values())
    if size1 == 0 and size2 == 0:
        return 1.0
    if size1 == 0 or size2 == 0:
        return 0.0

    return _dice(sum((grams1 & grams2).values()), size1, size2)


def profile_strings(
    concept: Concept,
    strategy: MatchStrategy,
    version: OntologyVersion | None = None,
) -> list[str]:
    """Return the strings a strategy compares for one concept."""
    if strategy == MatchStrategy.NAME:
        strings = [concept.name]
    elif strategy == MatchStrategy.NAMESYN:
        strings = concept.labels
    else:
        parents: list[str] = []
        children: list[str] = []
        if version is not None and concept.accession in version.concepts:
            parents = sorted(
                version.concepts[acc].name
                for acc in version.parents_of(concept.accession)
            )
            children = sorted(
                version.concepts[acc].name
                for acc in version.children_of(concept.accession)
            )
        strings = [" ".join(part for part in [*parents, concept.name, *children] if part)]

    return [text for text in strings if normalize(text)]


def concept_similarity(
    concept1: Concept,
    concept2: Concept,
    strategy: MatchStrategy,
    version1: OntologyVersion | None = None,
    version2: OntologyVersion | None = None,
) -> float:
    """Return the best similarity over the strings a strategy compares."""
    if strategy == MatchStrategy.NAME:
        return trigram_similarity(concept1.name, concept2.name)

    strings1 = profile_strings(concept1, strategy, version1)
    strings2 = profile_strings(concept2, strategy, version2)

    return max(
        (trigram_similarity(text1, text2) for text1 in strings1 for text2 in strings2),
        default=0.0,
    )


@dataclass(frozen=True)
class IndexedString:
    """Object holding one profile string of an indexed concept."""

    accession: str
    tokens: frozenset[Token]


class TrigramIndex:
    """Inverted index from trigram tokens to profile strings."""

    def __init__(self, strategy: MatchStrategy) -> None:
        """Initialize TrigramIndex."""
        self.strategy = strategy
        self.strings: list[IndexedString] = []
        self.postings: dict[Token, list[int]] = defaultdict(list)

    def __len__(self) -> int:
        """Return number of indexed strings."""
        return len(self.strings)

    def add(self, accession: str, text: str) -> None:
        """Index one profile string."""
        tokens = trigram_tokens(text)
        if not tokens:
            return
        string_id = len(self.strings)
        self.strings.append(IndexedString(accession, tokens))
        for token in tokens:
            self.postings[token].append(string_id)

    def candidates(self, tokens: frozenset[Token], threshold: float) -> set[int]:
        """Return ids of strings that may reach threshold against tokens.

        A string B with Dice(A, B) >= t shares at least t*|A|/(2-t) tokens with A,
        so one of the |A| - that + 1 rarest tokens of A is in B.
        """
        size = len(tokens)
        min_overlap = max(1, math.ceil(threshold * size / (2.0 - threshold) - 1e-9))
        ordered = sorted(tokens, key=lambda token: (len(self.postings.get(token, ())), token))
        result: set[int] = set()
        for token in ordered[: size - min_overlap + 1]:
            result.update(self.postings.get(token, ()))
        return result


def build_trigram_index(
    version: OntologyVersion, strategy: MatchStrategy | str
) -> TrigramIndex:
    """Index the strings a strategy consults for every non-obsolete concept."""
    strategy = MatchStrategy(strategy)
    index = TrigramIndex(strategy)
    for accession in sorted(version.concepts):
        concept = version.concepts[accession]
        if concept.obsolete:
            continue
        for text in profile_strings(concept, strategy, version):
            index.add(accession, text)

    _LOGGER.debug(
        "Indexed %d strings with %d distinct tokens for %s v%d",
        len(index),
        len(index.postings),
        version.ontology_id,
        version.version,
    )
    return index


def _profiles(
    version: OntologyVersion, strategy: MatchStrategy
) -> list[tuple[str, list[frozenset[Token]]]]:
    profiles = []
    for accession in sorted(version.concepts):
        concept = version.concepts[accession]
        if concept.obsolete:
            continue
        tokens = [trigram_tokens(text) for text in profile_strings(concept, strategy, version)]
        profiles.append((accession, tokens))
    return profiles


def _score_chunk(
    chunk: list[tuple[str, list[frozenset[Token]]]],
    index: TrigramIndex,
    threshold: float,
) -> dict[tuple[str, str], float]:
    scores: dict[tuple[str, str], float] = {}
    for accession, token_sets in chunk:
        for tokens in token_sets:
            for string_id in index.candidates(tokens, threshold):
                entry = index.strings[string_id]
                similarity = _dice(
                    len(tokens & entry.tokens), len(tokens), len(entry.tokens)
                )
                if similarity < threshold:
                    continue
                pair = (accession, entry.accession)
                if similarity > scores.get(pair, -1.0):
                    scores[pair] = similarity
    return scores


# Worker process state, set once by _init_worker
_WORKER_STATE: dict[str, object] = {}


def _init_worker(index: TrigramIndex, threshold: float) -> None:
    _WORKER_STATE["index"] = index
    _WORKER_STATE["threshold"] = threshold


def _score_chunk_in_worker(
    chunk: list[tuple[str, list[frozenset[Token]]]]
) -> dict[tuple[str, str], float]:
    index = _WORKER_STATE["index"]
    threshold = _WORKER_STATE["threshold"]
    assert isinstance(index, TrigramIndex)
    assert isinstance(threshold, float)
    return _score_chunk(chunk, index, threshold)


def select_max_delta(
    scores: dict[tuple[str, str], float], max_delta: float
) -> list[Correspondence]:
    """Keep pairs within max_delta of the best score of either of their concepts."""
    best_left: dict[str, float] = {}
    best_right: dict[str, float] = {}
    for (left, right), confidence in scores.items():
        best_left[left] = max(best_left.get(left, confidence), confidence)
        best_right[right] = max(best_right.get(right, confidence), confidence)

    return sorted(
        Correspondence(left, right, confidence)
        for (left, right), confidence in scores.items()
        if confidence >= best_left[left] - max_delta
        or confidence >= best_right[right] - max_delta
    )


def _mapping(
    left: OntologyVersion,
    right: OntologyVersion,
    config: MatcherConfig,
    correspondences: Iterable[Correspondence],
) -> Mapping:
    return Mapping(
        left_ontology=left.ontology_id,
        right_ontology=right.ontology_id,
        left_version=left.version,
        right_version=right.version,
        config=config,
        correspondences=list(correspondences),
    )


def match_exhaustive(
    left: OntologyVersion, right: OntologyVersion, config: MatcherConfig
) -> Mapping:
    """Score every pair of non-obsolete concepts."""
    right_profiles = _profiles(right, config.strategy)
    scores: dict[tuple[str, str], float] = {}
    for accession, token_sets in _profiles(left, config.strategy):
        for other, other_sets in right_profiles:
            similarity = max(
                (
                    _dice(len(tokens & other_tokens), len(tokens), len(other_tokens))
                    for tokens in token_sets
                    for other_tokens in other_sets
                ),
                default=0.0,
            )
            if similarity >= config.threshold:
                scores[(accession, other)] = similarity

    return _mapping(left, right, config, select_max_delta(scores, config.max_delta))


def match(
    left: OntologyVersion,
    right: OntologyVersion,
    config: MatcherConfig | None = None,
    jobs: int = DEFAULT_JOBS,
) -> Mapping:
    """Compute the mapping between two same-numbered ontology versions."""
    config = config or MatcherConfig()
    start = time.perf_counter()

    if config.threshold <= 0.0:
        # Every pair qualifies, nothing to prune
        mapping = match_exhaustive(left, right, config)
    else:
        index = build_trigram_index(right, config.strategy)
        profiles = _profiles(left, config.strategy)
        chunks = [
            profiles[pos : pos + MATCH_CHUNK_SIZE]
            for pos in range(0, len(profiles), MATCH_CHUNK_SIZE)
        ]

        scores: dict[tuple[str, str], float] = {}
        if jobs > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(
                max_workers=jobs,
                initializer=_init_worker,
                initargs=(index, float(config.threshold)),
            ) as executor:
                for part in executor.map(_score_chunk_in_worker, chunks):
                    scores.update(part)
        else:
            for chunk in chunks:
                scores.update(_score_chunk(chunk, index, config.threshold))

        mapping = _mapping(left, right, config, select_max_delta(scores, config.max_delta))

    elapsed = time.perf_counter() - start
    concepts = len(left.concepts) + len(right.concepts)
    _LOGGER.info(
        "Matched %s v%d with %s v%d using %s: %d correspondences, %d concepts/s",
        left.ontology_id,
        left.version,
        right.ontology_id,
        right.version,
        config.label,
        len(mapping),
        int(concepts / elapsed) if elapsed > 0 else concepts,
    )
    return mapping
