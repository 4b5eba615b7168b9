"""Ontology versions: OBO subset parser, serializer and accessors."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
import logging
from pathlib import Path
import re

from .const import (
    OBO_FORMAT_VERSION,
    OBO_HEADER_DATE,
    OBO_HEADER_ONTOLOGY,
    OBO_TAG_CONSIDER,
    OBO_TAG_DEF,
    OBO_TAG_ID,
    OBO_TAG_IS_A,
    OBO_TAG_IS_OBSOLETE,
    OBO_TAG_NAME,
    OBO_TAG_RELATIONSHIP,
    OBO_TAG_REPLACED_BY,
    OBO_TAG_SYNONYM,
    OBO_TERM_STANZA,
    REL_IS_A,
)
from .exceptions import (
    PyOntoEvolutionDataError,
    PyOntoEvolutionDuplicateAccessionError,
    PyOntoEvolutionOboSyntaxError,
)
from .models import Concept, OntologyVersion, Relationship

_LOGGER = logging.getLogger(__name__)

QUOTED_VALUE = re.compile(r'^"((?:[^"\\]|\\.)*)"(.*)$')
ESCAPED_CHAR = re.compile(r"\\(.)")
STANZA_HEADER = re.compile(r"^\[([^\[\]]+)\]$")


def _unescape(value: str) -> str:
    return ESCAPED_CHAR.sub(r"\1", value)


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def _strip_comment(value: str) -> str:
    """Remove a trailing '! comment' and '{qualifiers}' from reference values."""
    value = value.split("!", 1)[0]
    value = value.split("{", 1)[0]
    return value.strip()


@dataclass
class _TermStanza:
    """Tag values collected for one [Term] stanza."""

    line: int
    accession: str | None = None
    name: str | None = None
    definition: str | None = None
    synonyms: list[str] = field(default_factory=list)
    obsolete: bool = False
    replaced_by: list[str] = field(default_factory=list)
    consider: list[str] = field(default_factory=list)
    # (kind, target, line)
    relationships: list[tuple[str, str, int]] = field(default_factory=list)


class OboParser:
    """Parser for the supported OBO 1.2 subset."""

    logger: logging.Logger = logging.getLogger(__name__)

    def __init__(
        self,
        text: str,
        ontology_id: str | None = None,
        version: int = 1,
        release_date: str | None = None,
    ) -> None:
        """Initialize OboParser."""
        self._text = text
        self._ontology_id = ontology_id
        self._version = version
        self._release_date = release_date
        self._header: dict[str, str] = {}
        self._stanzas: list[_TermStanza] = []
        # Ignored stanza types and tags with their number of occurrences
        self.warnings: Counter[str] = Counter()

    def parse(self) -> OntologyVersion:
        """Parse text into a validated OntologyVersion."""
        current: _TermStanza | None = None
        in_header = True
        skipping = False

        for number, raw_line in enumerate(self._text.splitlines(), start=1):
            line = raw_line.strip()
            if not line or line.startswith("!"):
                continue

            if line.startswith("["):
                match = STANZA_HEADER.match(line)
                if match is None:
                    msg = f"Malformed stanza header {line!r}"
                    raise PyOntoEvolutionOboSyntaxError(msg, number)
                self._close(current)
                in_header = False
                stanza = match.group(1).strip()
                if stanza == OBO_TERM_STANZA:
                    current = _TermStanza(line=number)
                    skipping = False
                else:
                    current = None
                    skipping = True
                    self.warnings[f"stanza:{stanza}"] += 1
                continue

            if ":" not in line:
                msg = f"Expected 'tag: value', got {line!r}"
                raise PyOntoEvolutionOboSyntaxError(msg, number)
            tag, value = (part.strip() for part in line.split(":", 1))

            if in_header:
                self._header.setdefault(tag, value)
            elif not skipping and current is not None:
                self._read_tag(current, tag, value, number)

        self._close(current)

        return self._build()

    def _read_tag(self, stanza: _TermStanza, tag: str, value: str, line: int) -> None:
        if tag == OBO_TAG_ID:
            if stanza.accession is not None:
                msg = f"Second id tag in stanza starting at line {stanza.line}"
                raise PyOntoEvolutionOboSyntaxError(msg, line)
            stanza.accession = _strip_comment(value)
        elif tag == OBO_TAG_NAME:
            if stanza.name is not None:
                msg = "Second name tag in stanza"
                raise PyOntoEvolutionOboSyntaxError(msg, line)
            stanza.name = value
        elif tag == OBO_TAG_SYNONYM:
            text = self._quoted(value, line)
            if text.strip():
                stanza.synonyms.append(text)
        elif tag == OBO_TAG_DEF:
            if stanza.definition is not None:
                msg = "Second def tag in stanza"
                raise PyOntoEvolutionOboSyntaxError(msg, line)
            stanza.definition = self._quoted(value, line)
        elif tag == OBO_TAG_IS_A:
            target = _strip_comment(value)
            if not target:
                msg = "Empty is_a target"
                raise PyOntoEvolutionOboSyntaxError(msg, line)
            stanza.relationships.append((REL_IS_A, target, line))
        elif tag == OBO_TAG_RELATIONSHIP:
            parts = _strip_comment(value).split()
            if len(parts) != 2:
                msg = f"Expected 'relationship: <type> <target>', got {value!r}"
                raise PyOntoEvolutionOboSyntaxError(msg, line)
            stanza.relationships.append((parts[0], parts[1], line))
        elif tag == OBO_TAG_IS_OBSOLETE:
            stanza.obsolete = value.lower() == "true"
        elif tag == OBO_TAG_REPLACED_BY:
            stanza.replaced_by.append(_strip_comment(value))
        elif tag == OBO_TAG_CONSIDER:
            stanza.consider.append(_strip_comment(value))
        else:
            self.warnings[f"tag:{tag}"] += 1

    @staticmethod
    def _quoted(value: str, line: int) -> str:
        match = QUOTED_VALUE.match(value)
        if match is None:
            msg = f"Expected a quoted string, got {value!r}"
            raise PyOntoEvolutionOboSyntaxError(msg, line)
        return _unescape(match.group(1))

    def _close(self, stanza: _TermStanza | None) -> None:
        if stanza is None:
            return
        if not stanza.accession:
            msg = "Term stanza without id"
            raise PyOntoEvolutionOboSyntaxError(msg, stanza.line)
        self._stanzas.append(stanza)

    def _build(self) -> OntologyVersion:
        concepts: dict[str, Concept] = {}
        relationships: list[Relationship] = []

        for stanza in self._stanzas:
            accession = stanza.accession or ""
            if accession in concepts:
                msg = f"Duplicate accession {accession} at line {stanza.line}"
                raise PyOntoEvolutionDuplicateAccessionError(msg)
            concepts[accession] = Concept(
                accession=accession,
                name=(stanza.name or "").strip(),
                synonyms=stanza.synonyms,
                definition=stanza.definition,
                obsolete=stanza.obsolete,
                replaced_by=stanza.replaced_by,
                consider=stanza.consider,
            )
            relationships.extend(
                Relationship(source=accession, target=target, kind=kind)
                for kind, target, _ in stanza.relationships
            )

        ontology = OntologyVersion(
            ontology_id=self._ontology_id
            or self._header.get(OBO_HEADER_ONTOLOGY)
            or "unknown",
            version=self._version,
            release_date=self._release_date or self._header.get(OBO_HEADER_DATE),
            concepts=concepts,
            relationships=relationships,
        )
        ontology.validate()

        if self.warnings:
            self.logger.warning(
                "Ignored while parsing %s v%s: %s",
                ontology.ontology_id,
                ontology.version,
                ", ".join(f"{key} x{count}" for key, count in sorted(self.warnings.items())),
            )

        return ontology


def parse_ontology(
    text: str,
    ontology_id: str | None = None,
    version: int = 1,
    release_date: str | None = None,
) -> OntologyVersion:
    """Parse OBO text into an OntologyVersion."""
    return OboParser(
        text, ontology_id=ontology_id, version=version, release_date=release_date
    ).parse()


def load_ontology(
    path: str | Path,
    version: int = 1,
    ontology_id: str | None = None,
) -> OntologyVersion:
    """Read and parse an OBO file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as ex:
        msg = f"Unable to read {path}: {ex}"
        raise PyOntoEvolutionDataError(msg) from ex

    _LOGGER.debug("Parsing %s as version %d", path, version)
    return parse_ontology(text, ontology_id=ontology_id, version=version)


def serialize_ontology(ontology: OntologyVersion) -> str:
    """Serialize an OntologyVersion as OBO text."""
    lines = [
        f"format-version: {OBO_FORMAT_VERSION}",
        f"{OBO_HEADER_ONTOLOGY}: {ontology.ontology_id}",
    ]
    if ontology.release_date:
        lines.append(f"{OBO_HEADER_DATE}: {ontology.release_date}")

    for accession in sorted(ontology.concepts):
        concept = ontology.concepts[accession]
        lines.extend(["", f"[{OBO_TERM_STANZA}]", f"{OBO_TAG_ID}: {accession}"])
        if concept.name:
            lines.append(f"{OBO_TAG_NAME}: {concept.name}")
        if concept.definition is not None:
            lines.append(f'{OBO_TAG_DEF}: "{_escape(concept.definition)}" []')
        lines.extend(
            f'{OBO_TAG_SYNONYM}: "{_escape(synonym)}" EXACT []'
            for synonym in concept.synonyms
        )
        for rel in ontology.outgoing(accession):
            if rel.kind == REL_IS_A:
                lines.append(f"{OBO_TAG_IS_A}: {rel.target}")
            else:
                lines.append(f"{OBO_TAG_RELATIONSHIP}: {rel.kind} {rel.target}")
        if concept.obsolete:
            lines.append(f"{OBO_TAG_IS_OBSOLETE}: true")
        lines.extend(f"{OBO_TAG_REPLACED_BY}: {item}" for item in concept.replaced_by)
        lines.extend(f"{OBO_TAG_CONSIDER}: {item}" for item in concept.consider)

    return "\n".join(lines) + "\n"


def get_concept(ontology: OntologyVersion, accession: str) -> Concept | None:
    """Return the concept or None, never raising on unknown accessions."""
    return ontology.get_concept(accession)


def parents_of(ontology: OntologyVersion, accession: str) -> list[str]:
    """Return is_a/part_of parents of accession, sorted."""
    return ontology.parents_of(accession)


def children_of(ontology: OntologyVersion, accession: str) -> list[str]:
    """Return is_a/part_of children of accession, sorted."""
    return ontology.children_of(accession)
