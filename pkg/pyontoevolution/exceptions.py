"""Module for pyontoevolution Exceptions."""

from __future__ import annotations


class PyOntoEvolutionError(Exception):
    """Generic PyOntoEvolution exception."""


class PyOntoEvolutionDataError(PyOntoEvolutionError):
    """PyOntoEvolution input data exception."""


class PyOntoEvolutionOboSyntaxError(PyOntoEvolutionDataError):
    """PyOntoEvolution OBO syntax exception."""

    def __init__(self, msg: str, line: int) -> None:
        """Initialize with the offending line number."""
        super().__init__(f"line {line}: {msg}")
        self.line = line


class PyOntoEvolutionValidationError(PyOntoEvolutionDataError):
    """PyOntoEvolution ontology validation exception."""


class PyOntoEvolutionDuplicateAccessionError(PyOntoEvolutionValidationError):
    """PyOntoEvolution duplicate accession exception."""


class PyOntoEvolutionDanglingRelationshipError(PyOntoEvolutionValidationError):
    """PyOntoEvolution dangling relationship endpoint exception."""

    def __init__(self, source: str, target: str) -> None:
        """Initialize with both relationship endpoints."""
        super().__init__(
            f"Relationship {source} -> {target} references a missing concept"
        )
        self.source = source
        self.target = target


class PyOntoEvolutionUnknownAccessionError(PyOntoEvolutionDataError):
    """PyOntoEvolution unknown accession exception."""


class PyOntoEvolutionOntologyMismatchError(PyOntoEvolutionDataError):
    """PyOntoEvolution exception for versions of different ontologies."""


class PyOntoEvolutionApplyDiffError(PyOntoEvolutionDataError):
    """PyOntoEvolution exception on applying change operations."""


class PyOntoEvolutionMappingMismatchError(PyOntoEvolutionDataError):
    """PyOntoEvolution exception for incomparable mappings."""


class PyOntoEvolutionPredictionError(PyOntoEvolutionDataError):
    """PyOntoEvolution prediction input exception."""


class PyOntoEvolutionInsufficientHistoryError(PyOntoEvolutionPredictionError):
    """PyOntoEvolution not enough versions exception."""


class PyOntoEvolutionReportFormatError(PyOntoEvolutionError):
    """PyOntoEvolution unknown report format exception."""


class PyOntoEvolutionConfigError(PyOntoEvolutionError):
    """PyOntoEvolution configuration exception."""


class PyOntoEvolutionStageError(PyOntoEvolutionError):
    """PyOntoEvolution pipeline stage failure exception."""

    def __init__(self, stage: str, source: str, cause: BaseException) -> None:
        """Initialize with stage name and failing input."""
        super().__init__(f"Stage '{stage}' failed for {source}: {cause}")
        self.stage = stage
        self.source = source
        self.cause = cause
