"""Constants for the pyontoevolution library."""

from typing import Final

# Matcher defaults
DEFAULT_THRESHOLD: Final = 0.6
DEFAULT_MAX_DELTA: Final = 0.02
DEFAULT_JOBS: Final = 1
# Left concepts handed to one worker at a time
MATCH_CHUNK_SIZE: Final = 512

# Trigram padding, two sentinels on each side
TRIGRAM_SIZE: Final = 3
TRIGRAM_PAD_START: Final = "\x02\x02"
TRIGRAM_PAD_END: Final = "\x03\x03"

# Prediction / backtest defaults
DEFAULT_TARGET_COUNT: Final = 5
DEFAULT_H_RANGE: Final = (2, 3, 4, 5)
WEIGHT_SUM_TOLERANCE: Final = 1e-12

# OBO subset
OBO_FORMAT_VERSION: Final = "1.2"
OBO_TERM_STANZA: Final = "Term"
OBO_TAG_ID: Final = "id"
OBO_TAG_NAME: Final = "name"
OBO_TAG_SYNONYM: Final = "synonym"
OBO_TAG_DEF: Final = "def"
OBO_TAG_IS_A: Final = "is_a"
OBO_TAG_RELATIONSHIP: Final = "relationship"
OBO_TAG_IS_OBSOLETE: Final = "is_obsolete"
OBO_TAG_REPLACED_BY: Final = "replaced_by"
OBO_TAG_CONSIDER: Final = "consider"
OBO_HEADER_ONTOLOGY: Final = "ontology"
OBO_HEADER_DATE: Final = "date"

# Relationship kinds
REL_IS_A: Final = "is_a"
REL_PART_OF: Final = "part_of"
# Only these kinds define parents and children
HIERARCHY_KINDS: Final = frozenset({REL_IS_A, REL_PART_OF})

# Concept attributes as named in change operations
ATTR_NAME: Final = "name"
ATTR_DEFINITION: Final = "definition"
ATTR_SYNONYM: Final = "synonym"
ATTR_REPLACED_BY: Final = "replaced_by"
ATTR_CONSIDER: Final = "consider"

# Impact matrix cells, ontology change x mapping change
ONTOLOGY_CHANGE_CLASSES: Final = ("ext", "red", "rev")
MAPPING_CHANGE_CLASSES: Final = ("add", "del")
IMPACT_CELL_KEYS: Final = (
    "ext_add",
    "red_add",
    "rev_add",
    "ext_del",
    "red_del",
    "rev_del",
)

# Output formats
FLOAT_FORMAT: Final = "{:.6f}"
RATIO_SUMMARY_FORMAT: Final = "{:.4f}"
MAPPING_TSV_HEADER: Final = ("left_accession", "right_accession", "confidence")
MAPPING_DIFF_TSV_HEADER: Final = ("op", "left_accession", "right_accession")
IMPACT_TSV_HEADER: Final = (
    "ontology_change",
    "mapping_change",
    "impacted_count",
    "total_changed_concepts",
    "ratio",
)
SERIES_TSV_HEADER: Final = (
    "transition",
    "ocr_left",
    "ocr_right",
    "ocr_combined",
    "add",
    "del",
    "mcr",
    "mapping_size",
)
REPORT_TSV_HEADER: Final = (
    "scenario",
    "matcher",
    "method",
    "h",
    "target",
    "CR_add",
    "PR_add",
    "CR_del",
    "PR_del",
    "err_add",
    "err_del",
)
SUMMARY_TSV_HEADER: Final = ("method", "h", "targets", "err_sum", "avg_err_sum")
REPORT_FORMATS: Final = ("tsv", "summary", "json")
UNDEFINED_VALUE: Final = "NA"

# Pipeline
MANIFEST_FILE: Final = "manifest.json"
MANIFEST_STATUS_OK: Final = "OK"
MANIFEST_STATUS_FAILED: Final = "FAILED"
NOTICE_INSUFFICIENT_HISTORY: Final = "insufficient history"
LEFT_SIDE: Final = "left"
RIGHT_SIDE: Final = "right"

# CLI exit codes
EXIT_OK: Final = 0
EXIT_USAGE: Final = 1
EXIT_DATA: Final = 2
EXIT_INTERNAL: Final = 3

LOG_FORMAT: Final = (
    "[%(asctime)s] %(levelname)s [%(name)s.%(funcName)s:%(lineno)d] %(message)s"
)
LOG_DATE_FORMAT: Final = "%d/%b/%Y %H:%M:%S"
