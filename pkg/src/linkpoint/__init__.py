"""Linkage-point discovery between RDF knowledge bases and single-record
web APIs: probing for valid input relations, instance-based path matching,
and evaluation against gold alignments."""

__version__ = "0.1.0"

from .alignment import (
    AlignmentEntry,
    AlignmentResult,
    CandidateMatchSet,
    MatchTriple,
    collect_candidates,
    finalize,
    match_record,
    record_overlap,
    run_alignment,
)
from .config import GlobalSettings, Registry, load_registry, load_settings
from .connector import ApiConnector, ApiEndpoint, ApiResponse, build_request_url
from .errors import (
    ConfigError,
    KbLoadError,
    LinkpointError,
    ProbeError,
    TransportError,
    UnknownRelationError,
    UnparseableResponseError,
)
from .harness import (
    GoldAlignment,
    SyntheticPair,
    SyntheticPairConfig,
    evaluate,
    generate_pair,
    standard_noise_config,
    zero_noise_config,
)
from .identifiers import IdentifierRelationSet, extract_identifier_relations
from .kb import (
    FORWARD,
    INVERSE,
    KnowledgeBase,
    Literal,
    RelationValuePath,
    Triple,
    load_kb,
)
from .probing import ProbeReport, detect_error_responses, probe
from .response import (
    GeneralizedPath,
    PathValuePair,
    ResponseTree,
    flatten,
    generalize,
    parse_response,
    path_length,
)
from .similarity import (
    CATALOGUE,
    best_match,
    identifier_equal,
    register_identifier_comparator,
    similarity,
)
