"""Discovery of valid API input relations by sampled probing.

Candidate relations are the literal-valued depth-1 relations of the input
class. For each, values that are unique in the KB are sampled uniformly at
random and sent to the API; 2xx bodies are then clustered by mutual
similarity to strip the API's "not found" template, and a relation survives
only if enough genuine responses remain.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .connector import ApiConnector, ApiEndpoint
from .errors import ProbeError, TransportError, UnparseableResponseError
from .kb import KnowledgeBase, Literal
from .response import parse_response
from .similarity import levenshtein_distance

logger = logging.getLogger(__name__)

DEFAULT_THETA_ERR = 0.80

# Error templates are short and prefix-distinctive; comparing full record
# bodies would cost O(len^2) per pair for no extra signal.
ERROR_BODY_PREFIX = 2000


@dataclass(frozen=True)
class RelationProbeStats:
    requests_sent: int
    valid_responses: int
    error_responses: int
    http_failures: int

    def to_dict(self) -> dict:
        return {
            "requests_sent": self.requests_sent,
            "valid_responses": self.valid_responses,
            "error_responses": self.error_responses,
            "http_failures": self.http_failures,
        }


@dataclass(frozen=True)
class ProbeReport:
    valid_input_relations: tuple[str, ...]
    error_signature: Optional[str]
    relations: Mapping[str, RelationProbeStats]

    def to_dict(self) -> dict:
        return {
            "valid_input_relations": list(self.valid_input_relations),
            "error_signature": self.error_signature,
            "relations": {
                rel: stats.to_dict() for rel, stats in sorted(self.relations.items())
            },
        }


def candidate_input_relations(kb: KnowledgeBase, input_class: str) -> frozenset[str]:
    """Depth-1 relations of the input class whose objects include literals;
    the type relation is never a candidate."""
    entities = kb.entities_of_class(input_class)
    if not entities:
        raise ProbeError(f"input class has no entities: {input_class}")
    candidates: set[str] = set()
    for entity in entities:
        for t in kb.triples_for_subject(entity):
            if t.predicate != kb.type_predicate and isinstance(t.object, Literal):
                candidates.add(t.predicate)
    return frozenset(candidates)


def sample_input_values(
    kb: KnowledgeBase,
    input_class: str,
    relation: str,
    n_p: int,
    seed: int,
) -> list[str]:
    """Up to ``n_p`` distinct values of ``relation`` over input-class entities,
    drawn uniformly without replacement. Values occurring more than once in
    the KB are never used (they could pull back the wrong record)."""
    if n_p < 1:
        raise ValueError("n_p must be >= 1")
    usable: set[str] = set()
    for entity in kb.entities_of_class(input_class):
        for t in kb.triples_for_subject(entity):
            if t.predicate == relation and isinstance(t.object, Literal):
                if kb.value_frequency(relation, t.object.lexical) == 1:
                    usable.add(t.object.lexical)
    ordered = sorted(usable)
    if not ordered:
        return []
    if len(ordered) < n_p:
        logger.warning(
            "relation %s: only %d usable value(s) for %d requested",
            relation, len(ordered), n_p,
        )
    rng = random.Random(f"{seed}:probe:{relation}")
    return rng.sample(ordered, min(n_p, len(ordered)))


def _body_similarity(a: str, b: str, theta_err: float) -> float:
    """Length-normalized Levenshtein similarity of body prefixes, with a
    cheap length-difference bound that skips hopeless pairs."""
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    if 1.0 - abs(len(a) - len(b)) / longest <= theta_err:
        return 0.0
    return 1.0 - levenshtein_distance(a, b) / longest


def detect_error_responses(
    bodies: Sequence[str], theta_err: float = DEFAULT_THETA_ERR
) -> tuple[Optional[str], list[str]]:
    """Identify the body most often similar (> theta_err) to the others as the
    API's error template and drop everything similar to it.

    Returns (error_signature or None, surviving bodies). When no body is
    similar to any other there is no signature and everything survives.
    """
    if not 0 <= theta_err <= 1:
        raise ValueError("theta_err must be in [0, 1]")
    n = len(bodies)
    if n == 0:
        return None, []
    prefixes = [b[:ERROR_BODY_PREFIX] for b in bodies]
    similar: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if _body_similarity(prefixes[i], prefixes[j], theta_err) > theta_err:
                similar[i].add(j)
                similar[j].add(i)
    best = max(range(n), key=lambda i: len(similar[i]))
    if not similar[best]:
        return None, list(bodies)
    removed = similar[best] | {best}
    surviving = [bodies[i] for i in range(n) if i not in removed]
    return bodies[best], surviving


def probe(
    kb: KnowledgeBase,
    endpoint: ApiEndpoint,
    connector: ApiConnector,
    n_p: int,
    seed: int,
    theta_err: float = DEFAULT_THETA_ERR,
    min_valid_fraction: float = 0.2,
) -> ProbeReport:
    """Run the probing pass and report which relations are valid API inputs.

    Per relation: sampled values are fetched; transport failures, non-2xx
    statuses and unparseable bodies count as HTTP failures, clustered error
    bodies as error responses, and the rest as valid. A relation enters the
    valid set when its valid count reaches ``max(1, ceil(min_valid_fraction
    * n_p))``. An endpoint that never produces any HTTP response at all is
    fatal.
    """
    candidates = sorted(candidate_input_relations(kb, endpoint.input_class))
    min_valid = max(1, math.ceil(min_valid_fraction * n_p))
    stats: dict[str, RelationProbeStats] = {}
    valid_relations: list[str] = []
    clusters: list[tuple[int, str, str]] = []
    sent_total = 0
    any_http_response = False

    for relation in candidates:
        values = sample_input_values(kb, endpoint.input_class, relation, n_p, seed)
        if not values:
            logger.warning("relation %s dropped: no usable input values", relation)
            stats[relation] = RelationProbeStats(0, 0, 0, 0)
            continue
        bodies: list[str] = []
        http_failures = 0
        for value in values:
            sent_total += 1
            try:
                resp = connector.fetch(endpoint, value)
            except TransportError:
                http_failures += 1
                continue
            any_http_response = True
            if not resp.ok:
                http_failures += 1
                continue
            try:
                parse_response(resp.body)
            except UnparseableResponseError:
                http_failures += 1
                continue
            bodies.append(resp.text())
        signature, surviving = detect_error_responses(bodies, theta_err)
        error_count = len(bodies) - len(surviving)
        if signature is not None:
            clusters.append((error_count, relation, signature))
        stats[relation] = RelationProbeStats(
            requests_sent=len(values),
            valid_responses=len(surviving),
            error_responses=error_count,
            http_failures=http_failures,
        )
        if len(surviving) >= min_valid:
            valid_relations.append(relation)

    if sent_total > 0 and not any_http_response:
        raise ProbeError(f"endpoint {endpoint.name!r} produced no HTTP response at all")

    error_signature: Optional[str] = None
    if clusters:
        clusters.sort(key=lambda c: (-c[0], c[1]))
        error_signature = clusters[0][2]
    return ProbeReport(
        valid_input_relations=tuple(valid_relations),
        error_signature=error_signature,
        relations=stats,
    )
