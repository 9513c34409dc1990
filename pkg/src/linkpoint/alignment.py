"""Candidate alignment and final alignment.

Per response, every KB relation-value path is compared against every
response leaf; matches survive only when the two records overlap enough to
be about the same entity. Accumulated matches are then grouped per KB
relation, the best response path is selected with a reciprocal
length-difference discount, and each winner is classified as a fixed path
match (one array index carries the information) or a branching point match
(all indices do) with a confidence score.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .config import GlobalSettings
from .connector import ApiConnector, ApiEndpoint
from .errors import TransportError, UnparseableResponseError
from .identifiers import IdentifierRelationSet, extract_identifier_relations
from .kb import KnowledgeBase, Literal, RelationValuePath
from .probing import ProbeReport, _body_similarity, probe
from .response import WILDCARD, PathValuePair, flatten, generalize, parse_response
from .similarity import (
    DEFAULT_IDENTIFIER_COMPARATOR,
    best_match,
    classify_kind,
    method_priority,
)

logger = logging.getLogger(__name__)

FPM = "FPM"
BPM = "BPM"

HopSignature = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class MatchTriple:
    relation: HopSignature
    path: tuple[str | int, ...]
    method: str
    score: float
    request_index: int


@dataclass
class CandidateMatchSet:
    input_relation: str
    triples: list[MatchTriple] = field(default_factory=list)
    n_sent: int = 0
    n_valid: int = 0
    valid_request_indices: frozenset[int] = frozenset()


@dataclass(frozen=True)
class AlignmentEntry:
    input_relation: str
    kb_path: HopSignature
    api_path: str
    kind: str  # FPM | BPM
    method: str
    confidence: float
    matches: int
    valid_responses: int

    def to_dict(self) -> dict:
        return {
            "input_relation": self.input_relation,
            "kb_path": [
                {"predicate": predicate, "direction": direction}
                for predicate, direction in self.kb_path
            ],
            "api_path": self.api_path,
            "kind": self.kind,
            "method": self.method,
            "confidence": self.confidence,
            "support": {
                "matches": self.matches,
                "valid_responses": self.valid_responses,
            },
        }


def _leaf_str(pair: PathValuePair) -> str:
    if pair.kind == "string":
        return pair.value  # type: ignore[return-value]
    if pair.kind == "boolean":
        return "true" if pair.value else "false"
    return json.dumps(pair.value)


def match_record(
    rec: Iterable[RelationValuePath],
    res: Iterable[PathValuePair],
    id_relations: IdentifierRelationSet | frozenset[str],
    theta_str: float,
    request_index: int = 0,
    identifier_comparator: str = DEFAULT_IDENTIFIER_COMPARATOR,
) -> list[MatchTriple]:
    """All value matches between a KB record and a flattened response.

    A pair is compared with the method its kind dictates; a match is kept
    only at score >= theta_str, and each (relation, concrete path) pair keeps
    a single best triple. Null leaves never match.
    """
    best: dict[tuple[HopSignature, tuple[str | int, ...]], tuple[str, float]] = {}
    for rvp in rec:
        kb_value = rvp.value.lexical
        is_identifier = rvp.terminal_predicate in id_relations
        for pair in res:
            if pair.kind == "null":
                continue
            leaf = _leaf_str(pair)
            kind = classify_kind(kb_value, pair.kind, leaf, is_identifier)
            hit = best_match(kb_value, leaf, kind, theta_str, identifier_comparator)
            if hit is None:
                continue
            key = (rvp.hops, pair.segments)
            current = best.get(key)
            if current is None or hit[1] > current[1]:
                best[key] = hit
    return [
        MatchTriple(relation, path, method, score, request_index)
        for (relation, path), (method, score) in best.items()
    ]


def record_overlap(
    matches: Iterable[MatchTriple],
    rec: Sequence[RelationValuePath] | frozenset[RelationValuePath],
    res: Sequence[PathValuePair],
) -> float:
    """Distinct matched KB relations over the size of the smaller record."""
    if not rec or not res:
        raise ValueError("rec and res must be nonempty")
    matched_relations = {t.relation for t in matches}
    return len(matched_relations) / min(len(rec), len(res))


def collect_candidates(
    kb: KnowledgeBase,
    endpoint: ApiEndpoint,
    connector: ApiConnector,
    input_relation: str,
    id_relations: IdentifierRelationSet | frozenset[str],
    n_r: int,
    theta_str: float,
    theta_rec: float,
    seed: int,
    error_signature: Optional[str] = None,
    theta_err: float = 0.80,
    max_depth: int = 3,
    identifier_comparator: str = DEFAULT_IDENTIFIER_COMPARATOR,
) -> CandidateMatchSet:
    """Send further requests for one input relation and accumulate matches.

    Responses that fail transport/parsing or resemble the error signature are
    skipped outright; responses whose record overlap stays below theta_rec
    contribute nothing (their matches are discarded, and they do not count as
    valid).
    """
    out = CandidateMatchSet(input_relation=input_relation)
    if n_r <= 0:
        return out
    entities = sorted(
        entity
        for entity in kb.entities_of_class(endpoint.input_class)
        if any(
            t.predicate == input_relation and isinstance(t.object, Literal)
            for t in kb.triples_for_subject(entity)
        )
    )
    if not entities:
        logger.warning("no entities carry input relation %s", input_relation)
        return out
    rng = random.Random(f"{seed}:align:{input_relation}")
    chosen = rng.sample(entities, min(n_r, len(entities)))

    valid_indices: set[int] = set()
    for index, entity in enumerate(chosen):
        request_value = min(
            t.object.lexical
            for t in kb.triples_for_subject(entity)
            if t.predicate == input_relation and isinstance(t.object, Literal)
        )
        out.n_sent += 1
        try:
            response = connector.fetch(endpoint, request_value)
        except TransportError:
            continue
        if not response.ok:
            continue
        try:
            tree = parse_response(response.body)
        except UnparseableResponseError:
            continue
        body_text = response.text()
        if error_signature is not None and (
            _body_similarity(body_text[:2000], error_signature[:2000], theta_err)
            > theta_err
        ):
            continue
        rec = kb.relation_value_paths(entity, max_depth)
        res = flatten(tree)
        if not rec or not res:
            continue
        matches = match_record(
            rec, res, id_relations, theta_str, index, identifier_comparator
        )
        overlap = record_overlap(matches, rec, res) if matches else 0.0
        if overlap >= theta_rec:
            out.triples.extend(matches)
            out.n_valid += 1
            valid_indices.add(index)
    out.valid_request_indices = frozenset(valid_indices)
    if out.n_valid == 0:
        logger.warning("input relation %s: no valid responses", input_relation)
    return out


def _signature_key(relation: HopSignature) -> str:
    return "|".join(f"{d}:{p}" for p, d in relation)


def _structural_length(
    generalized: tuple[str, ...], pinned_positions: set[int]
) -> int:
    """Segments counted for the length discount. A branch position where the
    support only ever used one index is pinned addressing, not structure, so
    it contributes nothing; a genuinely varying position counts like any
    other segment."""
    return len(generalized) - len(pinned_positions)


def finalize(
    candidates: CandidateMatchSet,
    theta_rec: float,
    bpm_support_fraction: float = 0.5,
) -> list[AlignmentEntry]:
    """Reduce accumulated matches to at most one alignment entry per KB
    relation.

    Candidate response paths are grouped with array indices generalized,
    scored as supporting-response count divided by max(1, |len(r) - len(p)|),
    and the best one is classified: every branch position stuck on a single
    index makes a fixed path match, any position with several indices makes a
    branching point match. Confidence is supporting responses over valid
    responses; a branching point match must additionally cover at least
    ``bpm_support_fraction`` of the responses in which its relation matched
    anything (a sporadically matching array is not a convincing alignment).
    """
    if candidates.n_valid <= 0:
        return []
    by_relation: dict[HopSignature, list[MatchTriple]] = defaultdict(list)
    for triple in candidates.triples:
        by_relation[triple.relation].append(triple)

    entries: list[AlignmentEntry] = []
    for relation in sorted(by_relation, key=_signature_key):
        triples = by_relation[relation]
        groups: dict[tuple[str, ...], list[MatchTriple]] = defaultdict(list)
        for triple in triples:
            groups[generalize(triple.path).segments].append(triple)

        scored: list[tuple[float, int, str, tuple[str, ...]]] = []
        details: dict[tuple[str, ...], tuple[set[int], dict[int, set]]] = {}
        for generalized, support in groups.items():
            branch_positions = [
                i for i, segment in enumerate(generalized) if segment == WILDCARD
            ]
            indices_per_position: dict[int, set] = {
                pos: {t.path[pos] for t in support} for pos in branch_positions
            }
            pinned = {
                pos for pos, idx in indices_per_position.items() if len(idx) == 1
            }
            support_responses = len({t.request_index for t in support})
            length_delta = abs(
                len(relation) - _structural_length(generalized, pinned)
            )
            score = support_responses / max(1, length_delta)
            scored.append((score, length_delta, ".".join(generalized), generalized))
            details[generalized] = (pinned, indices_per_position)

        scored.sort(key=lambda item: (-item[0], item[1], item[2]))
        _, _, _, winner = scored[0]
        support = groups[winner]
        pinned, indices_per_position = details[winner]
        diverse = [
            pos for pos, idx in indices_per_position.items() if len(idx) > 1
        ]
        kind = BPM if diverse else FPM
        supporting_responses = len({t.request_index for t in support})
        confidence = supporting_responses / candidates.n_valid
        if confidence < theta_rec:
            continue
        if kind == BPM:
            relation_responses = len({t.request_index for t in triples})
            if supporting_responses / relation_responses < bpm_support_fraction:
                continue

        segments = list(winner)
        for pos in pinned:
            segments[pos] = str(next(iter(indices_per_position[pos])))
        api_path = ".".join(segments)

        method_counts = Counter(t.method for t in support)
        method = min(
            method_counts,
            key=lambda m: (-method_counts[m], method_priority(m), m),
        )
        entries.append(
            AlignmentEntry(
                input_relation=candidates.input_relation,
                kb_path=relation,
                api_path=api_path,
                kind=kind,
                method=method,
                confidence=confidence,
                matches=supporting_responses,
                valid_responses=candidates.n_valid,
            )
        )
    return entries


@dataclass(frozen=True)
class AlignmentResult:
    probe: ProbeReport
    identifier_relations: IdentifierRelationSet
    entries: tuple[AlignmentEntry, ...]
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "identifier_relations": self.identifier_relations.to_dict(),
            "probe": self.probe.to_dict(),
            "alignment": [entry.to_dict() for entry in self.entries],
        }


def run_alignment(
    kb: KnowledgeBase,
    endpoint: ApiEndpoint,
    connector: ApiConnector,
    settings: GlobalSettings,
) -> AlignmentResult:
    """Probing phase followed by candidate and final alignment per valid
    input relation. Fatal probe errors propagate."""
    report = probe(
        kb,
        endpoint,
        connector,
        n_p=settings.n_p,
        seed=settings.seed,
        theta_err=settings.theta_err,
        min_valid_fraction=settings.min_valid_fraction,
    )
    id_relations = extract_identifier_relations(
        kb, settings.theta_id, settings.identifier_min_count
    )
    entries: list[AlignmentEntry] = []
    for input_relation in report.valid_input_relations:
        candidates = collect_candidates(
            kb,
            endpoint,
            connector,
            input_relation,
            id_relations,
            n_r=settings.n_r,
            theta_str=settings.theta_str,
            theta_rec=settings.theta_rec,
            seed=settings.seed,
            error_signature=report.error_signature,
            theta_err=settings.theta_err,
            max_depth=settings.max_depth,
            identifier_comparator=settings.identifier_comparator,
        )
        if candidates.n_valid == 0:
            continue
        entries.extend(
            finalize(candidates, settings.theta_rec, settings.bpm_support_fraction)
        )
    entries.sort(key=lambda e: (e.input_relation, _signature_key(e.kb_path), e.api_path))
    return AlignmentResult(
        probe=report,
        identifier_relations=id_relations,
        entries=tuple(entries),
        seed=settings.seed,
    )
