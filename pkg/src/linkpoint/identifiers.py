"""Derivation of identifier relations from inverse functionality.

A relation whose literal values almost never repeat behaves like a key
(DOI, ISBN, ...). Such relations get a dedicated comparator during matching
instead of the fuzzy method catalogue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .kb import KnowledgeBase, Literal

DEFAULT_THETA_ID = 0.99

# Inverse functionality of a handful of triples says nothing; relations with
# fewer literal occurrences than this are never classified as identifiers.
DEFAULT_MIN_COUNT = 10


@dataclass(frozen=True)
class IdentifierRelationSet:
    relations: frozenset[str]
    theta_id: float
    inverse_functionality: Mapping[str, Fraction] = field(default_factory=dict)

    def __contains__(self, relation: str) -> bool:
        return relation in self.relations

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.relations))

    def to_dict(self) -> list[dict]:
        return [
            {
                "relation": r,
                "inverse_functionality": float(self.inverse_functionality[r]),
            }
            for r in sorted(self.relations)
        ]


def extract_identifier_relations(
    kb: KnowledgeBase,
    theta_id: float = DEFAULT_THETA_ID,
    min_count: int = DEFAULT_MIN_COUNT,
) -> IdentifierRelationSet:
    """Select the single predicates whose inverse functionality over their
    literal triples meets ``theta_id``.

    Relations with mixed IRI/literal objects are judged on their literal
    triples only; relations with fewer than ``min_count`` literal occurrences
    are skipped.
    """
    if not 0 < theta_id <= 1:
        raise ValueError("theta_id must be in (0, 1]")
    functionality: dict[str, Fraction] = {}
    included: set[str] = set()
    for predicate in kb.predicates:
        literal_triples = [
            t for t in kb.triples_with_predicate(predicate) if isinstance(t.object, Literal)
        ]
        if len(literal_triples) < min_count:
            continue
        distinct = {t.object for t in literal_triples}
        fun_inverse = Fraction(len(distinct), len(literal_triples))
        if fun_inverse >= theta_id:
            functionality[predicate] = fun_inverse
            included.add(predicate)
    return IdentifierRelationSet(
        relations=frozenset(included),
        theta_id=theta_id,
        inverse_functionality=functionality,
    )
