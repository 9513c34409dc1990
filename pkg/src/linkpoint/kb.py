"""In-memory RDF store over the N-Triples subset.

Answers the queries the alignment pipeline needs: class membership,
relation-value paths up to a depth bound (with inverse hops), relation
functionality, and literal value frequency. A loaded store is immutable and
safe for concurrent readers.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Union

from .errors import KbLoadError, UnknownRelationError

logger = logging.getLogger(__name__)

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

FORWARD = "forward"
INVERSE = "inverse"

# Absolute IRI: a scheme followed by characters N-Triples allows unescaped.
_IRI_RE = re.compile(r'^[A-Za-z][A-Za-z0-9+.\-]*:[^\x00-\x20<>"{}|^`\\]*$')
_BNODE_RE = re.compile(r"^_:[A-Za-z0-9][A-Za-z0-9._\-]*$")
_LANG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")

_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


@dataclass(frozen=True)
class Literal:
    """An RDF literal; the lexical form is kept exactly as written."""

    lexical: str
    datatype: str | None = None
    language: str | None = None


Node = Union[str, Literal]


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: Node

    @property
    def object_is_literal(self) -> bool:
        return isinstance(self.object, Literal)


@dataclass(frozen=True)
class RelationValuePath:
    """A chain of (predicate, direction) hops from an entity to a literal."""

    origin: str
    hops: tuple[tuple[str, str], ...]
    value: Literal

    @property
    def length(self) -> int:
        return len(self.hops)

    @property
    def terminal_predicate(self) -> str:
        return self.hops[-1][0]


class _LineParser:
    """Single-line N-Triples parser. Raises ValueError on any malformed input."""

    def __init__(self, line: str):
        self.line = line
        self.pos = 0

    def parse(self) -> Triple:
        subject = self._term(allow_literal=False)
        predicate = self._term(allow_literal=False, allow_bnode=False)
        obj = self._term(allow_literal=True)
        self._skip_ws()
        if self.pos >= len(self.line) or self.line[self.pos] != ".":
            raise ValueError("missing terminating '.'")
        self.pos += 1
        self._skip_ws()
        if self.pos != len(self.line):
            raise ValueError("trailing characters after '.'")
        return Triple(subject, predicate, obj)  # type: ignore[arg-type]

    def _skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def _term(self, allow_literal: bool, allow_bnode: bool = True) -> Node:
        self._skip_ws()
        if self.pos >= len(self.line):
            raise ValueError("unexpected end of line")
        ch = self.line[self.pos]
        if ch == "<":
            return self._iri()
        if ch == "_" and allow_bnode:
            return self._bnode()
        if ch == '"' and allow_literal:
            return self._literal()
        raise ValueError(f"unexpected character {ch!r}")

    def _iri(self) -> str:
        end = self.line.find(">", self.pos + 1)
        if end < 0:
            raise ValueError("unterminated IRI")
        iri = self.line[self.pos + 1 : end]
        if not _IRI_RE.match(iri):
            raise ValueError(f"invalid IRI: {iri!r}")
        self.pos = end + 1
        return iri

    def _bnode(self) -> str:
        match = re.match(r"_:[A-Za-z0-9][A-Za-z0-9._\-]*", self.line[self.pos :])
        if not match:
            raise ValueError("invalid blank node label")
        self.pos += match.end()
        return match.group(0)

    def _literal(self) -> Literal:
        chars: list[str] = []
        i = self.pos + 1
        line = self.line
        while True:
            if i >= len(line):
                raise ValueError("unterminated literal")
            ch = line[i]
            if ch == '"':
                i += 1
                break
            if ch == "\\":
                i += 1
                if i >= len(line):
                    raise ValueError("dangling escape")
                esc = line[i]
                if esc in _ESCAPES:
                    chars.append(_ESCAPES[esc])
                    i += 1
                elif esc == "u":
                    chars.append(chr(int(line[i + 1 : i + 5], 16)))
                    i += 5
                elif esc == "U":
                    chars.append(chr(int(line[i + 1 : i + 9], 16)))
                    i += 9
                else:
                    raise ValueError(f"invalid escape \\{esc}")
            else:
                chars.append(ch)
                i += 1
        self.pos = i
        lexical = "".join(chars)
        if self.pos < len(line) and line[self.pos] == "@":
            match = re.match(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)", line[self.pos :])
            if not match:
                raise ValueError("invalid language tag")
            self.pos += match.end()
            return Literal(lexical, language=match.group(1))
        if line[self.pos : self.pos + 2] == "^^":
            self.pos += 2
            if self.pos >= len(line) or line[self.pos] != "<":
                raise ValueError("datatype must be an IRI")
            return Literal(lexical, datatype=self._iri())
        return Literal(lexical)


def _escape_lexical(s: str) -> str:
    out: list[str] = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _serialize_node(node: Node) -> str:
    if isinstance(node, Literal):
        base = f'"{_escape_lexical(node.lexical)}"'
        if node.language:
            return f"{base}@{node.language}"
        if node.datatype:
            return f"{base}^^<{node.datatype}>"
        return base
    if node.startswith("_:"):
        return node
    return f"<{node}>"


class KnowledgeBase:
    """Immutable, fully indexed triple set."""

    def __init__(
        self,
        triples: Iterable[Triple],
        type_predicate: str = RDF_TYPE,
        skipped_lines: int = 0,
    ):
        ordered: list[Triple] = []
        seen: set[Triple] = set()
        for t in triples:
            if t not in seen:
                seen.add(t)
                ordered.append(t)
        self._triples: tuple[Triple, ...] = tuple(ordered)
        self._triple_set = seen
        self.type_predicate = type_predicate
        self.skipped_lines = skipped_lines

        by_subject: dict[str, list[Triple]] = {}
        by_predicate: dict[str, list[Triple]] = {}
        by_object_node: dict[str, list[Triple]] = {}
        literal_counts: dict[tuple[str, str], int] = {}
        class_index: dict[str, set[str]] = {}
        for t in self._triples:
            by_subject.setdefault(t.subject, []).append(t)
            by_predicate.setdefault(t.predicate, []).append(t)
            if isinstance(t.object, Literal):
                key = (t.predicate, t.object.lexical)
                literal_counts[key] = literal_counts.get(key, 0) + 1
            else:
                by_object_node.setdefault(t.object, []).append(t)
                if t.predicate == type_predicate:
                    class_index.setdefault(t.object, set()).add(t.subject)
        self._by_subject = {k: tuple(v) for k, v in by_subject.items()}
        self._by_predicate = {k: tuple(v) for k, v in by_predicate.items()}
        self._by_object_node = {k: tuple(v) for k, v in by_object_node.items()}
        self._literal_counts = literal_counts
        self._class_index = {k: frozenset(v) for k, v in class_index.items()}

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triple_set

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    @property
    def predicates(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_predicate))

    def triples_for_subject(self, subject: str) -> tuple[Triple, ...]:
        return self._by_subject.get(subject, ())

    def triples_with_predicate(self, predicate: str) -> tuple[Triple, ...]:
        return self._by_predicate.get(predicate, ())

    def entities_of_class(self, class_iri: str) -> frozenset[str]:
        return self._class_index.get(class_iri, frozenset())

    def relation_value_paths(
        self, entity: str, max_depth: int = 3
    ) -> frozenset[RelationValuePath]:
        """All acyclic paths of up to ``max_depth`` hops from ``entity`` to a
        literal. Inverse hops are traversed through entity nodes only; a path
        never revisits a node.

        The type predicate serves class membership only: its edges are
        invisible to path traversal (hopping through a class node would pull
        in every sibling entity's facts)."""
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        found: set[RelationValuePath] = set()
        visited: set[str] = {entity}

        def walk(node: str, hops: tuple[tuple[str, str], ...]) -> None:
            depth = len(hops)
            if depth >= max_depth:
                return
            for t in self._by_subject.get(node, ()):
                if t.predicate == self.type_predicate:
                    continue
                if isinstance(t.object, Literal):
                    found.add(
                        RelationValuePath(entity, hops + ((t.predicate, FORWARD),), t.object)
                    )
                elif t.object not in visited and depth + 1 < max_depth:
                    visited.add(t.object)
                    walk(t.object, hops + ((t.predicate, FORWARD),))
                    visited.discard(t.object)
            for t in self._by_object_node.get(node, ()):
                if t.predicate == self.type_predicate:
                    continue
                if t.subject not in visited and depth + 1 < max_depth:
                    visited.add(t.subject)
                    walk(t.subject, hops + ((t.predicate, INVERSE),))
                    visited.discard(t.subject)

        walk(entity, ())
        return frozenset(found)

    def functionality(self, relation: str, direction: str = FORWARD) -> Fraction:
        """Distinct start nodes divided by triple count, as an exact ratio."""
        triples = self._by_predicate.get(relation)
        if not triples:
            raise UnknownRelationError(relation)
        if direction == FORWARD:
            distinct: set[Node] = {t.subject for t in triples}
        elif direction == INVERSE:
            distinct = {t.object for t in triples}
        else:
            raise ValueError(f"direction must be {FORWARD!r} or {INVERSE!r}")
        return Fraction(len(distinct), len(triples))

    def value_frequency(self, relation: str, lexical: str) -> int:
        """How many triples of ``relation`` carry exactly this literal form."""
        return self._literal_counts.get((relation, lexical), 0)

    def to_ntriples(self) -> str:
        lines = sorted(
            f"{_serialize_node(t.subject)} {_serialize_node(t.predicate)} "
            f"{_serialize_node(t.object)} ."
            for t in self._triples
        )
        return "\n".join(lines) + ("\n" if lines else "")


def load_kb(
    source: Union[str, Path, bytes, IO[bytes], IO[str]],
    type_predicate: str = RDF_TYPE,
) -> KnowledgeBase:
    """Parse N-Triples into an indexed store.

    Malformed lines are skipped with a warning (real dumps are noisy); an
    unreadable source raises :class:`KbLoadError`.
    """
    try:
        if isinstance(source, (str, Path)):
            data: object = Path(source).read_bytes()
        elif isinstance(source, bytes):
            data = source
        else:
            data = source.read()
    except OSError as exc:
        raise KbLoadError(f"cannot read knowledge base: {exc}") from exc

    if isinstance(data, str):
        raw_lines: list[object] = data.splitlines()
    else:
        raw_lines = data.splitlines()  # type: ignore[union-attr]

    triples: list[Triple] = []
    skipped = 0
    for lineno, raw in enumerate(raw_lines, start=1):
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                skipped += 1
                logger.warning("line %d: invalid UTF-8, skipped", lineno)
                continue
        else:
            line = raw
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            triples.append(_LineParser(stripped).parse())
        except ValueError as exc:
            skipped += 1
            logger.warning("line %d: %s, skipped", lineno, exc)
    if skipped:
        logger.warning("skipped %d malformed line(s)", skipped)
    return KnowledgeBase(triples, type_predicate=type_predicate, skipped_lines=skipped)
