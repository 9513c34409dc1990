"""API response trees and their flattening into path-value pairs.

A JSON document is a labelled unordered tree: objects contribute named
edges, arrays contribute integer-indexed edges (branching points), scalars
are leaves. Only root-to-leaf paths take part in matching; array indices can
be generalized to a wildcard.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import UnparseableResponseError

WILDCARD = "*"

Segment = Union[str, int]
LeafValue = Union[str, int, float, bool, None]

_KINDS = {str: "string", int: "number", float: "number", bool: "boolean"}


@dataclass(frozen=True)
class PathValuePair:
    """A root-to-leaf path with the leaf it reaches.

    Array indices are kept as ``int`` segments so they stay distinguishable
    from numeric object keys, which are plain strings.
    """

    segments: tuple[Segment, ...]
    value: LeafValue
    kind: str  # "string" | "number" | "boolean" | "null"

    @property
    def length(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class GeneralizedPath:
    """A path with every array index replaced by the wildcard token."""

    segments: tuple[str, ...]
    branch_count: int

    @property
    def length(self) -> int:
        return len(self.segments)

    def pattern(self) -> str:
        return ".".join(self.segments)


class ResponseTree:
    """Parsed JSON document held as-is; flattening walks it on demand."""

    def __init__(self, root: object):
        self.root = root

    def flatten(self) -> tuple[PathValuePair, ...]:
        return flatten(self)


def parse_response(body: Union[bytes, str]) -> ResponseTree:
    """Parse a JSON body; a scalar root is allowed (single leaf at the root)."""
    if isinstance(body, bytes):
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnparseableResponseError(
                f"response is not valid UTF-8: {exc}", offset=exc.start
            ) from exc
    else:
        text = body
    try:
        return ResponseTree(json.loads(text))
    except json.JSONDecodeError as exc:
        raise UnparseableResponseError(
            f"unparseable response: {exc.msg}", offset=exc.pos
        ) from exc


def _leaf_kind(value: LeafValue) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    return _KINDS[type(value)]


def flatten(tree: ResponseTree) -> tuple[PathValuePair, ...]:
    """One pair per leaf; objects and arrays never appear as values."""
    pairs: list[PathValuePair] = []

    def walk(node: object, prefix: tuple[Segment, ...]) -> None:
        if isinstance(node, dict):
            for key, child in node.items():
                walk(child, prefix + (key,))
        elif isinstance(node, list):
            for index, child in enumerate(node):
                walk(child, prefix + (index,))
        else:
            pairs.append(PathValuePair(prefix, node, _leaf_kind(node)))  # type: ignore[arg-type]

    walk(tree.root, ())
    return tuple(pairs)


def generalize(
    path: Union[PathValuePair, GeneralizedPath, Sequence[Segment]]
) -> GeneralizedPath:
    """Replace all (and only) array-index segments by the wildcard token."""
    if isinstance(path, GeneralizedPath):
        return path
    segments = path.segments if isinstance(path, PathValuePair) else tuple(path)
    generalized = tuple(WILDCARD if isinstance(s, int) else s for s in segments)
    return GeneralizedPath(generalized, branch_count=sum(isinstance(s, int) for s in segments))


def path_length(
    path: Union[PathValuePair, GeneralizedPath, Sequence[Segment]]
) -> int:
    """Segment count; wildcards count as segments."""
    if isinstance(path, (PathValuePair, GeneralizedPath)):
        return path.length
    return len(path)
