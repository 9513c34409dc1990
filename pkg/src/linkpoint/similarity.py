"""String similarity catalogue and per-pair best-method selection.

Fifteen methods in three categories (equality, edit distance, token/n-gram
sets); the overlap coefficient is deliberately not part of the set category.
Values flagged as identifiers bypass the catalogue and go through a pluggable
comparator whose default normalizes away formatting differences.

Conventions shared by all non-Equal methods: inputs are NFC-composed,
lowercased, and whitespace-collapsed before comparison. Character n-grams are
sliding windows over that normalized string (spaces included); a string
shorter than n contributes itself as its only gram. Scores for two empty
inputs are 1.0, and 0.0 when exactly one side is empty.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from functools import lru_cache
from typing import Callable, Optional

KIND_IRI = "iri"
KIND_NUMERIC = "numeric"
KIND_IDENTIFIER = "identifier"
KIND_PLAIN = "plain-string"

_IRI_LIKE_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*://\S+$")
_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)
_WS_RE = re.compile(r"\s+")


@lru_cache(maxsize=65536)
def _normalize(s: str) -> str:
    return _WS_RE.sub(" ", unicodedata.normalize("NFC", s).lower()).strip()


@lru_cache(maxsize=65536)
def _normalize_stripped(s: str) -> str:
    return _WS_RE.sub(" ", _PUNCT_RE.sub("", _normalize(s))).strip()


@lru_cache(maxsize=65536)
def _word_set(s: str) -> frozenset[str]:
    return frozenset(_normalize(s).split())


@lru_cache(maxsize=65536)
def _gram_set(s: str, n: int) -> frozenset[str]:
    t = _normalize(s)
    if len(t) < n:
        return frozenset({t})
    return frozenset(t[i : i + n] for i in range(len(t) - n + 1))


def levenshtein_distance(a: str, b: str) -> int:
    """Exact edit distance via Myers' bit-parallel algorithm.

    Python integers serve as unbounded bit vectors, so the run time is
    O(len(b)) word operations regardless of alphabet.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) > len(b):
        a, b = b, a
    m = len(a)
    peq: dict[str, int] = {}
    for i, ch in enumerate(a):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    full = (1 << m) - 1
    high = 1 << (m - 1)
    vp, vn = full, 0
    dist = m
    for ch in b:
        eq = peq.get(ch, 0)
        d0 = ((((eq & vp) + vp) & full) ^ vp) | eq | vn
        hp = vn | (~(d0 | vp) & full)
        hn = d0 & vp
        if hp & high:
            dist += 1
        if hn & high:
            dist -= 1
        hp = ((hp << 1) | 1) & full
        hn = (hn << 1) & full
        vp = hn | (~(d0 | hp) & full)
        vn = d0 & hp
    return dist


def _osa_distance(a: str, b: str) -> int:
    """Damerau-Levenshtein in the optimal-string-alignment variant
    (adjacent transpositions, no substring edited twice)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def _jaro(a: str, b: str) -> float:
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(la, lb) // 2 - 1
    if window < 0:
        window = 0
    a_flags = [False] * la
    b_flags = [False] * lb
    common = 0
    for i, ch in enumerate(a):
        lo = max(0, i - window)
        hi = min(i + window + 1, lb)
        for j in range(lo, hi):
            if not b_flags[j] and b[j] == ch:
                a_flags[i] = b_flags[j] = True
                common += 1
                break
    if common == 0:
        return 0.0
    transpositions = 0
    k = 0
    for i in range(la):
        if a_flags[i]:
            while not b_flags[k]:
                k += 1
            if a[i] != b[k]:
                transpositions += 1
            k += 1
    transpositions //= 2
    return (common / la + common / lb + (common - transpositions) / common) / 3


def _jaro_winkler(a: str, b: str) -> float:
    jaro = _jaro(a, b)
    if jaro <= 0.7:
        return jaro
    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix == 4:
            break
        prefix += 1
    return jaro + prefix * 0.1 * (1.0 - jaro)


def _lcs_length(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def _set_jaccard(x: frozenset, y: frozenset) -> float:
    if not x and not y:
        return 1.0
    union = len(x | y)
    return len(x & y) / union if union else 0.0


def _set_dice(x: frozenset, y: frozenset) -> float:
    if not x and not y:
        return 1.0
    total = len(x) + len(y)
    return 2 * len(x & y) / total if total else 0.0


def _set_cosine(x: frozenset, y: frozenset) -> float:
    if not x and not y:
        return 1.0
    if not x or not y:
        return 0.0
    return len(x & y) / (len(x) * len(y)) ** 0.5


def _norm_edit_sim(distance: Callable[[str, str], int], a: str, b: str) -> float:
    na, nb = _normalize(a), _normalize(b)
    if na == nb:
        return 1.0
    if not na or not nb:
        return 0.0
    return 1.0 - distance(na, nb) / max(len(na), len(nb))


def _sim_equal(a: str, b: str) -> float:
    return 1.0 if a == b else 0.0


def _sim_normalized_equal(a: str, b: str) -> float:
    return 1.0 if _normalize_stripped(a) == _normalize_stripped(b) else 0.0


def _sim_levenshtein(a: str, b: str) -> float:
    return _norm_edit_sim(levenshtein_distance, a, b)


def _sim_damerau(a: str, b: str) -> float:
    return _norm_edit_sim(_osa_distance, a, b)


def _sim_jaro(a: str, b: str) -> float:
    na, nb = _normalize(a), _normalize(b)
    if na == nb:
        return 1.0
    return _jaro(na, nb)


def _sim_jaro_winkler(a: str, b: str) -> float:
    na, nb = _normalize(a), _normalize(b)
    if na == nb:
        return 1.0
    return _jaro_winkler(na, nb)


def _sim_lcs_ratio(a: str, b: str) -> float:
    na, nb = _normalize(a), _normalize(b)
    if na == nb:
        return 1.0
    if not na or not nb:
        return 0.0
    return _lcs_length(na, nb) / max(len(na), len(nb))


def _token_sim(kind: str, a: str, b: str, setter: Callable) -> float:
    return setter(_word_set(a), _word_set(b)) if kind == "w" else setter(
        _gram_set(a, int(kind)), _gram_set(b, int(kind))
    )


def _inner_lev_sim(x: str, y: str) -> float:
    if x == y:
        return 1.0
    return 1.0 - levenshtein_distance(x, y) / max(len(x), len(y))


def _sim_monge_elkan(a: str, b: str) -> float:
    ta = _normalize(a).split()
    tb = _normalize(b).split()
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0

    def directed(xs: list[str], ys: list[str]) -> float:
        return sum(max(_inner_lev_sim(x, y) for y in ys) for x in xs) / len(xs)

    # Symmetrized: the one-directional form is order-sensitive.
    return (directed(ta, tb) + directed(tb, ta)) / 2


@dataclass(frozen=True)
class SimilarityMethod:
    id: str
    category: str  # "equal" | "edit" | "set"
    fn: Callable[[str, str], float]


CATALOGUE: tuple[SimilarityMethod, ...] = (
    SimilarityMethod("Equal", "equal", _sim_equal),
    SimilarityMethod("NormalizedEqual", "equal", _sim_normalized_equal),
    SimilarityMethod("NormalizedLevenshtein", "edit", _sim_levenshtein),
    SimilarityMethod("DamerauLevenshtein", "edit", _sim_damerau),
    SimilarityMethod("Jaro", "edit", _sim_jaro),
    SimilarityMethod("JaroWinkler", "edit", _sim_jaro_winkler),
    SimilarityMethod("LcsRatio", "edit", _sim_lcs_ratio),
    SimilarityMethod("JaccardWords", "set", lambda a, b: _token_sim("w", a, b, _set_jaccard)),
    SimilarityMethod("DiceWords", "set", lambda a, b: _token_sim("w", a, b, _set_dice)),
    SimilarityMethod("CosineWords", "set", lambda a, b: _token_sim("w", a, b, _set_cosine)),
    SimilarityMethod("JaccardBigrams", "set", lambda a, b: _token_sim("2", a, b, _set_jaccard)),
    SimilarityMethod("DiceBigrams", "set", lambda a, b: _token_sim("2", a, b, _set_dice)),
    SimilarityMethod("CosineBigrams", "set", lambda a, b: _token_sim("2", a, b, _set_cosine)),
    SimilarityMethod("JaccardTrigrams", "set", lambda a, b: _token_sim("3", a, b, _set_jaccard)),
    SimilarityMethod("MongeElkan", "set", _sim_monge_elkan),
)

METHODS: dict[str, SimilarityMethod] = {m.id: m for m in CATALOGUE}

# Catalogue order doubles as the tie-break priority: equality beats edit
# methods beats set methods when scores are equal.
_PRIORITY: dict[str, int] = {m.id: i for i, m in enumerate(CATALOGUE)}


def similarity(method: str, a: str, b: str) -> float:
    """Score of one catalogue method on a pair of strings, in [0, 1]."""
    m = METHODS.get(method)
    if m is None:
        raise ValueError(f"unknown similarity method: {method}")
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return m.fn(a, b)


def method_priority(method: str) -> int:
    return _PRIORITY.get(method, len(CATALOGUE))


# --- identifier comparators -------------------------------------------------


def _identifier_key(s: str) -> str:
    return "".join(ch for ch in s.lower() if ch.isalnum())


def identifier_equal(a: str, b: str) -> bool:
    """Default identifier comparator: equality after lowercasing and dropping
    every non-alphanumeric character (hyphenated vs. plain ISBNs, etc.)."""
    return _identifier_key(a) == _identifier_key(b)


_COMPARATORS: dict[str, Callable[[str, str], bool]] = {
    "normalized-exact": identifier_equal,
}

DEFAULT_IDENTIFIER_COMPARATOR = "normalized-exact"


def register_identifier_comparator(name: str, fn: Callable[[str, str], bool]) -> None:
    _COMPARATORS[name] = fn


def get_identifier_comparator(name: str) -> Callable[[str, str], bool]:
    try:
        return _COMPARATORS[name]
    except KeyError:
        raise ValueError(f"unknown identifier comparator: {name}") from None


# --- value kinds and best-method selection ----------------------------------


def numeric_value(s: str) -> Optional[Decimal]:
    """The exact numeric value of a string, or None if it is not a plain
    number. Rejects NaN/Infinity spellings that Decimal would accept."""
    text = s.strip()
    if not text or not re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?", text):
        return None
    try:
        return Decimal(text)
    except InvalidOperation:
        return None


def looks_like_iri(s: str) -> bool:
    return bool(_IRI_LIKE_RE.match(s))


def classify_kind(
    kb_value: str,
    leaf_kind: str,
    leaf_str: str,
    identifier_relation: bool,
) -> str:
    """Mutually exclusive comparison kind for a (KB literal, leaf) pair."""
    if identifier_relation:
        return KIND_IDENTIFIER
    if looks_like_iri(kb_value) or (leaf_kind == "string" and looks_like_iri(leaf_str)):
        return KIND_IRI
    if numeric_value(kb_value) is not None and (
        leaf_kind == "number" or numeric_value(leaf_str) is not None
    ):
        return KIND_NUMERIC
    return KIND_PLAIN


@lru_cache(maxsize=262144)
def _best_plain(a: str, b: str) -> tuple[str, float]:
    if not a and not b:
        return "Equal", 1.0
    if not a or not b:
        return "Equal", 0.0
    best_id, best_score = "Equal", 0.0
    for m in CATALOGUE:
        score = m.fn(a, b)
        if score > best_score:
            best_id, best_score = m.id, score
            if best_score >= 1.0:
                break
    return best_id, best_score


def best_match(
    a: str,
    b: str,
    kind: str,
    theta_str: float,
    identifier_comparator: str = DEFAULT_IDENTIFIER_COMPARATOR,
) -> Optional[tuple[str, float]]:
    """Winning (method, score) for a value pair, or None below ``theta_str``.

    IRIs and numbers only ever match exactly; identifier values go through
    the configured comparator; everything else takes the catalogue argmax.
    """
    if kind == KIND_IRI:
        method, score = "Equal", _sim_equal(a, b)
    elif kind == KIND_NUMERIC:
        na, nb = numeric_value(a), numeric_value(b)
        method = "Equal"
        score = 1.0 if na is not None and nb is not None and na == nb else 0.0
    elif kind == KIND_IDENTIFIER:
        method = identifier_comparator
        score = 1.0 if get_identifier_comparator(identifier_comparator)(a, b) else 0.0
    elif kind == KIND_PLAIN:
        method, score = _best_plain(a, b)
    else:
        raise ValueError(f"unknown value kind: {kind}")
    if score >= theta_str:
        return method, score
    return None
