"""Synthetic KB/API pairs with known gold alignments, plus scoring.

The generator builds a bibliographic-style KB and a keyed mock API whose
responses can be degraded with the classic real-world nuisances: abbreviated
person names, reformatted identifiers, answers about the wrong record, and a
fixed error template. Everything is derived from one seed, so fixtures are
byte-identical across runs. A pair can be served in-process through the
transport interface, persisted to a directory and replayed, or bound to a
loopback HTTP server to exercise the real connector.
"""

from __future__ import annotations

import json
import logging
import random
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union
from urllib.parse import parse_qs, unquote, urlsplit

from .alignment import AlignmentEntry, HopSignature
from .connector import ApiEndpoint
from .kb import FORWARD, RDF_TYPE, KnowledgeBase, load_kb

logger = logging.getLogger(__name__)

EX = "http://example.org/"
REL_TITLE = EX + "title"
REL_DOI = EX + "doi"
REL_YEAR = EX + "year"
REL_PUBLISHER = EX + "publisher"
REL_CREATOR_LIST = EX + "creatorList"
REL_MEMBER = EX + "member"
REL_NAME = EX + "name"
CLASS_PUBLICATION = EX + "Publication"
CLASS_PERSON = EX + "Person"

MOCK_URL_TEMPLATE = "https://api.mock.invalid/record?q={value}"

_FIRST_NAMES = [
    "Ada", "Bruno", "Clara", "Daniel", "Elena", "Felix", "Greta", "Hugo",
    "Iris", "Jonas", "Katja", "Lars", "Mira", "Nils", "Olga", "Paul",
]
_LAST_NAMES = [
    "Achterberg", "Brandt", "Cremers", "Dahlmann", "Eggers", "Fischer",
    "Gruber", "Hartmann", "Ibsen", "Jansen", "Kessler", "Lindner",
    "Moeller", "Neumann", "Oswald", "Petersen",
]
_TITLE_HEADS = [
    "Adaptive", "Bayesian", "Compositional", "Distributed", "Efficient",
    "Federated", "Generative", "Hybrid", "Incremental", "Modular",
    "Probabilistic", "Robust", "Scalable", "Streaming",
]
_TITLE_CORES = [
    "Alignment", "Clustering", "Indexing", "Inference", "Integration",
    "Matching", "Partitioning", "Profiling", "Ranking", "Retrieval",
    "Sampling", "Summarization",
]
_TITLE_TAILS = [
    "over Evolving Graphs", "for Sparse Records", "in Federated Catalogs",
    "with Weak Supervision", "under Noisy Labels", "at Web Scale",
    "for Heterogeneous Sources", "with Limited Feedback",
    "across Bibliographic Archives", "for Long-Tail Entities",
]
_PUBLISHERS = [
    "Aldine Press", "Borealis Publishing", "Cedarwood Academic",
    "Delta Scientific", "Ember House", "Foxglove Press",
]


@dataclass(frozen=True)
class SyntheticPairConfig:
    entity_count: int = 200
    name_abbreviation_prob: float = 0.0
    identifier_reformat_prob: float = 0.0
    wrong_record_prob: float = 0.0
    error_response_prob: float = 0.0
    extra_leaf_count: int = 2
    title_keyed: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.entity_count < 1:
            raise ValueError("entity_count must be >= 1")
        for name in (
            "name_abbreviation_prob",
            "identifier_reformat_prob",
            "wrong_record_prob",
            "error_response_prob",
        ):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.extra_leaf_count < 0:
            raise ValueError("extra_leaf_count must be >= 0")


def standard_noise_config(seed: int = 0, **overrides) -> SyntheticPairConfig:
    """The default nuisance mix used by the end-to-end checks."""
    params = dict(
        entity_count=200,
        name_abbreviation_prob=0.3,
        identifier_reformat_prob=0.3,
        wrong_record_prob=0.1,
        error_response_prob=0.1,
        extra_leaf_count=2,
        seed=seed,
    )
    params.update(overrides)
    return SyntheticPairConfig(**params)


def zero_noise_config(seed: int = 0, **overrides) -> SyntheticPairConfig:
    params = dict(entity_count=200, extra_leaf_count=2, seed=seed)
    params.update(overrides)
    return SyntheticPairConfig(**params)


@dataclass(frozen=True)
class GoldAlignment:
    entries: frozenset[tuple[HopSignature, str, str]]  # (kb_path, api_path, kind)

    def pairs(self) -> frozenset[tuple[HopSignature, str]]:
        return frozenset((kb_path, api_path) for kb_path, api_path, _ in self.entries)

    def kind_of(self, kb_path: HopSignature, api_path: str) -> Optional[str]:
        for gold_kb, gold_api, kind in self.entries:
            if (gold_kb, gold_api) == (kb_path, api_path):
                return kind
        return None

    def to_dict(self) -> list[dict]:
        return [
            {
                "kb_path": [
                    {"predicate": p, "direction": d} for p, d in kb_path
                ],
                "api_path": api_path,
                "kind": kind,
            }
            for kb_path, api_path, kind in sorted(
                self.entries, key=lambda e: (e[1], e[0])
            )
        ]


def _gold_from_dict(data: Iterable[dict]) -> GoldAlignment:
    entries = set()
    for item in data:
        kb_path = tuple(
            (hop["predicate"], hop["direction"]) for hop in item["kb_path"]
        )
        entries.add((kb_path, item["api_path"], item["kind"]))
    return GoldAlignment(frozenset(entries))


def error_body(value: str) -> bytes:
    """The fixed 'not found' template every unknown key gets; only the echoed
    query value varies. The fixed part is long enough that two instances stay
    mutually similar above the clustering threshold even for long keys."""
    doc = {
        "status": "error",
        "code": 404,
        "message": (
            "No record could be resolved for the supplied key. Verify that "
            "the identifier or title is spelled exactly as catalogued, "
            "including punctuation and case, or consult the coverage notes "
            "for this collection before retrying. Automated clients should "
            "treat this condition as permanent for the given key and avoid "
            "immediate retries."
        ),
        "documentation": "https://api.mock.invalid/docs/errors#record-not-found",
        "query": value,
    }
    return json.dumps(doc).encode("utf-8")


def request_value_from_url(url: str) -> Optional[str]:
    parts = urlsplit(url)
    params = parse_qs(parts.query)
    if "q" in params and params["q"]:
        return params["q"][0]
    # Path-style templates: last path segment.
    tail = parts.path.rsplit("/", 1)[-1]
    return unquote(tail) if tail else None


class DictTransport:
    """In-process transport serving precomputed bodies keyed by request value.

    Unknown keys get the error template, mirroring APIs that answer 200 with
    a 'not found' document.
    """

    def __init__(self, responses: Mapping[str, bytes]):
        self._responses = dict(responses)

    def get(self, url: str, headers, timeout_ms: int) -> tuple[int, bytes]:
        value = request_value_from_url(url)
        if value is None:
            return 200, error_body("")
        body = self._responses.get(value)
        if body is None:
            return 200, error_body(value)
        return 200, body


@dataclass
class SyntheticPair:
    kb: KnowledgeBase
    kb_text: str
    endpoint: ApiEndpoint
    responses: dict[str, bytes]
    gold: GoldAlignment
    config: SyntheticPairConfig

    def transport(self) -> DictTransport:
        return DictTransport(self.responses)


def _abbreviate(name: str) -> str:
    first, _, rest = name.partition(" ")
    return f"{first[0]}. {rest}" if rest else name


def _reformat_identifier(doi: str, rng: random.Random) -> str:
    # Variants keep the alphanumeric content so a normalizing comparator
    # still recognizes them.
    variant = rng.randrange(3)
    if variant == 0:
        return doi.upper()
    if variant == 1:
        return doi.replace("/", "-").replace(".", "-")
    return doi


def generate_pair(config: SyntheticPairConfig) -> SyntheticPair:
    """Build the KB, the keyed mock responses, and the gold alignment."""
    rng = random.Random(f"pair:{config.seed}")

    author_count = max(8, config.entity_count // 3)
    author_names: list[str] = []
    for _ in range(author_count):
        author_names.append(
            f"{rng.choice(_FIRST_NAMES)} {rng.choice(_LAST_NAMES)}"
        )
    # Guarantee some shared person names: quasi-unique names would make the
    # name relation look like an identifier.
    duplicates = max(1, author_count // 8)
    for i in range(duplicates):
        author_names[author_count - 1 - i] = author_names[i]

    titles: set[str] = set()
    lines: list[str] = []
    records: list[dict] = []
    dois: list[str] = []
    title_by_index: list[str] = []

    for j, name in enumerate(author_names):
        person = f"{EX}person/{j}"
        lines.append(f"<{person}> <{RDF_TYPE}> <{CLASS_PERSON}> .")
        lines.append(f'<{person}> <{REL_NAME}> "{name}" .')

    for i in range(config.entity_count):
        while True:
            title = (
                f"{rng.choice(_TITLE_HEADS)} {rng.choice(_TITLE_CORES)} "
                f"{rng.choice(_TITLE_TAILS)}"
            )
            if title not in titles:
                break
            title = f"{title}, Part {i}"
            if title not in titles:
                break
        titles.add(title)
        doi = f"10.{rng.randint(1000, 9999)}/{rng.randrange(16**6):06x}.{i}"
        year = rng.randint(1990, 2023)
        publisher = rng.choice(_PUBLISHERS)
        n_authors = rng.randint(1, 5)
        author_ids = rng.sample(range(author_count), n_authors)

        pub = f"{EX}pub/{i}"
        creator_list = f"{EX}pub/{i}/creators"
        lines.append(f"<{pub}> <{RDF_TYPE}> <{CLASS_PUBLICATION}> .")
        lines.append(f'<{pub}> <{REL_TITLE}> "{title}" .')
        lines.append(f'<{pub}> <{REL_DOI}> "{doi}" .')
        lines.append(f'<{pub}> <{REL_YEAR}> "{year}" .')
        lines.append(f'<{pub}> <{REL_PUBLISHER}> "{publisher}" .')
        lines.append(f"<{pub}> <{REL_CREATOR_LIST}> <{creator_list}> .")
        for j in author_ids:
            lines.append(f"<{creator_list}> <{REL_MEMBER}> <{EX}person/{j}> .")

        record: dict = {
            "label": title,
            "doi": (
                _reformat_identifier(doi, rng)
                if rng.random() < config.identifier_reformat_prob
                else doi
            ),
            "facets": [
                {"name": "year", "value": year},
                {"name": "publisher", "value": publisher},
            ],
            "authors": [
                {
                    "name": (
                        _abbreviate(author_names[j])
                        if rng.random() < config.name_abbreviation_prob
                        else author_names[j]
                    )
                }
                for j in author_ids
            ],
        }
        if config.extra_leaf_count:
            record["meta"] = {
                f"key{k}": f"{rng.getrandbits(128):032x}"
                for k in range(config.extra_leaf_count)
            }
        records.append(record)
        dois.append(doi)
        title_by_index.append(title)

    responses: dict[str, bytes] = {}
    for i in range(config.entity_count):
        if rng.random() < config.error_response_prob:
            body = error_body(dois[i])
        elif rng.random() < config.wrong_record_prob and config.entity_count > 1:
            other = rng.randrange(config.entity_count - 1)
            if other >= i:
                other += 1
            body = json.dumps(records[other]).encode("utf-8")
        else:
            body = json.dumps(records[i]).encode("utf-8")
        responses[dois[i]] = body
        if config.title_keyed:
            responses[title_by_index[i]] = body

    kb_text = "\n".join(lines) + "\n"
    kb = load_kb(kb_text.encode("utf-8"))
    endpoint = ApiEndpoint(
        name="mock",
        url_template=MOCK_URL_TEMPLATE,
        input_class=CLASS_PUBLICATION,
        rate_limit_ms=0,
        timeout_ms=1000,
        max_retries=0,
    )
    gold = GoldAlignment(
        frozenset(
            {
                (((REL_TITLE, FORWARD),), "label", "FPM"),
                (((REL_DOI, FORWARD),), "doi", "FPM"),
                (((REL_YEAR, FORWARD),), "facets.0.value", "FPM"),
                (((REL_PUBLISHER, FORWARD),), "facets.1.value", "FPM"),
                (
                    (
                        (REL_CREATOR_LIST, FORWARD),
                        (REL_MEMBER, FORWARD),
                        (REL_NAME, FORWARD),
                    ),
                    "authors.*.name",
                    "BPM",
                ),
            }
        )
    )
    return SyntheticPair(
        kb=kb,
        kb_text=kb_text,
        endpoint=endpoint,
        responses=responses,
        gold=gold,
        config=config,
    )


# --- fixture persistence -----------------------------------------------------


def write_fixtures(pair: SyntheticPair, directory: Union[str, Path]) -> Path:
    """Persist a pair as kb.nt, gold.json and one JSON file per keyed response
    so the CLI (or service) can replay it without the generator."""
    root = Path(directory)
    (root / "responses").mkdir(parents=True, exist_ok=True)
    (root / "kb.nt").write_text(pair.kb_text, encoding="utf-8")
    (root / "gold.json").write_text(
        json.dumps(pair.gold.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    index: dict[str, str] = {}
    for n, (value, body) in enumerate(sorted(pair.responses.items())):
        filename = f"r{n:05d}.json"
        (root / "responses" / filename).write_bytes(body)
        index[value] = filename
    (root / "responses" / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (root / "endpoint.json").write_text(
        json.dumps(
            {
                "url_template": pair.endpoint.url_template,
                "input_class": pair.endpoint.input_class,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return root


def load_gold(path: Union[str, Path]) -> GoldAlignment:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return _gold_from_dict(data)


class FixtureTransport:
    """Replays a persisted fixture directory through the transport interface."""

    def __init__(self, directory: Union[str, Path]):
        root = Path(directory)
        index = json.loads(
            (root / "responses" / "index.json").read_text(encoding="utf-8")
        )
        self._responses = {
            value: (root / "responses" / filename).read_bytes()
            for value, filename in index.items()
        }

    def get(self, url: str, headers, timeout_ms: int) -> tuple[int, bytes]:
        value = request_value_from_url(url)
        if value is None:
            return 200, error_body("")
        body = self._responses.get(value)
        if body is None:
            return 200, error_body(value)
        return 200, body


class LoopbackServer:
    """Serves a pair's responses over real HTTP on 127.0.0.1 for integration
    tests of the network transport. Use as a context manager; ``endpoint``
    yields the pair's endpoint rebound to the ephemeral port."""

    def __init__(self, pair: "SyntheticPair"):
        responses = dict(pair.responses)

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self) -> None:  # noqa: N802 (http.server API)
                value = request_value_from_url(self.path)
                body = responses.get(value) if value else None
                if body is None:
                    body = error_body(value or "")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args) -> None:
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._pair = pair

    @property
    def endpoint(self) -> ApiEndpoint:
        host, port = self._server.server_address[:2]
        source = self._pair.endpoint
        return ApiEndpoint(
            name=source.name,
            url_template=f"http://{host}:{port}/record?q={{value}}",
            input_class=source.input_class,
            rate_limit_ms=source.rate_limit_ms,
            timeout_ms=source.timeout_ms,
            max_retries=source.max_retries,
        )

    def __enter__(self) -> "LoopbackServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


# --- evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class EvaluationResult:
    precision: float
    recall: float
    f1: float
    correct: int
    found: int
    gold_size: int
    kind_matches: int

    def as_tuple(self) -> tuple[float, float, float]:
        return self.precision, self.recall, self.f1


def evaluate(
    found: Iterable[AlignmentEntry], gold: GoldAlignment
) -> EvaluationResult:
    """Precision/recall/F1 of discovered alignments against the gold standard.

    Correctness is judged on (kb_path, api_path) only; the FPM/BPM kind is
    scored separately. Entries found through different input relations count
    once.
    """
    found_pairs: dict[tuple[HopSignature, str], str] = {}
    for entry in found:
        found_pairs.setdefault((entry.kb_path, entry.api_path), entry.kind)
    gold_pairs = gold.pairs()
    correct_pairs = set(found_pairs) & gold_pairs
    correct = len(correct_pairs)
    if found_pairs:
        precision = correct / len(found_pairs)
    else:
        precision = 1.0 if not gold_pairs else 0.0
    recall = correct / len(gold_pairs) if gold_pairs else 1.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    kind_matches = sum(
        1
        for pair in correct_pairs
        if gold.kind_of(*pair) == found_pairs[pair]
    )
    return EvaluationResult(
        precision=precision,
        recall=recall,
        f1=f1,
        correct=correct,
        found=len(found_pairs),
        gold_size=len(gold_pairs),
        kind_matches=kind_matches,
    )


