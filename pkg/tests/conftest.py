"""Shared fixtures: a small bibliographic KB fragment and a matching
single-record response, mirroring the list-shaped structure real dumps use."""

from __future__ import annotations

import json

import pytest

from linkpoint.kb import KnowledgeBase, load_kb

EX = "http://example.org/"
PUB = EX + "pub/1"
PUB2 = EX + "pub/2"
PERSON = EX + "person/1"
CREATORS = EX + "pub/1/creators"

FRAGMENT_NT = f"""
<{PUB}> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <{EX}Publication> .
<{PUB}> <{EX}title> "Some example Title" .
<{PUB}> <{EX}doi> "10.1000/182" .
<{PUB}> <{EX}year> "2020" .
<{PUB}> <{EX}creatorList> <{CREATORS}> .
<{CREATORS}> <{EX}member> <{PERSON}> .
<{PERSON}> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <{EX}Person> .
<{PERSON}> <{EX}name> "Grace Hopper" .
<{PUB2}> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <{EX}Publication> .
<{PUB2}> <{EX}title> "Another Survey" .
<{PUB2}> <{EX}year> "2020" .
"""

RESPONSE_DOC = {
    "label": "Some example Title",
    "doi": "10.1000/182",
    "authors": [{"name": "Grace Hopper"}],
    "facets": [
        {"name": "year", "value": "2020"},
        {"name": "genre", "value": "Computer Science"},
    ],
}


@pytest.fixture
def fragment_kb() -> KnowledgeBase:
    return load_kb(FRAGMENT_NT.encode("utf-8"))


@pytest.fixture
def response_body() -> bytes:
    return json.dumps(RESPONSE_DOC).encode("utf-8")
