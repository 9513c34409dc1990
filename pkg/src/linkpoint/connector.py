"""Parameterized HTTP GET access to registered endpoints.

The transport is an injectable interface so the engine never needs a real
network in tests: anything with a ``get(url, headers, timeout_ms)`` method
returning ``(status, body)`` works. The connector adds per-endpoint request
spacing and retries on transport failures.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol
from urllib.parse import quote

import httpx

from .errors import ConfigError, TransportError

logger = logging.getLogger(__name__)

PLACEHOLDER = "{value}"


@dataclass
class ApiEndpoint:
    name: str
    url_template: str
    input_class: str
    rate_limit_ms: int = 0
    timeout_ms: int = 10_000
    max_retries: int = 2
    backoff_ms: int = 100
    headers: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.url_template.count(PLACEHOLDER) != 1:
            raise ConfigError(
                f"endpoint {self.name!r}: url_template must contain "
                f"{PLACEHOLDER!r} exactly once"
            )
        if self.rate_limit_ms < 0:
            raise ConfigError(f"endpoint {self.name!r}: rate_limit_ms must be >= 0")
        if self.timeout_ms <= 0:
            raise ConfigError(f"endpoint {self.name!r}: timeout_ms must be > 0")


@dataclass(frozen=True)
class ApiResponse:
    status: int
    body: bytes
    request_value: str
    latency_ms: float

    def __post_init__(self) -> None:
        if not 100 <= self.status <= 599:
            raise ValueError(f"implausible HTTP status: {self.status}")

    @property
    def ok(self) -> bool:
        return 200 <= self.status < 300

    def text(self) -> str:
        return self.body.decode("utf-8", errors="replace")


def build_request_url(endpoint: ApiEndpoint, value: str) -> str:
    """Substitute the percent-encoded value into the endpoint template."""
    if not value:
        raise ValueError("input value must be nonempty")
    return endpoint.url_template.replace(PLACEHOLDER, quote(value, safe=""))


class Transport(Protocol):
    def get(
        self, url: str, headers: Mapping[str, str], timeout_ms: int
    ) -> tuple[int, bytes]: ...


class HttpxTransport:
    """Real HTTP transport; redirects followed, network errors become
    :class:`TransportError`."""

    def __init__(self) -> None:
        self._client = httpx.Client(follow_redirects=True)

    def get(
        self, url: str, headers: Mapping[str, str], timeout_ms: int
    ) -> tuple[int, bytes]:
        try:
            response = self._client.get(
                url, headers=dict(headers), timeout=timeout_ms / 1000.0
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        return response.status_code, response.content

    def close(self) -> None:
        self._client.close()


class ApiConnector:
    """Issues requests for endpoints through an injected transport.

    Requests to the same endpoint are serialized and spaced at least
    ``rate_limit_ms`` apart; transport failures are retried with exponential
    backoff up to ``max_retries`` extra attempts.
    """

    def __init__(
        self,
        transport: Transport,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ):
        self._transport = transport
        self._sleep = sleep
        self._clock = clock
        self._last_request: dict[str, float] = {}
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    def fetch(self, endpoint: ApiEndpoint, value: str) -> ApiResponse:
        url = build_request_url(endpoint, value)
        headers = {"Accept": "application/json", **endpoint.headers}
        attempts = endpoint.max_retries + 1
        with self._locks[endpoint.name]:
            for attempt in range(attempts):
                self._respect_rate_limit(endpoint)
                start = self._clock()
                try:
                    status, body = self._transport.get(url, headers, endpoint.timeout_ms)
                except TransportError as exc:
                    if attempt + 1 == attempts:
                        logger.warning(
                            "endpoint %s: giving up on %r after %d attempt(s): %s",
                            endpoint.name, value, attempts, exc,
                        )
                        raise
                    self._sleep(endpoint.backoff_ms / 1000.0 * (2**attempt))
                    continue
                latency_ms = (self._clock() - start) * 1000.0
                return ApiResponse(status, body, value, latency_ms)
        raise AssertionError("unreachable")

    def _respect_rate_limit(self, endpoint: ApiEndpoint) -> None:
        if endpoint.rate_limit_ms <= 0:
            self._last_request[endpoint.name] = self._clock()
            return
        last = self._last_request.get(endpoint.name)
        if last is not None:
            wait = endpoint.rate_limit_ms / 1000.0 - (self._clock() - last)
            if wait > 0:
                self._sleep(wait)
        self._last_request[endpoint.name] = self._clock()
