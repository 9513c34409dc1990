"""FastAPI service wrapping the alignment engine.

Knowledge bases are loaded lazily and cached per name, so repeated probe and
alignment requests against the same KB reuse the indexed store. APIs declared
with a ``fixtures`` directory are replayed in-process; everything else goes
through the real HTTP transport.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Union

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..alignment import run_alignment
from ..config import (
    GlobalSettings,
    Registry,
    load_registry,
    parse_settings,
)
from ..connector import ApiConnector, ApiEndpoint, HttpxTransport
from ..errors import ConfigError, KbLoadError, LinkpointError, ProbeError
from ..harness import FixtureTransport
from ..identifiers import extract_identifier_relations
from ..kb import KnowledgeBase, load_kb
from ..probing import probe
from .schemas import (
    AlignRequest,
    AlignResponse,
    HealthResponse,
    IdentifiersRequest,
    IdentifiersResponse,
    ProbeRequest,
    ProbeResponse,
    RegistryResponse,
)

logger = logging.getLogger(__name__)


class EngineState:
    """Registry plus a KB cache shared by all requests."""

    def __init__(self, registry: Registry, settings: GlobalSettings):
        self.registry = registry
        self.settings = settings
        self._kb_cache: dict[str, KnowledgeBase] = {}
        self._lock = threading.Lock()

    def resolve_settings(self, overrides: dict | None) -> GlobalSettings:
        if not overrides:
            return self.settings
        merged = {**self.settings.model_dump(), **overrides}
        return parse_settings(merged)

    def get_kb(self, name: str) -> KnowledgeBase:
        entry = self.registry.kbs.get(name)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown KB: {name}")
        with self._lock:
            kb = self._kb_cache.get(name)
            if kb is None:
                try:
                    kb = load_kb(entry.path, type_predicate=entry.type_predicate)
                except KbLoadError as exc:
                    raise HTTPException(status_code=400, detail=str(exc)) from exc
                self._kb_cache[name] = kb
            return kb

    def get_api(self, name: str) -> tuple[ApiEndpoint, ApiConnector]:
        entry = self.registry.apis.get(name)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown API: {name}")
        try:
            endpoint = entry.to_endpoint(name)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if entry.fixtures:
            try:
                transport = FixtureTransport(entry.fixtures)
            except OSError as exc:
                raise HTTPException(
                    status_code=400, detail=f"cannot read fixtures for API {name}: {exc}"
                ) from exc
        else:
            transport = HttpxTransport()
        return endpoint, ApiConnector(transport)


def create_app(
    registry: Union[str, Path, Registry],
    settings: Union[str, Path, GlobalSettings, None] = None,
) -> FastAPI:
    if not isinstance(registry, Registry):
        registry = load_registry(registry)
    if settings is None:
        settings = GlobalSettings()
    elif not isinstance(settings, GlobalSettings):
        from ..config import load_settings

        settings = load_settings(settings)

    state = EngineState(registry, settings)
    app = FastAPI(title="linkpoint", version=__version__)
    app.state.engine = state

    @app.exception_handler(ConfigError)
    async def _config_error(request, exc: ConfigError):  # noqa: ANN001
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.get("/registry", response_model=RegistryResponse)
    def registry_names() -> RegistryResponse:
        return RegistryResponse(
            kbs=sorted(state.registry.kbs), apis=sorted(state.registry.apis)
        )

    @app.post("/identifiers", response_model=IdentifiersResponse)
    def identifiers(request: IdentifiersRequest) -> IdentifiersResponse:
        settings = state.resolve_settings(request.settings)
        kb = state.get_kb(request.kb)
        id_set = extract_identifier_relations(
            kb, settings.theta_id, settings.identifier_min_count
        )
        return IdentifiersResponse(
            kb=request.kb,
            theta_id=settings.theta_id,
            identifier_relations=id_set.to_dict(),
        )

    @app.post("/probe", response_model=ProbeResponse)
    def probe_endpoint(request: ProbeRequest) -> ProbeResponse:
        settings = state.resolve_settings(request.settings)
        kb = state.get_kb(request.kb)
        endpoint, connector = state.get_api(request.api)
        try:
            report = probe(
                kb,
                endpoint,
                connector,
                n_p=settings.n_p,
                seed=settings.seed,
                theta_err=settings.theta_err,
                min_valid_fraction=settings.min_valid_fraction,
            )
        except ProbeError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        return ProbeResponse(kb=request.kb, api=request.api, probe=report.to_dict())

    @app.post("/align", response_model=AlignResponse)
    def align(request: AlignRequest) -> AlignResponse:
        settings = state.resolve_settings(request.settings)
        kb = state.get_kb(request.kb)
        endpoint, connector = state.get_api(request.api)
        try:
            result = run_alignment(kb, endpoint, connector, settings)
        except ProbeError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        except LinkpointError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        payload = result.to_dict()
        return AlignResponse(kb=request.kb, api=request.api, **payload)

    return app
