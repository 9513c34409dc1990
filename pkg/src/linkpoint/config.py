"""Global settings and data-source registry, both plain JSON files.

Settings carry every tunable threshold with its default; unknown keys are
rejected so typos fail loudly. The registry names the knowledge bases and API
endpoints a run may refer to.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .connector import ApiEndpoint
from .errors import ConfigError
from .kb import RDF_TYPE


class GlobalSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theta_id: float = Field(default=0.99, gt=0, le=1)
    theta_str: float = Field(default=0.5, ge=0, le=1)
    theta_rec: float = Field(default=0.1, ge=0, le=1)
    theta_err: float = Field(default=0.80, ge=0, le=1)
    n_p: int = Field(default=25, ge=1)
    n_r: int = Field(default=75, ge=1)
    max_depth: int = Field(default=3, ge=1)
    min_valid_fraction: float = Field(default=0.2, ge=0, le=1)
    bpm_support_fraction: float = Field(default=0.5, ge=0, le=1)
    identifier_min_count: int = Field(default=10, ge=1)
    identifier_comparator: str = "normalized-exact"
    seed: int = 0
    output_path: str = "alignment.json"


class KbRegistration(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str
    type_predicate: str = RDF_TYPE


class ApiRegistration(BaseModel):
    model_config = ConfigDict(extra="forbid")

    url_template: str
    input_class: str
    rate_limit_ms: int = Field(default=0, ge=0)
    timeout_ms: int = Field(default=10_000, gt=0)
    max_retries: int = Field(default=2, ge=0)
    backoff_ms: int = Field(default=100, ge=0)
    headers: dict[str, str] = Field(default_factory=dict)
    # Directory of recorded responses; when set, the service replays them
    # instead of touching the network.
    fixtures: Optional[str] = None

    def to_endpoint(self, name: str) -> ApiEndpoint:
        return ApiEndpoint(
            name=name,
            url_template=self.url_template,
            input_class=self.input_class,
            rate_limit_ms=self.rate_limit_ms,
            timeout_ms=self.timeout_ms,
            max_retries=self.max_retries,
            backoff_ms=self.backoff_ms,
            headers=self.headers,
        )


class Registry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kbs: dict[str, KbRegistration] = Field(default_factory=dict)
    apis: dict[str, ApiRegistration] = Field(default_factory=dict)


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    location = ".".join(str(part) for part in err["loc"]) or "<root>"
    return f"{location}: {err['msg']}"


def _load_json(path: Union[str, Path], what: str) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from exc


def parse_settings(data: object) -> GlobalSettings:
    try:
        return GlobalSettings.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid settings: {_first_error(exc)}") from exc


def load_settings(path: Union[str, Path]) -> GlobalSettings:
    """Read a settings file; missing keys take defaults, unknown keys fail."""
    return parse_settings(_load_json(path, "settings"))


def parse_registry(data: object) -> Registry:
    try:
        return Registry.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid registry: {_first_error(exc)}") from exc


def load_registry(path: Union[str, Path]) -> Registry:
    return parse_registry(_load_json(path, "registry"))


def canonical_json(data: object) -> str:
    """Stable serialization used for result files (byte-identical reruns)."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
