"""Command-line front end.

A thin client of the HTTP service: with ``--server`` it talks to a running
instance, otherwise it mounts the service in-process (no sockets) and speaks
to it over ASGI, so one-shot runs stay hermetic and deterministic.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

from .config import canonical_json
from .errors import ConfigError, LinkpointError
from .harness import (
    SyntheticPairConfig,
    generate_pair,
    standard_noise_config,
    write_fixtures,
    zero_noise_config,
)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_EMPTY = 2


def _read_settings_file(path: Optional[str]) -> Optional[dict]:
    if path is None:
        return None
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read settings file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"settings file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"settings file {path} must hold a JSON object")
    return data


async def _post_async(
    server: Optional[str], registry: str, path: str, payload: dict
) -> tuple[int, dict]:
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=3600) as client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()
    from .service.app import create_app

    app = create_app(registry)
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(
        transport=transport, base_url="http://linkpoint.local", timeout=3600
    ) as client:
        response = await client.post(path, json=payload)
        return response.status_code, response.json()


def _post(server: Optional[str], registry: str, path: str, payload: dict) -> tuple[int, dict]:
    try:
        return asyncio.run(_post_async(server, registry, path, payload))
    except (LinkpointError, httpx.HTTPError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)


def _fail_on_http_error(status: int, data: dict) -> None:
    if status >= 400:
        click.echo(f"error: {data.get('detail', data)}", err=True)
        sys.exit(EXIT_FATAL)


@click.group()
def main() -> None:
    """Discover linkage points between a registered KB and API."""


_registry_option = click.option(
    "--registry", default="registry.json", show_default=True,
    help="Registry file naming KBs and APIs.",
)
_server_option = click.option(
    "--server", default=None, help="Base URL of a running service; default runs in-process.",
)
_settings_option = click.option(
    "--settings", "settings_path", default=None, help="Settings overrides (JSON file).",
)


@main.command()
@click.option("--kb", required=True, help="Registered KB name.")
@click.option("--api", required=True, help="Registered API name.")
@_settings_option
@click.option("--out", "out_path", default=None, help="Result file path.")
@_registry_option
@_server_option
def align(kb: str, api: str, settings_path: Optional[str], out_path: Optional[str],
          registry: str, server: Optional[str]) -> None:
    """Run probing plus alignment and write the result JSON."""
    try:
        settings = _read_settings_file(settings_path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    payload = {"kb": kb, "api": api, "settings": settings}
    status, data = _post(server, registry, "/align", payload)
    _fail_on_http_error(status, data)

    out = out_path or (settings or {}).get("output_path") or "alignment.json"
    Path(out).write_text(canonical_json(data), encoding="utf-8")

    entries = data.get("alignment", [])
    click.echo(f"valid input relations: {', '.join(data['probe']['valid_input_relations']) or '(none)'}")
    if entries:
        width = max(len(_kb_path_str(e)) for e in entries)
        for entry in entries:
            click.echo(
                f"{_kb_path_str(entry):<{width}}  ->  {entry['api_path']}"
                f"  [{entry['kind']}, {entry['method']}, confidence {entry['confidence']:.2f}]"
            )
    else:
        click.echo("no alignments found")
    click.echo(f"result written to {out}")
    sys.exit(EXIT_OK if entries else EXIT_EMPTY)


def _kb_path_str(entry: dict) -> str:
    hops = []
    for hop in entry["kb_path"]:
        marker = "^" if hop["direction"] == "inverse" else ""
        hops.append(marker + hop["predicate"])
    return ".".join(hops)


@main.command()
@click.option("--kb", required=True)
@click.option("--api", required=True)
@_settings_option
@_registry_option
@_server_option
def probe(kb: str, api: str, settings_path: Optional[str], registry: str,
          server: Optional[str]) -> None:
    """Run only the probing phase and print the report."""
    try:
        settings = _read_settings_file(settings_path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    status, data = _post(server, registry, "/probe", {"kb": kb, "api": api, "settings": settings})
    _fail_on_http_error(status, data)
    report = data["probe"]
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    sys.exit(EXIT_OK if report["valid_input_relations"] else EXIT_EMPTY)


@main.command()
@click.option("--kb", required=True)
@_settings_option
@_registry_option
@_server_option
def identifiers(kb: str, settings_path: Optional[str], registry: str,
                server: Optional[str]) -> None:
    """Print the KB's identifier relations with their inverse functionality."""
    try:
        settings = _read_settings_file(settings_path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    status, data = _post(server, registry, "/identifiers", {"kb": kb, "settings": settings})
    _fail_on_http_error(status, data)
    relations = data["identifier_relations"]
    if not relations:
        click.echo("(no identifier relations)")
    for item in relations:
        click.echo(f"{item['relation']}\t{item['inverse_functionality']:.4f}")
    sys.exit(EXIT_OK)


@main.command()
@_registry_option
@click.option("--settings", "settings_path", default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(registry: str, settings_path: Optional[str], host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    try:
        app = create_app(registry, settings_path)
    except LinkpointError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--out", "out_dir", required=True, help="Directory for the fixture set.")
@click.option("--entities", default=200, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--noise", type=click.Choice(["none", "standard"]), default="standard",
              show_default=True)
@click.option("--title-keyed", is_flag=True, default=False,
              help="Also key responses by (unique) title.")
def fixtures(out_dir: str, entities: int, seed: int, noise: str, title_keyed: bool) -> None:
    """Generate a synthetic KB/API fixture directory plus a ready registry."""
    config: SyntheticPairConfig
    if noise == "standard":
        config = standard_noise_config(seed=seed, entity_count=entities, title_keyed=title_keyed)
    else:
        config = zero_noise_config(seed=seed, entity_count=entities, title_keyed=title_keyed)
    pair = generate_pair(config)
    root = write_fixtures(pair, out_dir)
    registry = {
        "kbs": {"synthetic": {"path": str(root / "kb.nt")}},
        "apis": {
            "mock": {
                "url_template": pair.endpoint.url_template,
                "input_class": pair.endpoint.input_class,
                "fixtures": str(root),
            }
        },
    }
    registry_path = root / "registry.json"
    registry_path.write_text(canonical_json(registry), encoding="utf-8")
    click.echo(f"fixtures written to {root}")
    click.echo(f"registry written to {registry_path}")


if __name__ == "__main__":
    main()
