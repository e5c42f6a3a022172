"""Thin HTTP client for the botune service.

Every verb talks to the API: against ``--server URL`` when given,
otherwise against an in-process application instance so no running
server is needed. Exit codes: 0 success, 1 config error, 2 data error.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import httpx

_EXIT_CODES = {"config": 1, "data": 2}


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.Client(transport=transport, base_url="http://botune.local", timeout=None)


def _fail(detail) -> None:
    if isinstance(detail, dict) and "category" in detail:
        click.echo(f"error ({detail['category']}): {detail['message']}", err=True)
        sys.exit(_EXIT_CODES.get(detail["category"], 1))
    click.echo(f"error: {detail}", err=True)
    sys.exit(1)


def _request(client: httpx.Client, method: str, url: str, **kwargs) -> dict:
    try:
        response = client.request(method, url, **kwargs)
    except httpx.HTTPError as exc:
        _fail(f"cannot reach service: {exc}")
    if response.status_code >= 400:
        try:
            _fail(response.json().get("detail"))
        except json.JSONDecodeError:
            _fail(f"HTTP {response.status_code}: {response.text}")
    return response.json()


@click.group()
def main() -> None:
    """Hyperparameter tuning experiments for anomaly-detection classifiers."""


@main.command()
@click.argument("config", type=click.Path())
@click.option("--server", default=None, help="Service URL; defaults to in-process.")
@click.option("--no-wait", is_flag=True, help="Submit as a background job and poll.")
def run(config: str, server: str | None, no_wait: bool) -> None:
    """Run the experiment described by the CONFIG file."""
    path = Path(config)
    if not path.exists():
        _fail({"category": "config", "message": f"config file not found: {path}"})
    payload = {
        "config_text": path.read_text(encoding="utf-8"),
        "base_dir": str(path.parent),
        "wait": not no_wait,
    }
    with _client(server) as client:
        status = _request(client, "POST", "/runs", json=payload)
        while status["status"] in ("queued", "running"):
            time.sleep(0.5)
            status = _request(client, "GET", f"/runs/{status['run_id']}")
    if status["status"] == "error":
        _fail(status["error"])
    click.echo(json.dumps(status, indent=2))


@main.command()
@click.option("--rows", default=5000, show_default=True)
@click.option("--features", default=14, show_default=True)
@click.option("--anomaly-fraction", default=1.0 / 3.0, show_default=True)
@click.option("--difficulty", default=0.3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="Output CSV path.")
@click.option("--schema-out", default=None, type=click.Path(), help="Schema file path.")
@click.option("--server", default=None)
def synth(rows, features, anomaly_fraction, difficulty, seed, out, schema_out, server) -> None:
    """Generate a synthetic benchmark CSV plus its schema file."""
    payload = {
        "n_rows": rows,
        "n_features": features,
        "anomaly_fraction": anomaly_fraction,
        "difficulty": difficulty,
        "seed": seed,
        "out_path": out,
        "schema_path": schema_out,
    }
    with _client(server) as client:
        result = _request(client, "POST", "/synth", json=payload)
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.argument("trials", type=click.Path())
@click.argument("out", type=click.Path())
@click.option("--server", default=None)
def trace(trials: str, out: str, server: str | None) -> None:
    """Convert a trial log (JSON lines) into a convergence-trace CSV."""
    with _client(server) as client:
        result = _request(client, "POST", "/trace", json={"trials_path": trials, "out_path": out})
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.argument("run_dir", type=click.Path())
@click.argument("param_x")
@click.argument("param_y")
@click.option("--family", default=None, help="Disambiguate when both params exist in several spaces.")
@click.option("--resolution", default=50, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--server", default=None)
def contour(run_dir, param_x, param_y, family, resolution, out, server) -> None:
    """Emit a posterior contour grid for two parameters of a finished run."""
    payload = {
        "run_dir": run_dir,
        "param_x": param_x,
        "param_y": param_y,
        "family": family,
        "resolution": resolution,
        "out_path": out,
    }
    with _client(server) as client:
        result = _request(client, "POST", "/contour", json=payload)
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("botune.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
