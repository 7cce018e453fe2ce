"""Command-line client for the platform gateway.

Every subcommand issues exactly one REST call; the only local state is
the CLI config file (server URL, token, defaults), written with owner-only
permissions.  ``--output json`` emits the raw HTTP response body,
byte for byte.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
import requests

REQUEST_TIMEOUT = 630.0  # blocking invokes may legitimately take minutes

_STATUS_COLORS = {
    "DONE": "green",
    "DEPLOYED": "green",
    "RUNNING": "yellow",
    "BUILDING": "yellow",
    "QUEUED": "yellow",
    "ERROR": "red",
    "FAILED": "red",
}


@dataclass
class CliConfig:
    server_url: str = "http://127.0.0.1:8000"
    token: str = ""
    default_provider: Optional[str] = None
    output_format: str = "table"


def config_path() -> Path:
    override = os.environ.get("QFAAS_CLI_CONFIG")
    if override:
        return Path(override)
    return Path.home() / ".config" / "qfaas" / "cli.json"


def load_cli_config() -> CliConfig:
    path = config_path()
    if not path.is_file():
        return CliConfig()
    try:
        raw = json.loads(path.read_text())
    except ValueError:
        return CliConfig()
    return CliConfig(
        server_url=raw.get("serverUrl", CliConfig.server_url),
        token=raw.get("token", ""),
        default_provider=raw.get("defaultProvider"),
        output_format=raw.get("outputFormat", "table"),
    )


def save_cli_config(cfg: CliConfig) -> None:
    path = config_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(
        {
            "serverUrl": cfg.server_url,
            "token": cfg.token,
            "defaultProvider": cfg.default_provider,
            "outputFormat": cfg.output_format,
        },
        indent=2,
    )
    # The file holds a bearer token: owner read/write only.
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    try:
        os.write(fd, (payload + "\n").encode())
    finally:
        os.close(fd)
    os.chmod(path, 0o600)


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _style_status(value: str) -> str:
    color = _STATUS_COLORS.get(value)
    if color and _use_color():
        return click.style(value, fg=color)
    return value


def _request(
    cfg: CliConfig,
    method: str,
    path: str,
    body: Optional[Dict[str, Any]] = None,
) -> requests.Response:
    url = cfg.server_url.rstrip("/") + path
    headers = {}
    if cfg.token:
        headers["Authorization"] = f"Bearer {cfg.token}"
    try:
        return requests.request(
            method, url, json=body, headers=headers, timeout=REQUEST_TIMEOUT
        )
    except requests.RequestException as exc:
        click.echo(f"error ConnectionError: {exc}", err=True)
        sys.exit(1)


def _emit(resp: requests.Response, fmt: str, render=None) -> None:
    if fmt == "json":
        sys.stdout.buffer.write(resp.content)
        sys.stdout.buffer.flush()
        if not resp.ok:
            sys.exit(1)
        return
    if not resp.ok:
        try:
            err = resp.json()
        except ValueError:
            err = {"code": str(resp.status_code), "message": resp.text.strip()}
        line = f"error {err.get('code', resp.status_code)}: {err.get('message', '')}"
        detail = err.get("detail")
        if detail:
            line += f" {json.dumps(detail)}"
        click.echo(line, err=True)
        sys.exit(1)
    data = resp.json()
    if render is not None:
        render(data)
    else:
        _render_value(data)


def _render_value(value: Any, indent: str = "") -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                click.echo(f"{indent}{key}:")
                _render_value(item, indent + "  ")
            else:
                shown = item if not isinstance(item, (dict, list)) else item
                if isinstance(item, str):
                    shown = _style_status(item)
                click.echo(f"{indent}{key}: {shown}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                _render_value(item, indent + "  ")
                click.echo("")
            else:
                click.echo(f"{indent}- {item}")
    else:
        click.echo(f"{indent}{value}")


def _table(rows: List[Dict[str, Any]], columns: List[str]) -> None:
    if not rows:
        click.echo("(none)")
        return
    cells = [[_cell(row.get(col)) for col in columns] for row in rows]
    widths = [
        max(len(columns[i]), max(len(row[i]) for row in cells))
        for i in range(len(columns))
    ]
    click.echo("  ".join(col.ljust(widths[i]) for i, col in enumerate(columns)))
    click.echo("  ".join("-" * widths[i] for i in range(len(columns))))
    for row in cells:
        padded = [row[i].ljust(widths[i]) for i in range(len(columns))]
        line = "  ".join(padded).rstrip()
        for status, _color in _STATUS_COLORS.items():
            if status in line:
                line = line.replace(status, _style_status(status), 1)
                break
        click.echo(line)


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, (dict, list)):
        return json.dumps(value)
    return str(value)


def _page_renderer(columns: List[str]):
    def render(data: Any) -> None:
        items = data.get("items", []) if isinstance(data, dict) else data
        _table(items, columns)

    return render


def output_option(fn):
    return click.option(
        "--output",
        "output_format",
        type=click.Choice(["json", "table"]),
        default=None,
        help="Response rendering; json prints the raw body.",
    )(fn)


def _fmt(cfg: CliConfig, output_format: Optional[str]) -> str:
    return output_format or cfg.output_format


@click.group()
@click.version_option(package_name="qfaas", prog_name="qfaas")
def main() -> None:
    """Client for a hybrid quantum-classical FaaS platform."""


@main.command()
@click.option("--server", required=True, help="Gateway base URL.")
@click.option("--token", required=True, help="Bearer token.")
@click.option("--provider", default=None, help="Default provider for invokes.")
@click.option(
    "--output",
    "output_format",
    type=click.Choice(["json", "table"]),
    default=None,
    help="Default output format.",
)
def login(server: str, token: str, provider: Optional[str], output_format: Optional[str]) -> None:
    """Store gateway URL and credentials locally."""
    current = load_cli_config()
    cfg = CliConfig(
        server_url=server,
        token=token,
        default_provider=provider or current.default_provider,
        output_format=output_format or current.output_format,
    )
    save_cli_config(cfg)
    click.echo(f"credentials saved to {config_path()}")


# --- function lifecycle -------------------------------------------------------

@main.group(name="function")
def function_group() -> None:
    """Create, inspect, and manage functions."""


def _function_body(
    source_file: Optional[str],
    dialect: Optional[str],
    pre: Optional[str],
    post: Optional[str],
    template: Optional[str],
    config_json: Optional[str],
    replicas: Optional[int],
) -> Dict[str, Any]:
    body: Dict[str, Any] = {}
    if source_file is not None:
        body["source"] = Path(source_file).read_text()
    elif template is not None:
        body["source"] = "qir 1;\n"  # builtin templates carry no user circuit
    if dialect is not None:
        body["dialectTag"] = dialect
    processors = {}
    if pre is not None:
        processors["pre"] = pre
    if post is not None:
        processors["post"] = post
    if processors:
        body["processors"] = processors
    config: Dict[str, Any] = {}
    if config_json is not None:
        try:
            config = json.loads(config_json)
        except ValueError as exc:
            raise click.UsageError(f"--config is not valid JSON: {exc}")
        if not isinstance(config, dict):
            raise click.UsageError("--config must be a JSON object")
    if template is not None:
        config["template"] = template
    if config:
        body["config"] = config
    if replicas is not None:
        body["replicas"] = replicas
    return body


@function_group.command(name="create")
@click.argument("name")
@click.option("--source", "source_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dialect", default="qiskit", show_default=True)
@click.option("--pre", default=None, help="Pre-processing plugin name.")
@click.option("--post", default=None, help="Post-processing plugin name.")
@click.option("--template", default=None, help="Builtin template: qrng, dj, or shor.")
@click.option("--config", "config_json", default=None, help="Extra config as inline JSON.")
@click.option("--replicas", type=int, default=1, show_default=True)
@output_option
def function_create(
    name: str,
    source_file: Optional[str],
    dialect: str,
    pre: Optional[str],
    post: Optional[str],
    template: Optional[str],
    config_json: Optional[str],
    replicas: int,
    output_format: Optional[str],
) -> None:
    """Deploy a new function."""
    if source_file is None and template is None:
        raise click.UsageError("provide --source or --template")
    cfg = load_cli_config()
    body = _function_body(source_file, dialect, pre, post, template, config_json, replicas)
    body["name"] = name
    resp = _request(cfg, "POST", "/api/functions", body)

    def render(record: Dict[str, Any]) -> None:
        click.echo(
            f"{_style_status(record['status'])} {record['name']} "
            f"v{record['version']} {record['endpoint']}"
        )

    _emit(resp, _fmt(cfg, output_format), render)


@function_group.command(name="update")
@click.argument("name")
@click.option("--source", "source_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dialect", default=None)
@click.option("--pre", default=None)
@click.option("--post", default=None)
@click.option("--template", default=None)
@click.option("--config", "config_json", default=None)
@output_option
def function_update(
    name: str,
    source_file: Optional[str],
    dialect: Optional[str],
    pre: Optional[str],
    post: Optional[str],
    template: Optional[str],
    config_json: Optional[str],
    output_format: Optional[str],
) -> None:
    """Build and roll out a new version."""
    cfg = load_cli_config()
    body = _function_body(source_file, dialect, pre, post, template, config_json, None)
    if not body:
        raise click.UsageError("nothing to update")
    resp = _request(cfg, "PUT", f"/api/functions/{name}", body)

    def render(record: Dict[str, Any]) -> None:
        click.echo(
            f"{_style_status(record['status'])} {record['name']} "
            f"v{record['version']} {record['endpoint']}"
        )

    _emit(resp, _fmt(cfg, output_format), render)


@function_group.command(name="delete")
@click.argument("name")
@output_option
def function_delete(name: str, output_format: Optional[str]) -> None:
    """Remove a function and its endpoint."""
    cfg = load_cli_config()
    resp = _request(cfg, "DELETE", f"/api/functions/{name}")
    _emit(resp, _fmt(cfg, output_format))


@function_group.command(name="list")
@output_option
def function_list(output_format: Optional[str]) -> None:
    """List all functions."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", "/api/functions")
    _emit(
        resp,
        _fmt(cfg, output_format),
        _page_renderer(["name", "status", "version", "replicas", "endpoint"]),
    )


@function_group.command(name="get")
@click.argument("name")
@output_option
def function_get(name: str, output_format: Optional[str]) -> None:
    """Show one function record."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", f"/api/functions/{name}")
    _emit(resp, _fmt(cfg, output_format))


@function_group.command(name="scale")
@click.argument("name")
@click.argument("replicas", type=int)
@output_option
def function_scale(name: str, replicas: int, output_format: Optional[str]) -> None:
    """Set the warm replica count."""
    cfg = load_cli_config()
    resp = _request(cfg, "POST", f"/api/functions/{name}/scale", {"replicas": replicas})
    _emit(resp, _fmt(cfg, output_format))


@function_group.command(name="logs")
@click.argument("name")
@output_option
def function_logs(name: str, output_format: Optional[str]) -> None:
    """Show build and deployment logs."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", f"/api/functions/{name}/logs")

    def render(data: Dict[str, Any]) -> None:
        for line in data.get("build_log", []):
            click.echo(line)

    _emit(resp, _fmt(cfg, output_format), render)


# --- invocation ------------------------------------------------------------------

def _parse_input(raw: Optional[str]) -> Any:
    if raw is None:
        return None
    try:
        return json.loads(raw)
    except ValueError:
        return raw  # plain string input


@main.command()
@click.argument("name")
@click.option("--input", "input_value", default=None, help="Function input value.")
@click.option("--provider", default=None)
@click.option("--shots", type=int, default=None)
@click.option("--wait/--no-wait", "wait", default=None, help="Block for the result.")
@click.option("--backend", default=None, help="Named backend (disables autoselect).")
@click.option("--autoselect/--no-autoselect", "autoselect", default=None)
@click.option("--type", "backend_type", default=None, help="Backend type filter.")
@click.option("--seed", type=int, default=None, help="Pin the sampling seed.")
@click.option(
    "--body",
    "body_file",
    type=click.Path(exists=True, dir_okay=False),
    help="Raw JSON request file; flags override its fields.",
)
@output_option
def invoke(
    name: str,
    input_value: Optional[str],
    provider: Optional[str],
    shots: Optional[int],
    wait: Optional[bool],
    backend: Optional[str],
    autoselect: Optional[bool],
    backend_type: Optional[str],
    seed: Optional[int],
    body_file: Optional[str],
    output_format: Optional[str],
) -> None:
    """Invoke a deployed function."""
    cfg = load_cli_config()
    body: Dict[str, Any] = {}
    if body_file is not None:
        try:
            body = json.loads(Path(body_file).read_text())
        except ValueError as exc:
            raise click.UsageError(f"--body file is not valid JSON: {exc}")
        if not isinstance(body, dict):
            raise click.UsageError("--body file must hold a JSON object")

    if input_value is not None:
        body["input"] = _parse_input(input_value)
    if provider is not None:
        body["provider"] = provider
    elif "provider" not in body and cfg.default_provider:
        body["provider"] = cfg.default_provider
    if shots is not None:
        body["shots"] = shots
    if wait is not None:
        body["waitForResult"] = wait
    if seed is not None:
        body["seed"] = seed

    info = dict(body.get("backendInfo", body.get("backend_info", {})))
    if backend is not None:
        info["backendName"] = backend
    if autoselect is not None:
        info["autoselect"] = autoselect
    if backend_type is not None:
        info["type"] = backend_type
    if info:
        body.pop("backend_info", None)
        body["backendInfo"] = info

    resp = _request(cfg, "POST", f"/function/{name}", body)
    _emit(resp, _fmt(cfg, output_format))


# --- jobs, backends, system ---------------------------------------------------

@main.group(name="job")
def job_group() -> None:
    """Track submitted jobs."""


@job_group.command(name="get")
@click.argument("job_id")
@output_option
def job_get(job_id: str, output_format: Optional[str]) -> None:
    """Show one job."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", f"/api/jobs/{job_id}")
    _emit(resp, _fmt(cfg, output_format))


@job_group.command(name="list")
@output_option
def job_list(output_format: Optional[str]) -> None:
    """List your jobs."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", "/api/jobs")
    _emit(
        resp,
        _fmt(cfg, output_format),
        _page_renderer(
            ["job_id", "function_name", "status", "backend_name", "submit_time"]
        ),
    )


@main.group(name="backend")
def backend_group() -> None:
    """Inspect execution backends."""


@backend_group.command(name="list")
@output_option
def backend_list(output_format: Optional[str]) -> None:
    """List the backend catalog with live queue depths."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", "/api/backends")
    _emit(
        resp,
        _fmt(cfg, output_format),
        _page_renderer(
            ["name", "provider", "type", "qubits", "operational", "queue_length"]
        ),
    )


@main.group(name="system")
def system_group() -> None:
    """Platform-level views."""


@system_group.command(name="status")
@output_option
def system_status(output_format: Optional[str]) -> None:
    """Monitoring snapshot: functions, invocations, backends, jobs."""
    cfg = load_cli_config()
    resp = _request(cfg, "GET", "/api/system/status")
    _emit(resp, _fmt(cfg, output_format))


if __name__ == "__main__":
    main()
