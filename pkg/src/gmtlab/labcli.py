"""Command line client.

By default commands run in-process through the same dispatcher the HTTP
service uses; ``--server URL`` sends the request to a running service instead.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .commands import COMMANDS, dispatch
from .errors import GmtlabError, PreconditionError

EXIT_OK, EXIT_PRECONDITION, EXIT_VERIFICATION = 0, 2, 3


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def csv_rows(report: dict) -> list:
    res = report.get("result", {})
    rows = res.get("measurements") or res.get("rows") or [res]
    return [_flatten(r) for r in rows]


def write_csv(path: Path, report: dict):
    rows = csv_rows(report)
    cols = sorted({c for r in rows for c in r})
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def _load_spec(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PreconditionError(f"cannot read spec file: {exc}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"spec file is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise PreconditionError("spec file must hold a JSON object")
    return spec


def _remote(server: str, command: str, kind, spec: dict, seed: int, threads: int) -> dict:
    import httpx

    url = server.rstrip("/") + f"/{command}" + (f"/{kind}" if kind else "")
    try:
        r = httpx.post(url, json={"spec": spec, "seed": seed, "threads": threads}, timeout=None)
    except httpx.HTTPError as exc:
        raise GmtlabError(f"service unreachable: {exc}") from None
    body = r.json()
    if r.status_code != 200:
        err = PreconditionError if body.get("exit_code") == 2 else GmtlabError
        exc = err(body.get("error", "service error"))
        exc.exit_code = body.get("exit_code", 1)
        exc.witness = body.get("witness")
        raise exc
    return body


def run_command(command: str, kind, spec_path: str, out: str, as_csv: bool, seed: int,
                threads: int, server=None) -> int:
    out_path = Path(out)
    try:
        spec = _load_spec(spec_path)
        if server:
            report = _remote(server, command, kind, spec, seed, threads)
        else:
            report = dispatch(command, spec, kind, seed, threads)
    except GmtlabError as exc:
        err = {"error": str(exc), "exit_code": exc.exit_code,
               "witness": getattr(exc, "witness", None)}
        out_path.write_text(dumps(err))
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    out_path.write_text(dumps(report))
    if as_csv:
        write_csv(out_path.with_suffix(".csv"), report)
    return EXIT_OK


def _make(command: str):
    @click.argument("kind", required=command == "experiment")
    @click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False),
                  help="JSON spec file.")
    @click.option("--out", required=True, type=click.Path(dir_okay=False),
                  help="Where to write the JSON report.")
    @click.option("--csv", "as_csv", is_flag=True, help="Also write a flattened CSV next to --out.")
    @click.option("--seed", default=0, show_default=True, type=int)
    @click.option("--threads", default=1, show_default=True, type=click.IntRange(1, 64))
    @click.option("--server", default=None, help="Send the request to a running service.")
    def cmd(kind, spec_path, out, as_csv, seed, threads, server):
        sys.exit(run_command(command, kind, spec_path, out, as_csv, seed, threads, server))

    cmd.__doc__ = f"Run the '{command}' command."
    return click.command(command)(cmd)


@click.group()
def main():
    """Dyadic geometric measure theory lab."""


for _c in COMMANDS:
    main.add_command(_make(_c))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("gmtlab.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
