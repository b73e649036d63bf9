"""Batch front-end speaking JSON to the service.

The CLI never computes anything itself: it turns a config file into a
request, sends it to the service (an in-process app by default, or a remote
server via --server), and writes the response to CSV/JSON files. Outputs
are byte-identical across reruns of the same config and seed; every file
embeds the resolved configuration that produced it.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from . import config as config_mod
from .errors import ConfigError, KrylovLabError

TRACE_COLUMNS = (
    "step",
    "energy",
    "delta_e",
    "kappa",
    "variance",
    "retained_rank",
    "calls",
    "shots",
)
SWEEP_COLUMNS = (
    "value",
    "steps",
    "energy",
    "delta_e",
    "kappa",
    "variance",
    "calls",
    "shots",
    "status",
)
HYPEROPT_COLUMNS = ("e_min", "e_max", "j", "variance", "energy", "status")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ServiceError(Exception):
    def __init__(self, detail: str, kind: str):
        super().__init__(detail)
        self.kind = kind


class ServiceClient:
    """POSTs to a remote server, or drives the in-process app over ASGI."""

    def __init__(self, server: str | None = None):
        self._server = server.rstrip("/") if server else None
        self._app = None
        if self._server is None:
            from .service import create_app

            self._app = create_app()

    def post(self, path: str, payload: dict) -> dict:
        if self._server is not None:
            response = httpx.post(f"{self._server}{path}", json=payload, timeout=600.0)
        else:
            response = self._post_local(path, payload)
        if response.status_code == 200:
            return response.json()
        try:
            body = response.json()
        except ValueError:
            body = {"detail": response.text}
        detail = body.get("detail", "request failed")
        if response.status_code == 422:
            raise ServiceError(json.dumps(detail), "config")
        raise ServiceError(str(detail), body.get("kind", "numerical"))

    def _post_local(self, path: str, payload: dict) -> httpx.Response:
        async def go():
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://krylovlab.internal", timeout=None
            ) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_meta(value) -> str:
    return "none" if value is None else _fmt(value)


def _flatten(prefix: str, obj) -> list[tuple[str, str]]:
    items: list[tuple[str, str]] = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            items.extend(_flatten(f"{prefix}.{key}" if prefix else key, obj[key]))
    elif isinstance(obj, list):
        items.append((prefix, ",".join(_fmt_meta(v) for v in obj)))
    else:
        items.append((prefix, _fmt_meta(obj)))
    return items


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, resolved: dict, columns: tuple, rows: list[dict], extra_header=()):
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {key} = {value}" for key, value in _flatten("", resolved)]
    lines.extend(f"# {key} = {value}" for key, value in extra_header)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row.get(column)) for column in columns))
    path.write_text("\n".join(lines) + "\n")


def _out_base(args) -> Path:
    return Path(args.out)


def _with_ext(base: Path, ext: str) -> Path:
    return base.parent / (base.name + ext)


def cmd_run(args, client: ServiceClient) -> int:
    raw = config_mod.load_config(args.config)
    config_mod.apply_overrides(raw, args.overrides)
    payload = config_mod.run_request_payload(raw, Path(args.config).resolve().parent)
    result = client.post("/run", payload)
    base = _out_base(args)
    _write_json(_with_ext(base, ".json"), result)
    _write_csv(
        _with_ext(base, ".csv"),
        result["resolved"],
        TRACE_COLUMNS,
        result["rows"],
        extra_header=[
            ("oracle_ground_energy", _fmt(result["oracle_ground_energy"])),
            ("shift", _fmt(result["shift"])),
        ],
    )
    final = next((r for r in reversed(result["rows"]) if r["ok"]), result["rows"][-1])
    print(
        f"{result['method']}: {len(result['rows'])} steps, "
        f"energy {_fmt(final['energy'])}, delta_e {_fmt(final['delta_e'])}, "
        f"calls {final['calls']}"
    )
    print(f"wrote {_with_ext(base, '.csv')} and {_with_ext(base, '.json')}")
    return EXIT_OK


def cmd_sweep(args, client: ServiceClient) -> int:
    raw = config_mod.load_config(args.config)
    config_mod.apply_overrides(raw, args.overrides)
    payload = config_mod.sweep_payload(raw, Path(args.config).resolve().parent)
    result = client.post("/sweep", payload)
    base = _out_base(args)
    _write_json(_with_ext(base, ".json"), result)
    rows = [
        {**row, "status": "ok" if row["ok"] else "failed"} for row in result["rows"]
    ]
    _write_csv(_with_ext(base, ".csv"), result["resolved"]["base"], SWEEP_COLUMNS, rows,
               extra_header=[("sweep.parameter", result["resolved"]["axis"]["parameter"])])
    failed = sum(1 for row in rows if row["status"] == "failed")
    print(f"sweep: {len(rows)} points, {failed} failed")
    print(f"wrote {_with_ext(base, '.csv')} and {_with_ext(base, '.json')}")
    return EXIT_OK


def cmd_hyperopt(args, client: ServiceClient) -> int:
    raw = config_mod.load_config(args.config)
    config_mod.apply_overrides(raw, args.overrides)
    payload = config_mod.hyperopt_payload(raw, Path(args.config).resolve().parent)
    result = client.post("/hyperopt", payload)
    base = _out_base(args)
    _write_json(_with_ext(base, ".json"), result)
    rows = [
        {**row, "status": "ok" if row["ok"] else "failed"} for row in result["table"]
    ]
    _write_csv(_with_ext(base, ".csv"), result["resolved"]["base"], HYPEROPT_COLUMNS, rows)
    best = result["best"]
    print(
        f"best window [{best['e_min']}, {best['e_max']}] with {best['j']} filter "
        f"energies: variance {_fmt(best['variance'])}, energy {_fmt(best['energy'])}"
    )
    print(f"wrote {_with_ext(base, '.csv')} and {_with_ext(base, '.json')}")
    return EXIT_OK


def cmd_spectrum(args, client: ServiceClient) -> int:
    raw = config_mod.load_config(args.config)
    config_mod.apply_overrides(raw, args.overrides)
    payload = config_mod.run_request_payload(raw, Path(args.config).resolve().parent)
    request = {"hamiltonian": payload["hamiltonian"]}
    if args.levels:
        request["max_eigenvalues"] = args.levels
    result = client.post("/spectrum", request)
    base = _out_base(args)
    _write_json(_with_ext(base, ".json"), result)
    print(
        f"{result['n_qubits']} qubits, {result['l_terms']} terms, "
        f"ground energy {_fmt(result['ground_energy'])}"
    )
    print(f"wrote {_with_ext(base, '.json')}")
    return EXIT_OK


def cmd_ledger(args, client: ServiceClient) -> int:
    base = _out_base(args)
    run_artifact = _with_ext(base, ".json")
    if not run_artifact.is_file():
        raise ConfigError(
            f"missing run artifact {run_artifact}; run the 'run' verb first"
        )
    run_data = json.loads(run_artifact.read_text())
    rows = run_data.get("rows", [])
    if not rows or "ledger" not in run_data:
        raise ConfigError(f"{run_artifact} is not a run trace artifact")
    request = {
        "method": run_data["method"],
        "m_steps": rows[-1]["step"],
        "l_terms": run_data["l_terms"],
        "commuting": run_data["resolved"]["run"]["commuting"],
        "observed": run_data["ledger"],
    }
    result = client.post("/ledger", request)
    out = base.parent / (base.name + ".ledger.json")
    _write_json(out, result)
    print(
        f"{result['method']} M={result['m_steps']} L={result['l_terms']}: "
        f"observed {result['observed_total_calls']} calls, predicted "
        f"{result['prediction']['total_calls']} ({result['prediction']['formula']}), "
        f"match={str(result['match']).lower()}"
    )
    print(f"wrote {out}")
    return EXIT_OK


def cmd_serve(args, _client=None) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="krylovlab",
        description="Krylov subspace diagonalization lab (thin client over the service)",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("-c", "--config", required=True, help="experiment config file")
        p.add_argument("-o", "--out", required=True, help="output path base (no extension)")
        p.add_argument("--server", default=None, help="remote service URL (default: in-process)")
        p.add_argument(
            "overrides",
            nargs="*",
            default=[],
            help="config overrides as section.key=value",
        )

    add_common(sub.add_parser("run", help="run one configured experiment"))
    add_common(sub.add_parser("sweep", help="run a parameter sweep"))
    add_common(sub.add_parser("hyperopt", help="grid-search filter windows"))
    spectrum = sub.add_parser("spectrum", help="exact spectrum of the configured model")
    add_common(spectrum)
    spectrum.add_argument("--levels", type=int, default=None, help="limit reported eigenvalues")
    ledger = sub.add_parser("ledger", help="call-count report for a completed run")
    ledger.add_argument("-o", "--out", required=True, help="output base used by the run")
    ledger.add_argument("--server", default=None)
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "hyperopt": cmd_hyperopt,
    "spectrum": cmd_spectrum,
    "ledger": cmd_ledger,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "serve":
            return cmd_serve(args)
        client = ServiceClient(args.server)
        return _COMMANDS[args.verb](args, client)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ServiceError as exc:
        kind = "config" if exc.kind == "config" else "numerical"
        print(f"{kind} error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if kind == "config" else EXIT_NUMERICAL
    except KrylovLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
