"""Command-line client for the experiment service.

The CLI holds no numerics: it builds the same request models the HTTP API
accepts, dispatches them in-process by default (or to a remote server via
``--server``), and writes the response payloads to files.

Exit codes: 0 success, 2 unknown objective or invalid configuration,
3 non-finite evaluation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .service import handlers
from .service.models import (
    AuditRequest,
    EvalRecordModel,
    RunRequest,
    SweepRequest,
)
from .types import EvaluationLog, NonFiniteEvaluationError, UnknownObjectiveError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NON_FINITE = 3


def _csv_ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _csv_noise(text: str) -> list[float | None]:
    out: list[float | None] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        out.append(None if part.lower() in ("inf", "infinity") else float(part))
    return out


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _merge(file_cfg: dict, flag_cfg: dict) -> dict:
    merged = dict(file_cfg)
    merged.update({k: v for k, v in flag_cfg.items() if v is not None})
    return merged


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _log_from_models(records: list[EvalRecordModel], budgets: list[int]) -> EvaluationLog:
    return EvaluationLog.from_records(
        [(m.t, m.tau, m.x, m.f) for m in records], budgets=budgets
    )


class _RemoteError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"server returned {status} ({code}): {message}")
        self.status = status
        self.code = code


def _dispatch(server: str | None, route: str, request, response_model):
    """Run a request in-process, or POST it to a remote server."""
    if server is None:
        handler = {
            "/run": handlers.handle_run,
            "/audit": handlers.handle_audit,
            "/sweep": handlers.handle_sweep,
        }[route]
        return handler(request)
    import httpx

    reply = httpx.post(
        server.rstrip("/") + route,
        json=request.model_dump(mode="json"),
        timeout=300.0,
    )
    if reply.status_code != 200:
        detail = {}
        try:
            detail = reply.json().get("detail", {})
        except ValueError:
            pass
        if not isinstance(detail, dict):
            detail = {"message": str(detail)}
        raise _RemoteError(
            reply.status_code,
            detail.get("code", "error"),
            detail.get("message", reply.text),
        )
    return response_model.model_validate(reply.json())


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_flags(args) -> dict:
    return {
        "objective": args.objective,
        "dims": args.dims,
        "budget": args.budget,
        "budgets": args.budgets,
        "optimizer": args.optimizer,
        "horizon": args.horizon,
        "noise_bounds": args.noise_bounds,
        "oracle_resolution": args.oracle_resolution,
    }


def _cmd_run(args) -> int:
    flags = _run_flags(args)
    flags["include_envelope"] = True if args.envelope_out else None
    request = RunRequest.model_validate(_merge(_load_config(args.config), flags))
    from .service.models import RunResponse

    response = _dispatch(args.server, "/run", request, RunResponse)
    out = _out_dir(args)
    multi = len(response.epochs) > 1
    for epoch in response.epochs:
        stem = f"evaluation_log_epoch{epoch.epoch_index}" if multi else "evaluation_log"
        log = _log_from_models(epoch.records, epoch.budgets)
        (out / f"{stem}.csv").write_text(log.to_csv())
        (out / f"{stem}.json").write_text(log.to_json())
    _write_json(out / "regret_report.json", response.report.model_dump(mode="json"))
    if args.envelope_out and response.envelope is not None:
        lines = ["x,F(x)"] + [f"{_g17(x)},{_g17(f)}" for x, f in response.envelope]
        (out / args.envelope_out).write_text("\n".join(lines) + "\n")
    total = response.report.total_evaluations
    budgets = response.epochs[-1].budgets if multi else response.epochs[0].budgets
    print(
        f"{response.objective}: {total} evaluations, budgets {budgets}, "
        f"average regret {response.report.average_regret:.6g} -> {out}"
    )
    return EXIT_OK


def _cmd_audit(args) -> int:
    flags = _run_flags(args)
    flags.update(
        {
            "split": args.split,
            "robustness_epsilon": args.robustness_eps,
            "conditional_oracle": args.conditional_oracle,
            "include_trend": False if args.no_trend else None,
            "trend_budgets": args.trend_budgets,
        }
    )
    merged = _merge(_load_config(args.config), flags)
    if args.log:
        records = json.loads(Path(args.log).read_text())
        merged["records"] = [
            {"t": r["t"], "tau": r["tau"], "x": r["x"], "f": r["f"]} for r in records
        ]
    request = AuditRequest.model_validate(merged)
    from .service.models import AuditResponse

    response = _dispatch(args.server, "/audit", request, AuditResponse)
    out = _out_dir(args)
    _write_json(out / "audit_report.json", response.model_dump(mode="json"))
    verdict = response.decomposition.verdict if response.decomposition else "n/a"
    print(
        f"{response.objective}: decomposition {verdict}, "
        f"bounds {[c.satisfied for c in response.report.bound_checks]} -> {out}"
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    flags = {
        "objective": args.objective,
        "t_values": args.t_values,
        "optimizer": args.optimizer,
        "oracle_resolution": args.oracle_resolution,
        "robustness_epsilon": args.robustness_eps,
    }
    request = SweepRequest.model_validate(_merge(_load_config(args.config), flags))
    from .service.models import SweepResponse

    response = _dispatch(args.server, "/sweep", request, SweepResponse)
    out = _out_dir(args)
    lines = ["T,r,r_tilde,R,bound_strong,bound_weak"]
    for row in response.rows:
        lines.append(
            f"{row.T},{_g17(row.r)},{_g17(row.r_tilde)},{_g17(row.R)},"
            f"{_g17(row.bound_strong)},{_g17(row.bound_weak)}"
        )
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    _write_json(
        out / "sweep_reports.json",
        {"objective": response.objective, "rows": [r.model_dump(mode="json") for r in response.rows]},
    )
    print(f"{response.objective}: {len(response.rows)} sweep rows -> {out}")
    return EXIT_OK


def _cmd_list_objectives(args) -> int:
    if args.server is not None:
        import httpx

        entries = httpx.get(args.server.rstrip("/") + "/objectives", timeout=60.0).json()
    else:
        entries = [o.model_dump(mode="json") for o in handlers.list_objectives()]
    for entry in entries:
        fmin = entry["known_minimum"]
        print(
            f"{entry['name']:<12} d={entry['dimension']} L={entry['lipschitz_constant']:g} "
            f"norm={entry['norm']} f*={'?' if fmin is None else format(fmin, 'g')}  {entry['notes']}"
        )
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--objective", help="catalog objective name")
    parser.add_argument("--dims", type=int, help="expected dimension (consistency check)")
    parser.add_argument("--budget", type=int, help="total budget T, factorized per dimension")
    parser.add_argument("--budgets", type=_csv_ints, metavar="a,b,c", help="explicit per-dimension budgets")
    parser.add_argument("--optimizer", choices=["ps", "grid"], help="inner 1D optimizer (default ps)")
    parser.add_argument("--horizon", choices=["known", "unknown"], help="horizon mode (default known)")
    parser.add_argument(
        "--noise-bounds", type=_csv_noise, metavar="e1,..,ed", help="per-dimension noise bounds; 'inf' allowed"
    )
    parser.add_argument("--oracle-resolution", type=int, help="grid oracle resolution per axis (default 4096)")
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--out", help="output directory (default .)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimcurse",
        description="Run and audit recursive univariate-composition minimization experiments.",
    )
    parser.add_argument("--server", help="base URL of a running service; default runs in-process")
    parser.add_argument(
        "--list-objectives", action="store_true", help="list catalog objectives and exit"
    )
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute one experiment and write its log and report")
    _add_run_flags(p_run)
    p_run.add_argument("--envelope-out", metavar="FILE", help="for 1D runs, dump the final lower envelope CSV")

    p_audit = sub.add_parser("audit", help="audit a fresh or existing run against the regret bounds")
    _add_run_flags(p_audit)
    p_audit.add_argument("--log", help="existing evaluation_log.json to audit instead of running")
    p_audit.add_argument("--split", type=int, help="dimension boundary for the decomposition audit (default 1)")
    p_audit.add_argument("--robustness-eps", type=float, help="noise level for robustness measurement (default 0.1)")
    p_audit.add_argument(
        "--conditional-oracle", choices=["auto", "grid"], help="conditional-minimum source (default auto)"
    )
    p_audit.add_argument("--no-trend", action="store_true", help="skip the regret-vs-T trend table")
    p_audit.add_argument("--trend-budgets", type=_csv_ints, metavar="4,16,64,256")

    p_sweep = sub.add_parser("sweep", help="run a list of budgets and emit a merged CSV")
    p_sweep.add_argument("--objective", help="catalog objective name")
    p_sweep.add_argument("--t-values", type=_csv_ints, metavar="4,16,64", help="total budgets to sweep")
    p_sweep.add_argument("--optimizer", choices=["ps", "grid"])
    p_sweep.add_argument("--oracle-resolution", type=int)
    p_sweep.add_argument("--robustness-eps", type=float)
    p_sweep.add_argument("--config", help="JSON config file; flags override its fields")
    p_sweep.add_argument("--out", help="output directory (default .)")

    sub.add_parser("list-objectives", help="list catalog objectives")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "list_objectives", False) and args.command is None:
        args.command = "list-objectives"
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    commands = {
        "run": _cmd_run,
        "audit": _cmd_audit,
        "sweep": _cmd_sweep,
        "list-objectives": _cmd_list_objectives,
        "serve": _cmd_serve,
    }
    try:
        return commands[args.command](args)
    except UnknownObjectiveError as exc:
        print(f"error: unknown objective {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (handlers.ConfigError, ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteEvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NON_FINITE
    except _RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.code == "non-finite-evaluation":
            return EXIT_NON_FINITE
        if exc.code in ("unknown-objective", "invalid-budget") or exc.status == 422:
            return EXIT_CONFIG
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
