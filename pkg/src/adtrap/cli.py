"""Command-line front end: validate, run and sweep scenario files.

Exit codes: 0 on success, 1 when a scenario fails validation, 2 on runtime
failures (I/O included).  The ``ADTRAP_LOG`` environment variable picks the
logging level (debug, info, warning, error); default is warning.

Artifacts are UTF-8 with ``\\n`` line endings and deterministic content, so
re-running a command overwrites them byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import AdtrapError, ValidationError
from .gdn import log_to_rows
from .marketplace import reports_to_rows
from .scenario import Scenario, load_scenario_document, read_scenario_file
from .simulation import run_attack, run_scenario, sweep, trace_to_json
from .trap import AttributionResult, render_value, summary_line
from . import scenarios as bundled


@dataclass
class RunOutput:
    summary: dict
    artifacts: list[str]
    out_dir: Path


def _setup_logging() -> None:
    level_name = os.environ.get("ADTRAP_LOG", "warning").lower()
    level = {
        "debug": logging.DEBUG,
        "info": logging.INFO,
        "warning": logging.WARNING,
        "error": logging.ERROR,
    }.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _resolve_scenario(arg: str) -> Path:
    """Accept a filesystem path or the bare name of a bundled scenario."""
    path = Path(arg)
    if path.exists():
        return path
    name = arg[:-5] if arg.endswith(".json") else arg
    if name in bundled.names():
        return bundled.path(name)
    raise FileNotFoundError(f"no such scenario file or bundled scenario: {arg}")


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _write_json(path: Path, document) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _attribution_rows(scenario: Scenario, result: AttributionResult) -> list[dict]:
    probed = set(scenario.attack.audiences) if scenario.attack else set()
    truth_by_network = {}
    for user in scenario.users:
        truth_by_network[user.network_id] = user
    rows = []
    for nid in sorted(result.assignments):
        assignment = result.assignments[nid]
        if assignment.status == "exact":
            shown = render_value(assignment.audience)
        elif assignment.status == "ambiguous":
            shown = "|".join(sorted(render_value(v) for v in assignment.candidates))
        else:
            shown = ""
        rows.append(
            {
                "network_id": nid,
                "status": assignment.status,
                "audience_or_set": shown,
                "correct": str(result.correct.get(nid, False)).lower(),
            }
        )
    return rows


def cmd_validate(args) -> int:
    path = _resolve_scenario(args.scenario)
    scenario = load_scenario_document(read_scenario_file(path))
    print(
        f"ok: {path} "
        f"(websites={len(scenario.websites)} campaigns={len(scenario.campaigns)} "
        f"users={len(scenario.users)} "
        f"attack={'yes' if scenario.attack else 'no'})"
    )
    return 0


def cmd_run(args) -> int:
    output = run_to_directory(args.scenario, seed=args.seed, out_dir=args.out)
    print(summary_from_dict(output.summary))
    return 0


def summary_from_dict(summary: dict) -> str:
    accuracy = summary["accuracy"]
    shown = "undefined" if accuracy is None else f"{accuracy:.4f}"
    return (
        f"exact={summary['exact']} ambiguous={summary['ambiguous']} "
        f"unknown={summary['unknown']} accuracy={shown}"
    )


def run_to_directory(scenario_arg: str, seed: int | None, out_dir: str) -> RunOutput:
    """Load, run, infer and write every artifact; importable for tests."""
    path = _resolve_scenario(scenario_arg)
    document = read_scenario_file(path)
    if seed is not None:
        document["seed"] = seed
    scenario = load_scenario_document(document)
    trace = run_scenario(scenario)
    result = run_attack(scenario, trace)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []

    with open(out / "trace.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_to_json(trace))
    artifacts.append("trace.json")

    _write_csv(
        out / "reports.csv",
        ["window_index", "window_start", "window_end", "audience_id", "delta", "cumulative"],
        reports_to_rows(trace.reports),
    )
    artifacts.append("reports.csv")

    for site_id in sorted(trace.logs):
        name = f"visits_{site_id}.csv"
        _write_csv(
            out / name,
            ["timestamp", "network_id", "page_id", "referral", "tracking_arg"],
            log_to_rows(trace.logs[site_id]),
        )
        artifacts.append(name)

    _write_csv(
        out / "attribution.csv",
        ["network_id", "status", "audience_or_set", "correct"],
        _attribution_rows(scenario, result),
    )
    artifacts.append("attribution.csv")

    counts = result.counts()
    summary = {
        "exact": counts["exact"],
        "ambiguous": counts["ambiguous"],
        "unknown": counts["unknown"],
        "accuracy": result.accuracy,
        "inconsistent": result.inconsistent,
    }
    artifacts.append("run_output.json")
    _write_json(
        out / "run_output.json",
        {
            "seed": scenario.seed,
            "summary": summary,
            "artifacts": sorted(artifacts),
        },
    )
    return RunOutput(summary=summary, artifacts=sorted(artifacts), out_dir=out)


def _parse_grid(args_grid: list[str]) -> dict[str, list]:
    grid: dict[str, list] = {}
    for item in args_grid or []:
        if "=" not in item:
            raise ValidationError(f"grid item {item!r} must look like key=v1,v2,...")
        key, _, raw = item.partition("=")
        if not key or not raw:
            raise ValidationError(f"grid item {item!r} must look like key=v1,v2,...")
        values = []
        for token in raw.split(","):
            try:
                values.append(json.loads(token))
            except json.JSONDecodeError:
                values.append(token)
        grid[key] = values
    return grid


def _parse_seeds(raw: str) -> list[int]:
    tokens = [t for t in (raw or "").split(",") if t != ""]
    if not tokens:
        raise ValidationError("no seeds")
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ValidationError(f"seeds must be integers: {raw!r}") from exc


def cmd_sweep(args) -> int:
    path = _resolve_scenario(args.scenario)
    template = read_scenario_file(path)
    grid = _parse_grid(args.grid)
    seeds = _parse_seeds(args.seeds)
    rows = sweep(template, grid, seeds)
    fieldnames = sorted(grid) + [
        "seed",
        "exact",
        "ambiguous",
        "unknown",
        "accuracy",
        "impressions",
    ]
    printable = [
        {k: ("" if v is None else v) for k, v in row.items()} for row in rows
    ]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", fieldnames, printable)
    print("\t".join(fieldnames))
    for row in printable:
        print("\t".join(str(row[k]) for k in fieldnames))
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adtrap",
        description="Simulate a profile-targeted ad network and run counter-correlation attacks on it.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario file")
    p_validate.add_argument("scenario", help="scenario file path or bundled scenario name")
    p_validate.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="run a scenario end to end")
    p_run.add_argument("scenario", help="scenario file path or bundled scenario name")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--out", default="adtrap_out", help="artifact directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid across seeds")
    p_sweep.add_argument("scenario", help="template scenario file or bundled name")
    p_sweep.add_argument(
        "--grid",
        action="append",
        default=[],
        metavar="KEY=V1,V2,...",
        help="swept parameter; repeatable; KEY is a /-separated document path",
    )
    p_sweep.add_argument("--seeds", required=True, help="comma-separated seed list")
    p_sweep.add_argument("--out", default="adtrap_out", help="artifact directory")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AdtrapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
