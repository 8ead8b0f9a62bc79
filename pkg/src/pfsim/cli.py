"""Command-line entry points: run, predict, serve."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np


class _Parser(argparse.ArgumentParser):
    # usage problems are errors (exit 1), not run failures (exit 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pfsim", description="2D person-following simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless")
    p_run.add_argument("scenario", help="scenario JSON path or bundled name (house, lost_target)")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--ticks", type=int, default=None, help="tick budget override")
    p_run.add_argument("--log", default=None, help="write a JSONL event log here")

    p_pred = sub.add_parser("predict", help="offline trajectory prediction from CSV")
    p_pred.add_argument("history", help="CSV with t,x,y rows (header optional)")
    p_pred.add_argument("--horizon", type=float, default=1.5, help="extrapolation horizon, s")
    p_pred.add_argument("--step", type=float, default=0.1, help="prediction step, s")
    p_pred.add_argument("--compare-poly", action="store_true",
                        help="add degree-3 polynomial baseline columns")
    p_pred.add_argument("-o", "--output", required=True, help="output CSV path")

    p_serve = sub.add_parser("serve", help="run the live WebSocket service")
    p_serve.add_argument("scenario", help="scenario JSON path or bundled name")
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    return parser


def _load(scenario_arg: str):
    from .scenario import bundled_scenario_path, load_scenario

    path = Path(scenario_arg)
    if not path.exists() and not scenario_arg.endswith(".json"):
        path = bundled_scenario_path(scenario_arg)
    return load_scenario(path)


def _cmd_run(args) -> int:
    from .engine import Simulation

    scenario = _load(args.scenario)
    sim = Simulation(scenario, seed=args.seed)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fp:
            summary = sim.run(max_ticks=args.ticks, log_fp=fp)
    else:
        summary = sim.run(max_ticks=args.ticks)
    print(json.dumps(summary.to_dict(), indent=2))
    return 0 if summary.success else 2


def _read_history(path: str):
    rows = []
    with open(path, newline="", encoding="utf-8") as fp:
        for row in csv.reader(fp):
            if not row:
                continue
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2])))
            except ValueError:
                continue  # header or junk line
    if len(rows) < 2:
        raise ValueError(f"{path}: needs at least 2 numeric t,x,y rows")
    return rows


def _cmd_predict(args) -> int:
    from .prediction import (
        PredictorParams,
        TrackHistory,
        poly_predict,
        polyfit3,
        predict_trajectory,
    )

    rows = _read_history(args.history)
    history = TrackHistory(samples=rows)
    pred = predict_trajectory(history, args.horizon, args.step, PredictorParams())
    header = ["t", "x", "y", "valid"]
    columns = [pred.t, pred.x, pred.y, pred.valid.astype(int)]
    if args.compare_poly:
        t = np.array([r[0] for r in rows])
        cx = polyfit3(t, np.array([r[1] for r in rows]))
        cy = polyfit3(t, np.array([r[2] for r in rows]))
        header += ["poly_x", "poly_y"]
        columns += [poly_predict(cx, pred.t), poly_predict(cy, pred.t)]
    with open(args.output, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(header)
        for i in range(len(pred.t)):
            writer.writerow([f"{float(col[i]):.6f}" if header[k] != "valid" else int(col[i])
                             for k, col in enumerate(columns)])
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import make_app

    scenario = _load(args.scenario)
    app = make_app(scenario)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "serve":
            return _cmd_serve(args)
        return 1
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # surfaced as exit code 1 per the CLI contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
