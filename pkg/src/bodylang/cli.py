"""Command-line entry points: serve the game server, run the simulated field
study, analyze its output, debug scores, and calibrate the synthetic
recognizer."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import (
    gameplay_stats,
    read_sri_tsv,
    sri_report,
    write_report_tsv,
)
from .codec import canonical_dumps, canonical_loads
from .domain import RequestConfig
from .errors import GameError
from .eventlog import read_log_file
from .scoring import RecognitionOutput, ScoringParams, compute_score
from .sim import CalibrationTargets, Scenario, calibrate, run_scenario


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import ServerState, create_app

    state = ServerState(
        scoring_params=ScoringParams(alpha=args.alpha, theta=args.theta),
        recognizer_endpoint=args.recognizer,
        recognizer_seed=args.seed,
        log_path=Path(args.log) if args.log else None,
        simulation_mode=args.sim_time,
    )
    app = create_app(state, ui_dir=Path(args.ui) if args.ui else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    payload = canonical_loads(Path(args.input).read_text(encoding="utf-8"))
    rec = RecognitionOutput.from_payload(payload["recognition"])
    config = RequestConfig.from_payload(payload["config"])
    params = (
        ScoringParams.from_payload(payload["params"]) if "params" in payload else ScoringParams()
    )
    problems = rec.violations()
    if problems:
        print("invalid recognition output: " + "; ".join(problems), file=sys.stderr)
        return 2
    result = compute_score(rec, config, params)
    print(
        canonical_dumps(
            {
                "score": result.score,
                "qualified": result.qualified,
                "action_term": result.action_term,
                "attribute_term": result.attribute_term,
                "alpha": params.alpha,
                "theta": params.theta,
            }
        )
    )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.scenario:
        scenario = Scenario.from_file(Path(args.scenario))
    else:
        scenario = Scenario()
    if args.seed is not None:
        payload = scenario.to_payload()
        payload["rng_seed"] = args.seed
        scenario = Scenario.from_payload(payload)
    result = run_scenario(scenario, server_url=args.server)
    result.write(Path(args.out))
    print(canonical_dumps(result.summary.to_payload()))
    if not result.summary.conserved:
        print("economy conservation violated", file=sys.stderr)
        return 1
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    records = read_log_file(Path(args.log))
    stats = gameplay_stats(records)
    print(canonical_dumps(stats.to_payload()))
    pre = read_sri_tsv(Path(args.sri_pre))
    post = read_sri_tsv(Path(args.sri_post))
    reports = sri_report(pre, post)
    write_report_tsv(Path(args.out), reports)
    for r in reports:
        marker = "significant" if r.significant else "not significant"
        print(
            f"{r.group}: n={r.n} pre={r.pre_mean:.4f} post={r.post_mean:.4f} "
            f"t={r.t:.4f} df={r.df} t0(0.001)={r.t0_001:.4f} [{marker}]"
        )
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    targets = CalibrationTargets(
        pass_rate=args.pass_rate,
        action_match=args.action_match,
        attribute_match=args.attribute_match,
    )
    params = calibrate(targets, n=args.trials)
    print(canonical_dumps(params.to_payload()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bodylang")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the game server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8800)
    serve.add_argument("--log", help="append-only event log file")
    serve.add_argument("--recognizer", help="external recognizer endpoint host:port")
    serve.add_argument("--alpha", type=float, default=ScoringParams().alpha)
    serve.add_argument("--theta", type=float, default=ScoringParams().theta)
    serve.add_argument("--seed", type=int, default=0, help="synthetic recognizer seed")
    serve.add_argument(
        "--sim-time", action="store_true", help="enable the logical clock endpoint"
    )
    serve.add_argument("--ui", help="serve the built web client from this directory at /ui")
    serve.set_defaults(func=_cmd_serve)

    score = sub.add_parser("score", help="score a recognition output against a request config")
    score.add_argument("--input", required=True, help="canonical JSON with recognition + config")
    score.set_defaults(func=_cmd_score)

    simulate = sub.add_parser("simulate", help="run the simulated field study")
    simulate.add_argument("--scenario", help="scenario file (canonical JSON)")
    simulate.add_argument("--seed", type=int, help="override the scenario seed")
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument("--server", help="use an existing server instead of an embedded one")
    simulate.set_defaults(func=_cmd_simulate)

    analyze = sub.add_parser("analyze", help="analyze an event log plus SRI datasets")
    analyze.add_argument("--log", required=True)
    analyze.add_argument("--sri-pre", required=True)
    analyze.add_argument("--sri-post", required=True)
    analyze.add_argument("--out", required=True, help="report TSV path")
    analyze.set_defaults(func=_cmd_analyze)

    cal = sub.add_parser("calibrate", help="fit synthetic recognizer parameters to target rates")
    cal.add_argument("--pass-rate", type=float, default=0.769)
    cal.add_argument("--action-match", type=float, default=0.903)
    cal.add_argument("--attribute-match", type=float, default=0.659)
    cal.add_argument("--trials", type=int, default=10_000)
    cal.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GameError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
