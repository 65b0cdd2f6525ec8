"""Command-line interface: ``lrfs {run,simulate,audit,report}``.

Exit status is 0 on success, 1 when an audit check fails, 2 for a bad
configuration and 3 when a measurement update degenerates.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigurationError, DegenerateUpdateError
from .scenario import (
    ConfigSyntaxError,
    ConfigValidationError,
    SCENARIO_DIR,
    audit,
    canonical_scenario,
    load_config,
    run,
    simulate,
)
from .state_model import to_record

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrfs", description="Exact labeled-RFS filtering on a grid, and the representation audit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", metavar="PATH", help=f"scenario TOML (default: {SCENARIO_DIR / 'oracle.toml'})")
            p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
        p.add_argument("--format", choices=("text", "records"), default="text")

    common(sub.add_parser("run", help="simulate, filter and score every step"))
    common(sub.add_parser("simulate", help="draw ground truth and measurements only"))
    common(sub.add_parser("audit", help="run the counterexample and unit checks"), config=False)
    common(sub.add_parser("report", help="summarize a run: tracks, segments and distances"))
    return parser


def _config(args):
    return load_config(args.config) if args.config else canonical_scenario("oracle")


def _simulate_output(config, seed, fmt) -> str:
    sim = simulate(config, seed)
    if fmt == "records":
        lines = []
        for k, (X, Z) in enumerate(zip(sim.truth, sim.measurements), start=1):
            lines.append(json.dumps({"kind": "truth", "step": k, "set": to_record(X)}, sort_keys=True))
            lines.append(json.dumps({"kind": "measurements", "step": k, "z": list(Z)}, sort_keys=True))
        return "".join(line + "\n" for line in lines)
    out = []
    for k, (X, Z) in enumerate(zip(sim.truth, sim.measurements), start=1):
        truth = ", ".join(f"{s.label}@{s.x}" for s in X)
        out.append(f"{k:>4}  truth {{{truth}}}  z {list(Z)}")
    return "\n".join(out) + "\n"


def _report_output(report, fmt) -> str:
    dists = [s.distance for s in report.steps]
    match = sorted(g.key for g in report.segments) == sorted(g.key for g in report.truth_segments)
    if fmt == "records":
        recs = [
            {"kind": "summary", "step": len(report.steps), "steps": len(report.steps),
             "mean_distance": sum(dists) / len(dists), "max_distance": max(dists),
             "segments_match_truth": match},
            {"kind": "estimated_segments", "step": len(report.steps), "segments": [to_record(g) for g in report.segments]},
            {"kind": "truth_segments", "step": len(report.steps), "segments": [to_record(g) for g in report.truth_segments]},
        ]
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in recs)
    lines = [
        f"steps: {len(report.steps)}",
        f"mean distance: {sum(dists) / len(dists):.6f}",
        f"max distance: {max(dists):.6f}",
        f"segments match truth: {'yes' if match else 'no'}",
        "estimated l-trajectories:",
    ]
    for traj in report.trajectories:
        cells = " ".join("-" if x is None else str(x) for x in traj.per_time)
        lines.append(f"  {traj.label}: {cells}")
    lines.append("truth l-trajectories:")
    for traj in report.truth_trajectories:
        cells = " ".join("-" if x is None else str(x) for x in traj.per_time)
        lines.append(f"  {traj.label}: {cells}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    status = EXIT_OK
    try:
        if args.command == "audit":
            result = audit()
            text = result.to_records() if args.format == "records" else result.to_text()
            status = EXIT_OK if result.passed else EXIT_AUDIT
        else:
            config = _config(args)
            if args.command == "simulate":
                text = _simulate_output(config, args.seed, args.format)
            else:
                report = run(config, args.seed)
                if args.command == "run":
                    text = report.to_records() if args.format == "records" else report.to_text()
                else:
                    text = _report_output(report, args.format)
    except (ConfigSyntaxError, ConfigValidationError) as exc:
        print(f"lrfs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, OSError) as exc:
        print(f"lrfs: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateUpdateError as exc:
        print(f"lrfs: degenerate update: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
