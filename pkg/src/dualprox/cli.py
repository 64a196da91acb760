"""Command line front end.

Exit codes: 0 success, 2 usage error (unknown flag or bad flag value),
3 configuration error, 4 run failure, 5 output I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness.config import ALGORITHMS, SEC5_PRESET, STEP_MODES, TIMER_MODES, ConfigError, build_config, load_config
from .harness.outputs import OutputError, emit_outputs
from .harness.runner import run_experiment

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUN = 4
EXIT_IO = 5


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file; flags override it")
    common.add_argument("--algorithm", choices=ALGORITHMS)
    common.add_argument("--seed", type=int)
    common.add_argument("--iters", type=int, dest="iterations")
    common.add_argument("--step-mode", choices=STEP_MODES, dest="step_mode")
    common.add_argument("--alpha", type=float, dest="alpha_override", help="constant step (reproduction mode only)")
    common.add_argument("--out", dest="output_dir")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--node", type=int, help="node whose lambda_i^j are plotted")
    common.add_argument("--n", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--p", type=float, dest="graph_p")
    common.add_argument("--m", type=int, dest="m_halfspaces", help="halfspaces per node (0 = unconstrained)")
    common.add_argument("--timer-mode", choices=TIMER_MODES, dest="timer_mode")
    common.add_argument("--record-every", type=int, dest="record_every")
    common.add_argument("--wall-clock", action="store_true", default=None, dest="wall_clock")

    parser = argparse.ArgumentParser(prog="dualprox", description="Distributed dual proximal gradient simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one configured experiment")
    sub.add_parser("reproduce-sec5", parents=[common], help="15-node gossip experiment with alpha_i = 1")
    return parser


_FLAG_KEYS = (
    "algorithm", "seed", "iterations", "step_mode", "alpha_override", "output_dir", "tolerance", "node",
    "n", "d", "graph_p", "m_halfspaces", "timer_mode", "record_every", "wall_clock",
)


def cli_main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        preset = dict(SEC5_PRESET) if args.command == "reproduce-sec5" else {}
        from_file = load_config(args.config) if args.config else {}
        flags = {k: getattr(args, k) for k in _FLAG_KEYS if getattr(args, k) is not None}
        mode = flags.get("step_mode") or from_file.get("step_mode") or preset.get("step_mode")
        if mode == "safe":
            # safe mode drops the preset's constant step; an explicit alpha still conflicts
            preset.pop("alpha_override", None)
        config = build_config(preset, from_file, flags)
    except ConfigError as exc:
        print(f"dualprox: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(config)
    except Exception as exc:  # noqa: BLE001 - every solver failure maps to one exit code
        print(f"dualprox: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN
    try:
        emit_outputs(result.trace, config, result.instance, result.reference)
        summary = json.dumps(result.summary(), sort_keys=True)
        with open(f"{config.output_dir}/summary.json", "w") as fh:
            fh.write(summary + "\n")
    except OSError as exc:
        print(f"dualprox: output error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary)
    return EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
