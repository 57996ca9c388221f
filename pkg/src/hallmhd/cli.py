"""Command-line entry point (``hallmhd``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .checkpoint import CheckpointError, read_checkpoint
from .config import ConfigError, ExperimentConfig
from .monitor import smallness_gate_besov, smallness_gate_sobolev

log = logging.getLogger("hallmhd")


def _load(path: str) -> ExperimentConfig:
    return ExperimentConfig.load(path)


def cmd_run(args) -> int:
    cfg = _load(args.config)
    code, summary = harness.run_experiment(cfg, args.output)
    print(json.dumps({k: summary.get(k) for k in ("termination", "time", "relative_error") if k in summary}))
    return code


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    code, index = harness.run_sweep(cfg, args.output, args.workers)
    print(f"{len(index['points'])} sweep points, worst exit code {code}")
    return code


def cmd_check_inequalities(args) -> int:
    from .inequalities import load_constants, verify_against

    results = verify_against(load_constants(), args.samples, args.seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}.{r.key}: max {r.observed_max:.6g} vs C_emp {r.calibrated:.6g} ({r.exceed_count} above tolerance)")
    return harness.EXIT_OK if all(r.passed for r in results) else harness.EXIT_CHECK


def cmd_gate(args) -> int:
    state = read_checkpoint(args.checkpoint)
    gate = smallness_gate_sobolev if args.theorem == 3 else smallness_gate_besov
    result = gate(state.u, state.b, args.threshold)
    print(json.dumps(result.to_dict(), sort_keys=True))
    return harness.EXIT_OK if result.passed else harness.EXIT_CHECK


def cmd_replay(args) -> int:
    ok, message = harness.replay(args.ledger_dir)
    print(message)
    return harness.EXIT_OK if ok else harness.EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hallmhd", description="Hall-MHD spectral simulator and norm monitor")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment (single or scaling_pair)")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="output directory (overrides the config)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run every point of the config's sweep axes")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.add_argument("-j", "--workers", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-inequalities", help="re-run the inequality oracles against the frozen constants")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--seed", type=int, default=1)
    c.set_defaults(func=cmd_check_inequalities)

    g = sub.add_parser("gate", help="evaluate a smallness gate on a checkpoint")
    g.add_argument("checkpoint")
    g.add_argument(
        "--theorem",
        type=int,
        choices=(3, 4),
        required=True,
        help="3: homogeneous H^{3/2} gate on (u, B); 4: B^{1/2}_{2,1}(u) + B^{3/2}_{2,1}(B) gate",
    )
    g.add_argument("--threshold", type=float, required=True)
    g.set_defaults(func=cmd_gate)

    rp = sub.add_parser("replay", help="recompute a run's ledger from its checkpoints")
    rp.add_argument("ledger_dir")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return harness.EXIT_CONFIG
    except (CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
