"""Run orchestration: single runs, scaling pairs, sweeps and ledger replay.

Output layout of a single run directory::

    config.yaml          resolved configuration
    ledger.jsonl         one full diagnostic sample per line
    energy.jsonl         energy balance sampled every step
    summary.json         termination, gates, checks
    checkpoints/         one checkpoint per ledger sample (replay input)
    final.hmhd           final state
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .checkpoint import read_checkpoint, write_checkpoint
from .config import ConfigError, ExperimentConfig
from .initial_data import (
    InitialData,
    gen_beltrami,
    gen_orszag_tang_2p5d,
    gen_orszag_tang_3d,
    gen_random_bandlimited,
)
from .monitor import (
    DiagnosticsLedger,
    InvariantTracker,
    apriori_besov_check,
    energy_ledger_check,
    smallness_gate_besov,
    smallness_gate_sobolev,
)
from .solver import (
    CFLViolation,
    Regime,
    SolverState,
    StepControl,
    Termination,
    hm_energy,
    run,
)
from .spectral import Grid, l2_norm, rescale_coordinates, to_physical, zeros

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_RESOLUTION = 4
EXIT_CHECK = 5

DIVERGENCE_TOL = 1e-11
MEAN_DRIFT_TOL = 1e-13

# empirical smallness thresholds, see README ("Gate defaults")
DEFAULT_SOBOLEV_K = 1.0
DEFAULT_BESOV_EPS = 1.0


def build_grid(cfg: ExperimentConfig) -> Grid:
    g = cfg["grid"]
    return Grid(g["n"], g["box_length"], g["dims"])


def build_initial_data(cfg: ExperimentConfig, grid: Grid | None = None) -> InitialData:
    grid = grid or build_grid(cfg)
    init = cfg["initial_data"]
    gen = init["generator"]
    if gen == "zero":
        return InitialData(zeros(grid), zeros(grid))
    if gen == "beltrami":
        return gen_beltrami(grid, init.get("amplitude", 1.0), init.get("lambda", 1))
    if gen == "random_bandlimited":
        return gen_random_bandlimited(
            grid,
            (init["norm"], init["target"]),
            init.get("k_min", 1.0),
            init.get("k_max", 3.0),
            init.get("seed", 0),
            init.get("fields", "both"),
        )
    if gen == "orszag_tang_2p5d":
        return gen_orszag_tang_2p5d(grid, init.get("amplitude", 1.0))
    return gen_orszag_tang_3d(grid, init.get("amplitude", 1.0))


def build_state(cfg: ExperimentConfig, data: InitialData) -> SolverState:
    u = data.u0 if cfg.regime != Regime.HALL_ONLY else zeros(data.grid)
    return SolverState(0.0, u, data.b0, cfg.regime, float(cfg["hall_coefficient"]))


def build_step_control(cfg: ExperimentConfig, initial: SolverState, t_scale: float = 1.0) -> StepControl:
    st = cfg["step"]
    hm_order = cfg["criteria"]["hm_order"]
    if "max_hm_norm" in st:
        threshold = float(st["max_hm_norm"])
    else:
        hm0 = hm_energy(initial, hm_order)
        threshold = st["max_hm_factor"] * hm0 if hm0 > 0 else math.inf
    return StepControl(
        dt=st["dt"] * t_scale,
        t_end=st["t_end"] * t_scale,
        cfl_safety=st["cfl_safety"],
        max_hm_norm=threshold,
        spectral_tail_fraction=st["spectral_tail_fraction"],
        hm_order=hm_order,
    )


def _exit_for(status: Termination) -> int:
    return {
        Termination.COMPLETED: EXIT_OK,
        Termination.NUMERICAL_BLOWUP: EXIT_BLOWUP,
        Termination.RESOLUTION_LOST: EXIT_RESOLUTION,
    }[status]


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def run_single(cfg: ExperimentConfig, out_dir: Path) -> tuple[int, dict]:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.yaml").write_text(cfg.dump())
    grid = build_grid(cfg)
    data = build_initial_data(cfg, grid)
    state = build_state(cfg, data)
    ctl = build_step_control(cfg, state)
    crit = cfg.criterion_config()

    ledger = DiagnosticsLedger(crit)
    energy_ledger = DiagnosticsLedger(crit, energy_only=True)
    ckpt_dir = out_dir / "checkpoints"
    keep_ckpt = cfg["output"]["checkpoint_every_sample"]
    if keep_ckpt:
        ckpt_dir.mkdir(exist_ok=True)
    invariants = InvariantTracker()
    oracle = {"error": 0.0}
    beltrami = cfg["initial_data"]["generator"] == "beltrami" and cfg.regime == Regime.HALL_ONLY
    lam = cfg["initial_data"].get("lambda", 1)

    def on_sample(s: SolverState, i: int):
        if keep_ckpt:
            write_checkpoint(ckpt_dir / f"ckpt_{len(ledger.records):06d}.hmhd", s)
        ledger.sample(s, i)
        if beltrami:
            exact = data.b0 * math.exp(-(lam**2) * s.time)
            ref = l2_norm(exact)
            err = l2_norm(s.b - exact) / ref if ref > 0 else l2_norm(s.b)
            oracle["error"] = max(oracle["error"], err)

    def every_step(s: SolverState, i: int):
        energy_ledger.sample(s, i)
        invariants.update(s, i)

    hooks = [(crit.sample_cadence, on_sample), (1, every_step)]
    try:
        outcome = run(state, ctl, hooks, checkpoint_path=out_dir / "final.hmhd")
    except CFLViolation as exc:
        summary = {"termination": "cfl_violation", "detail": str(exc), "required_dt": exc.required}
        _write_json(out_dir / "summary.json", summary)
        return EXIT_CONFIG, summary
    ledger.write_jsonl(out_dir / "ledger.jsonl")
    energy_ledger.write_jsonl(out_dir / "energy.jsonl")

    sob = smallness_gate_sobolev(data.u0, data.b0, DEFAULT_SOBOLEV_K)
    bes = smallness_gate_besov(data.u0, data.b0, DEFAULT_BESOV_EPS)
    summary = {
        "config_kind": "single",
        "regime": cfg.regime.label,
        **outcome.to_dict(),
        "final_report": {"u": ledger.records[-1]["u"], "b": ledger.records[-1]["b"]},
        "gates": {"sobolev": sob.to_dict(), "besov": bes.to_dict()},
        "apriori_besov": apriori_besov_check(ledger, gate=bes).to_dict(),
        "invariants": invariants.to_dict(),
        "invariants_ok": invariants.max_divergence <= DIVERGENCE_TOL and invariants.max_mean_drift <= MEAN_DRIFT_TOL,
        "samples": len(ledger.records),
    }
    if len(energy_ledger.records) >= 2:
        summary["energy_ledger"] = energy_ledger_check(energy_ledger, ctl.dt).to_dict()
    if beltrami:
        summary["beltrami_max_relative_error"] = oracle["error"]
    _write_json(out_dir / "summary.json", summary)

    code = _exit_for(outcome.status)
    if code == EXIT_OK:
        failed = not summary["invariants_ok"] or not summary.get("energy_ledger", {"passed": True})["passed"]
        if failed:
            code = EXIT_CHECK
    return code, summary


def scaling_pair(cfg: ExperimentConfig, out_dir: Path | None = None, hooks=()) -> tuple[int, dict]:
    """Compare ``B(lam x, lam^2 t)`` from data ``B0`` with the run started at ``B0(lam x)``.

    ``hooks`` are passed to both runs.
    """
    lam = int(cfg.data.get("scaling", {}).get("lambda", 2))
    grid = build_grid(cfg)
    data = build_initial_data(cfg, grid)
    h = float(cfg["hall_coefficient"])
    state_a = SolverState(0.0, zeros(grid), data.b0, Regime.HALL_ONLY, h)
    state_b = SolverState(0.0, zeros(grid), rescale_coordinates(data.b0, lam), Regime.HALL_ONLY, h)
    ctl_b = build_step_control(cfg, state_b)
    ctl_a = build_step_control(cfg, state_a, t_scale=lam**2)
    invariants = InvariantTracker(), InvariantTracker()
    try:
        out_a = run(state_a, ctl_a, [*hooks, (1, invariants[0].hook())])
        out_b = run(state_b, ctl_b, [*hooks, (1, invariants[1].hook())])
    except CFLViolation as exc:
        return EXIT_CONFIG, {"termination": "cfl_violation", "detail": str(exc), "required_dt": exc.required}
    n = grid.n
    idx = (lam * np.arange(n)) % n
    pa = to_physical(out_a.state.b)[(slice(None),) + np.ix_(*[idx] * grid.dims)]
    pb = to_physical(out_b.state.b)
    ref = float(np.sqrt(np.mean(pb**2)))
    err = float(np.sqrt(np.mean((pa - pb) ** 2)))
    summary = {
        "config_kind": "scaling_pair",
        "lambda": lam,
        "n": n,
        "t_end": ctl_b.t_end,
        "termination": [out_a.status.value, out_b.status.value],
        "absolute_error": err,
        "relative_error": err / ref if ref > 0 else err,
        "invariants": [t.to_dict() for t in invariants],
    }
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.yaml").write_text(cfg.dump())
        write_checkpoint(out_dir / "final_unscaled.hmhd", out_a.state)
        write_checkpoint(out_dir / "final_scaled.hmhd", out_b.state)
        _write_json(out_dir / "summary.json", summary)
    worst = max(_exit_for(out_a.status), _exit_for(out_b.status))
    return worst, summary


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> tuple[int, dict]:
    out_dir = Path(out_dir or cfg.output_directory)
    if cfg.kind == "scaling_pair":
        return scaling_pair(cfg, out_dir)
    return run_single(cfg, out_dir)


def _sweep_worker(args):
    data, overrides, out_dir = args
    cfg = ExperimentConfig.from_dict(data).with_overrides(**overrides)
    try:
        code, summary = run_experiment(cfg, out_dir)
    except ConfigError as exc:
        return EXIT_CONFIG, {"error": str(exc)}
    return code, {k: summary.get(k) for k in ("termination", "time", "relative_error") if k in summary}


def sweep_points(cfg: ExperimentConfig) -> list[dict]:
    axes = cfg.data.get("sweep", {})
    names = sorted(axes)
    return [dict(zip(names, combo)) for combo in itertools.product(*(axes[a] for a in names))]


def run_sweep(cfg: ExperimentConfig, out_dir=None, workers: int | None = None) -> tuple[int, dict]:
    """Run every sweep point in its own subdirectory; write ``index.json`` at the end."""
    out_dir = Path(out_dir or cfg.output_directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = sweep_points(cfg)
    base = {k: v for k, v in cfg.data.items() if k != "sweep"}
    jobs = [(base, p, str(out_dir / f"point_{i:03d}")) for i, p in enumerate(points)]
    # validate every point up front so config errors surface before any run
    for _, p, _ in jobs:
        ExperimentConfig.from_dict(base).with_overrides(**p)
    workers = workers or os.cpu_count() or 1
    if workers == 1:
        results = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    index = {
        "points": [
            {"directory": Path(d).name, "overrides": p, "exit_code": code, **info}
            for (_, p, d), (code, info) in zip(jobs, results)
        ]
    }
    _write_json(out_dir / "index.json", index)
    return max((c for c, _ in results), default=EXIT_OK), index


def replay(run_dir) -> tuple[bool, str]:
    """Re-sample the stored checkpoint sequence and compare with ``ledger.jsonl`` byte for byte."""
    run_dir = Path(run_dir)
    cfg = ExperimentConfig.load(run_dir / "config.yaml")
    ledger = DiagnosticsLedger(cfg.criterion_config())
    ckpts = sorted((run_dir / "checkpoints").glob("ckpt_*.hmhd"))
    if not ckpts:
        return False, "no checkpoints to replay"
    stored = (run_dir / "ledger.jsonl").read_text()
    stored_steps = [json.loads(line).get("step") for line in stored.splitlines() if line.strip()]
    if len(stored_steps) != len(ckpts):
        return False, f"{len(ckpts)} checkpoints but {len(stored_steps)} ledger lines"
    h = float(cfg["hall_coefficient"])
    for path, step_index in zip(ckpts, stored_steps):
        ledger.sample(read_checkpoint(path, h), step_index)
    replayed = ledger.to_jsonl()
    if replayed == stored:
        return True, f"{len(ckpts)} samples reproduced bit-identically"
    for i, (a, b) in enumerate(zip(replayed.splitlines(), stored.splitlines())):
        if a != b:
            return False, f"first mismatch at sample {i}"
    return False, "ledger lengths differ"
