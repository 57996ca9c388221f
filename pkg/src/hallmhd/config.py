"""Experiment configuration files.

A config is a YAML mapping with these sections (all keys optional except
``grid`` and ``initial_data``)::

    kind: single                 # or scaling_pair
    grid: {n: 32, box_length: 6.283185307179586, dims: 3}
    regime: hall_only            # full3d | hall_only | two_and_half_d
    hall_coefficient: 1.0
    initial_data:
      generator: beltrami        # zero | beltrami | random_bandlimited |
                                 # orszag_tang_2p5d | orszag_tang_3d
      amplitude: 1.0             # beltrami, orszag_tang_*
      lambda: 1                  # beltrami
      norm: besov_gate           # random_bandlimited: besov_gate | sobolev_gate | l2 | besov_sum
      target: 1.0e-3             # random_bandlimited
      k_min: 1
      k_max: 3
      fields: both               # both | u | b
      seed: 0
    step: {dt: 1.0e-3, t_end: 0.5, cfl_safety: 1.0,
           max_hm_factor: 1.0e6, spectral_tail_fraction: 0.01}
    criteria:
      serrin_pairs: [[.inf, 2], [4, 8]]
      beta_gamma_pairs: [[.inf, 2], [4, 8]]
      sample_cadence: 10
      hm_order: 3
    output: {directory: out, checkpoint_every_sample: true}
    scaling: {lambda: 2}         # scaling_pair only
    sweep: {amplitude: [...], n: [...], dt: [...], lambda: [...]}

``step.max_hm_norm`` may be given instead of ``max_hm_factor`` (which
multiplies the initial ``H^m`` energy).  The environment variable
``HALLMHD_OUTPUT_DIR`` overrides ``output.directory``; nothing else is read
from the environment.
"""

from __future__ import annotations

import copy
import math
import os
from dataclasses import dataclass, field

import yaml

from .monitor import AdmissibilityError, CriterionConfig
from .solver import Regime

OUTPUT_ENV = "HALLMHD_OUTPUT_DIR"

SECTIONS = {
    "kind": None,
    "grid": {"n", "box_length", "dims"},
    "regime": None,
    "hall_coefficient": None,
    "initial_data": {
        "generator", "amplitude", "lambda", "norm", "target", "k_min", "k_max", "fields", "seed",
    },
    "step": {"dt", "t_end", "cfl_safety", "max_hm_norm", "max_hm_factor", "spectral_tail_fraction"},
    "criteria": {"serrin_pairs", "beta_gamma_pairs", "sample_cadence", "hm_order"},
    "output": {"directory", "checkpoint_every_sample"},
    "scaling": {"lambda"},
    "sweep": {"amplitude", "n", "dt", "lambda"},
}

DEFAULTS = {
    "kind": "single",
    "regime": "full3d",
    "hall_coefficient": 1.0,
    "grid": {"box_length": 2 * math.pi, "dims": 3},
    "initial_data": {"seed": 0},
    "step": {"cfl_safety": 1.0, "max_hm_factor": 1.0e6, "spectral_tail_fraction": 0.01},
    "criteria": {
        "serrin_pairs": [[math.inf, 2.0], [4.0, 8.0]],
        "beta_gamma_pairs": [[math.inf, 2.0], [4.0, 8.0]],
        "sample_cadence": 10,
        "hm_order": 3,
    },
    "output": {"directory": "out", "checkpoint_every_sample": True},
}


class ConfigError(ValueError):
    """Validation failure; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _line_map(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based source lines."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", mark.line + 1 if mark else None) from None
    lines = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                p = path + (key.value,)
                lines[p] = key.start_mark.line + 1
                walk(value, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                lines[path + (i,)] = item.start_mark.line + 1
                walk(item, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


@dataclass
class ExperimentConfig:
    data: dict
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    # -- access --------------------------------------------------------------

    def __getitem__(self, key):
        return self.data[key]

    @property
    def kind(self) -> str:
        return self.data["kind"]

    @property
    def regime(self) -> Regime:
        return Regime.parse(self.data["regime"])

    @property
    def output_directory(self) -> str:
        return os.environ.get(OUTPUT_ENV) or self.data["output"]["directory"]

    def criterion_config(self) -> CriterionConfig:
        c = self.data["criteria"]
        return CriterionConfig(
            serrin_pairs=tuple(tuple(pq) for pq in c["serrin_pairs"]),
            beta_gamma_pairs=tuple(tuple(pq) for pq in c["beta_gamma_pairs"]),
            sample_cadence=c["sample_cadence"],
            hm_order=c["hm_order"],
        )

    def with_overrides(self, **axes) -> "ExperimentConfig":
        """Copy with sweep axes applied (``amplitude``, ``n``, ``dt``, ``lambda``)."""
        d = copy.deepcopy(self.data)
        d.pop("sweep", None)
        for axis, value in axes.items():
            if axis == "n":
                d["grid"]["n"] = value
            elif axis == "dt":
                d["step"]["dt"] = value
            elif axis == "amplitude":
                if d["initial_data"].get("generator") == "random_bandlimited":
                    d["initial_data"]["target"] = value
                else:
                    d["initial_data"]["amplitude"] = value
            elif axis == "lambda":
                if d["kind"] == "scaling_pair":
                    d.setdefault("scaling", {})["lambda"] = value
                else:
                    d["initial_data"]["lambda"] = value
            else:
                raise ConfigError(f"unknown sweep axis {axis!r}")
        return ExperimentConfig.from_dict(d)

    # -- (de)serialisation ---------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict, lines: dict | None = None) -> "ExperimentConfig":
        cfg = cls(_merge_defaults(raw), lines or {})
        cfg.validate()
        return cfg

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        lines = _line_map(text)
        raw = yaml.safe_load(text)
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError("top level must be a mapping", 1)
        return cls.from_dict(raw, lines)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.parse(fh.read())

    def dump(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True, default_flow_style=None)

    # -- validation ----------------------------------------------------------

    def _fail(self, path: tuple, message: str):
        line = None
        for i in range(len(path), 0, -1):
            if path[:i] in self.lines:
                line = self.lines[path[:i]]
                break
        raise ConfigError(f"{'.'.join(map(str, path))}: {message}", line)

    def validate(self) -> None:
        d = self.data
        for key, value in d.items():
            if key not in SECTIONS:
                self._fail((key,), "unknown key")
            allowed = SECTIONS[key]
            if allowed is not None:
                if not isinstance(value, dict):
                    self._fail((key,), "expected a mapping")
                for sub in value:
                    if sub not in allowed:
                        self._fail((key, sub), "unknown key")
        if d["kind"] not in ("single", "scaling_pair"):
            self._fail(("kind",), f"expected 'single' or 'scaling_pair', got {d['kind']!r}")
        if "n" not in d["grid"]:
            self._fail(("grid",), "missing n")
        from .spectral import Grid

        try:
            Grid(d["grid"]["n"], d["grid"]["box_length"], d["grid"]["dims"])
        except (ValueError, TypeError) as exc:
            self._fail(("grid",), str(exc))
        try:
            regime = Regime.parse(d["regime"])
        except ValueError as exc:
            self._fail(("regime",), str(exc))
        if (regime == Regime.TWO_AND_HALF_D) != (d["grid"]["dims"] == 2):
            self._fail(("regime",), "two_and_half_d needs dims 2; the other regimes need dims 3")
        h = d["hall_coefficient"]
        if not isinstance(h, (int, float)) or h < 0:
            self._fail(("hall_coefficient",), "must be a nonnegative number")
        init = d["initial_data"]
        from .initial_data import GATE_NORMS, GENERATORS

        gen = init.get("generator")
        if gen not in GENERATORS:
            self._fail(("initial_data", "generator"), f"expected one of {sorted(GENERATORS)}, got {gen!r}")
        if gen == "random_bandlimited":
            if init.get("norm") not in GATE_NORMS:
                self._fail(("initial_data", "norm"), f"expected one of {GATE_NORMS}")
            if "target" not in init:
                self._fail(("initial_data",), "random_bandlimited needs a target")
        st = d["step"]
        for key in ("dt", "t_end"):
            if key not in st:
                self._fail(("step",), f"missing {key}")
            if not isinstance(st[key], (int, float)) or not st[key] > 0:
                self._fail(("step", key), "must be a positive number")
        if not 0 < st["cfl_safety"] <= 1:
            self._fail(("step", "cfl_safety"), "must lie in (0, 1]")
        if not 0 < st["spectral_tail_fraction"] < 1:
            self._fail(("step", "spectral_tail_fraction"), "must lie in (0, 1)")
        from .monitor import check_exponent_pair

        for key in ("serrin_pairs", "beta_gamma_pairs"):
            pairs = d["criteria"][key]
            if not isinstance(pairs, list):
                self._fail(("criteria", key), "expected a list of [p, q] pairs")
            for i, pair in enumerate(pairs):
                try:
                    check_exponent_pair(*pair)
                except (AdmissibilityError, ValueError, TypeError) as exc:
                    self._fail(("criteria", key, i), str(exc))
        try:
            self.criterion_config()
        except (AdmissibilityError, ValueError, TypeError) as exc:
            self._fail(("criteria",), str(exc))
        if d["kind"] == "scaling_pair":
            if regime != Regime.HALL_ONLY:
                self._fail(("regime",), "scaling_pair runs the hall_only regime")
            lam = d.get("scaling", {}).get("lambda", 2)
            if int(lam) != lam or lam < 2:
                self._fail(("scaling", "lambda"), "must be an integer >= 2")
        for axis, values in d.get("sweep", {}).items():
            if not isinstance(values, list) or not values:
                self._fail(("sweep", axis), "expected a nonempty list")


def _merge_defaults(raw: dict) -> dict:
    d = copy.deepcopy(raw)
    for key, default in DEFAULTS.items():
        if isinstance(default, dict):
            section = d.setdefault(key, {})
            if isinstance(section, dict):
                for sub, v in default.items():
                    section.setdefault(sub, copy.deepcopy(v))
        else:
            d.setdefault(key, default)
    d.setdefault("initial_data", {})
    return d
