"""Time series of the criterion quantities along a run.

Integrals in time use the trapezoid rule on the sampling instants; an
``L^inf``-in-time exponent (``q = inf``) accumulates a running maximum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .littlewood_paley import (
    NormReport,
    besov_norm,
    bmo_gradient,
    bmo_proxy,
    norm_report,
    sobolev_norm_hom,
)
from .solver import SolverState, divergence_residual, hm_energy
from .spectral import (
    SpectralField,
    curl,
    gradient_tensor,
    inner_product,
    l2_norm,
    multiply_physical,
    lp_norm_samples,
    physical_array,
)


class AdmissibilityError(ValueError):
    pass


def _exponent(x) -> float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "∞"):
        return math.inf
    return float(x)


def check_exponent_pair(p, q) -> tuple[float, float]:
    """Validate ``3/p + 2/q <= 1`` with ``p in (3, inf]``."""
    p, q = _exponent(p), _exponent(q)
    if not p > 3:
        raise AdmissibilityError(f"spatial exponent must exceed 3, got p={p}")
    if not q >= 1:
        raise AdmissibilityError(f"time exponent must be >= 1, got q={q}")
    if 3.0 / p + 2.0 / q > 1.0 + 1e-12:
        raise AdmissibilityError(f"(p, q) = ({p}, {q}) violates 3/p + 2/q <= 1")
    return p, q


@dataclass(frozen=True)
class CriterionConfig:
    serrin_pairs: tuple = ((math.inf, 2.0), (4.0, 8.0))
    beta_gamma_pairs: tuple = ((math.inf, 2.0), (4.0, 8.0))
    sample_cadence: int = 10
    hm_order: int = 3

    def __post_init__(self):
        object.__setattr__(self, "serrin_pairs", tuple(check_exponent_pair(*pq) for pq in self.serrin_pairs))
        object.__setattr__(self, "beta_gamma_pairs", tuple(check_exponent_pair(*pq) for pq in self.beta_gamma_pairs))
        if int(self.sample_cadence) != self.sample_cadence or self.sample_cadence < 1:
            raise ValueError("sample_cadence must be a positive integer")
        if int(self.hm_order) != self.hm_order or self.hm_order <= 2.5:
            raise ValueError("hm_order must be an integer greater than 5/2")

    @property
    def lp_orders(self) -> tuple:
        orders = {2.0} | {p for p, _ in self.serrin_pairs}
        return tuple(sorted(orders))


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


def serrin_key(p, q) -> str:
    return f"serrin_u_p{_fmt(p)}_q{_fmt(q)}"


def gradb_key(beta, gamma) -> str:
    return f"serrin_gradb_p{_fmt(beta)}_q{_fmt(gamma)}"


def energy(state: SolverState) -> float:
    return 0.5 * (l2_norm(state.u) ** 2 + l2_norm(state.b) ** 2)


def dissipation_rate(state: SolverState) -> float:
    """``||grad u||^2 + ||grad B||^2``."""
    return sobolev_norm_hom(state.u, 1.0) ** 2 + sobolev_norm_hom(state.b, 1.0) ** 2


def besov_sum(state: SolverState) -> float:
    u, b = state.u, state.b
    return besov_norm(u, 0.5) + besov_norm(b, 0.5) + besov_norm(b, 1.5)


def besov_dissipation_sum(state: SolverState) -> float:
    u, b = state.u, state.b
    return besov_norm(u, 2.5) + besov_norm(b, 2.5) + besov_norm(b, 3.5)


def gradient_lp(f: SpectralField, p: float) -> float:
    """``L^p`` norm of the full gradient tensor with pointwise Frobenius magnitude."""
    coeffs = gradient_tensor(f).reshape((-1,) + f.grid.shape)
    return lp_norm_samples(physical_array(coeffs, f.grid), f.grid, p)


def hall_work(b: SpectralField) -> tuple[float, float]:
    """``|<curl(j x B), B>|`` and its natural scale ``||j|| ||j x B||``."""
    j = curl(b)
    jxb = multiply_physical(j, b, "cross")
    return abs(inner_product(curl(jxb), b)), l2_norm(j) * l2_norm(jxb)


def _accumulate(prev_acc, prev_val, val, dt, q):
    if math.isinf(q):
        return max(prev_acc, val)
    return prev_acc + 0.5 * dt * (prev_val + val)


@dataclass
class DiagnosticsLedger:
    """Sampled diagnostics of one run.

    With ``energy_only`` the records carry just the energy balance terms,
    cheap enough to sample every step.
    """

    config: CriterionConfig = field(default_factory=CriterionConfig)
    records: list = field(default_factory=list)
    energy_only: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.array([r["time"] for r in self.records])

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.records])

    @property
    def energy(self) -> np.ndarray:
        return self.series("energy")

    @property
    def dissipation_integral(self) -> np.ndarray:
        return self.series("dissipation_integral")

    def sample(self, state: SolverState, step: int | None = None) -> dict:
        """Evaluate every monitored quantity at ``state`` and append a record."""
        cfg = self.config
        u, b = state.u, state.b
        rec = {"time": float(state.time)}
        if step is not None:
            rec["step"] = int(step)
        if self.energy_only:
            return self._sample_energy(state, rec)
        u_report = norm_report(u, cfg.hm_order, cfg.lp_orders)
        b_report = norm_report(b, cfg.hm_order, cfg.lp_orders)
        rec["energy"] = energy(state)
        rec["dissipation_rate"] = dissipation_rate(state)
        rec["hm"] = hm_energy(state, cfg.hm_order)
        rec["besov_sum"] = besov_sum(state)
        rec["besov_dissipation_sum"] = besov_dissipation_sum(state)
        rec["hall_work"], rec["hall_work_scale"] = hall_work(b)
        integrands = {}
        for p, q in cfg.serrin_pairs:
            lp = u_report.lp[p]
            integrands[serrin_key(p, q)] = lp if math.isinf(q) else lp**q
        for beta, gamma in cfg.beta_gamma_pairs:
            g = gradient_lp(b, beta)
            integrands[gradb_key(beta, gamma)] = g if math.isinf(gamma) else g**gamma
        integrands["bmo"] = u_report.bmo_proxy**2 + bmo_gradient(b) ** 2
        integrands["j_bmo"] = bmo_proxy(curl(b)) ** 2

        exponents = {serrin_key(p, q): q for p, q in cfg.serrin_pairs}
        exponents.update({gradb_key(bt, gm): gm for bt, gm in cfg.beta_gamma_pairs})
        prev = self.records[-1] if self.records else None
        dt = rec["time"] - prev["time"] if prev else 0.0
        rec["dissipation_integral"] = (
            _accumulate(prev["dissipation_integral"], prev["dissipation_rate"], rec["dissipation_rate"], dt, 1) if prev else 0.0
        )
        rec["besov_dissipation_integral"] = (
            _accumulate(prev["besov_dissipation_integral"], prev["besov_dissipation_sum"], rec["besov_dissipation_sum"], dt, 1)
            if prev
            else 0.0
        )
        for key, val in integrands.items():
            q = exponents.get(key, 1.0)
            rec[f"{key}_integrand"] = val
            if prev:
                rec[f"{key}_accumulator"] = _accumulate(prev[f"{key}_accumulator"], prev[f"{key}_integrand"], val, dt, q)
            else:
                rec[f"{key}_accumulator"] = val if math.isinf(q) else 0.0
        rec["u"] = u_report.to_dict()
        rec["b"] = b_report.to_dict()
        self.records.append(rec)
        return rec

    def _sample_energy(self, state, rec):
        rec["energy"] = energy(state)
        rec["dissipation_rate"] = dissipation_rate(state)
        prev = self.records[-1] if self.records else None
        if prev:
            dt = rec["time"] - prev["time"]
            rec["dissipation_integral"] = _accumulate(
                prev["dissipation_integral"], prev["dissipation_rate"], rec["dissipation_rate"], dt, 1
            )
        else:
            rec["dissipation_integral"] = 0.0
        self.records.append(rec)
        return rec

    def hook(self):
        """Callback usable in :func:`hallmhd.solver.run`."""
        return lambda state, i: self.sample(state, i)

    # -- export ------------------------------------------------------------

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def read_jsonl(cls, path, config: CriterionConfig | None = None, energy_only: bool = False) -> "DiagnosticsLedger":
        with open(path) as fh:
            records = [json.loads(line) for line in fh if line.strip()]
        return cls(config or CriterionConfig(), records, energy_only)

    def reports(self, which: str = "u") -> list[NormReport]:
        return [NormReport.from_dict(r[which]) for r in self.records]


def sample(state: SolverState, cfg: CriterionConfig, ledger: DiagnosticsLedger | None = None) -> dict:
    """Sample ``state`` into ``ledger`` (a fresh one when omitted)."""
    ledger = ledger if ledger is not None else DiagnosticsLedger(cfg)
    return ledger.sample(state)


@dataclass
class InvariantTracker:
    """Running maxima of the divergence residual and of the drift of the spatial means."""

    max_divergence: float = 0.0
    max_mean_drift: float = 0.0
    max_magnitude: float = 0.0
    samples: int = 0
    _means: tuple | None = field(default=None, repr=False)

    def update(self, state: SolverState, step: int | None = None) -> None:
        means = (state.u.mean, state.b.mean)
        if self._means is None:
            self._means = means
        drift = max(float(np.abs(means[i] - self._means[i]).max()) for i in range(2))
        self.max_mean_drift = max(self.max_mean_drift, drift)
        self.max_divergence = max(self.max_divergence, divergence_residual(state))
        mag = max(float(np.abs(f.coeffs).sum(axis=tuple(range(1, f.coeffs.ndim))).max()) for f in (state.u, state.b))
        self.max_magnitude = max(self.max_magnitude, mag)
        self.samples += 1

    def hook(self):
        return self.update

    def to_dict(self) -> dict:
        return {
            "max_divergence": self.max_divergence,
            "max_mean_drift": self.max_mean_drift,
            "max_magnitude_bound": self.max_magnitude,
            "samples": self.samples,
        }


# -- gates and checks ------------------------------------------------------


@dataclass
class GateResult:
    value: float
    threshold: float
    passed: bool
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.threshold - self.value

    def to_dict(self) -> dict:
        return {"value": self.value, "threshold": self.threshold, "margin": self.margin, "passed": self.passed, **self.extra}


def smallness_gate_sobolev(u0: SpectralField, b0: SpectralField, K: float) -> GateResult:
    """``||u0||_{H^{3/2}} + ||B0||_{H^{3/2}} < K`` (homogeneous norms)."""
    value = sobolev_norm_hom(u0, 1.5) + sobolev_norm_hom(b0, 1.5)
    return GateResult(value, K, value < K)


def smallness_gate_besov(u0: SpectralField, b0: SpectralField, eps: float) -> GateResult:
    """``||u0||_{B^{1/2}_{2,1}} + ||B0||_{B^{3/2}_{2,1}} < eps``.

    Also reports the interpolation ``||B0||_{B^{1/2}} <= ||B0||_{B^{3/2}}^{1/3} ||B0||_{L^2}^{2/3}``
    with unit constant.
    """
    b_half = besov_norm(b0, 0.5)
    b_three_half = besov_norm(b0, 1.5)
    value = besov_norm(u0, 0.5) + b_three_half
    bound = b_three_half ** (1 / 3) * l2_norm(b0) ** (2 / 3)
    ratio = 0.0 if b_half == 0 else (math.inf if bound == 0 else b_half / bound)
    extra = {"b_besov_half": b_half, "interpolation_bound": bound, "interpolation_ratio": ratio}
    return GateResult(value, eps, value < eps, extra)


@dataclass
class AprioriReport:
    gate_passed: bool
    initial: float
    sup: float
    dissipation_integral: float
    absorbed_lhs: float
    passed: bool | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def apriori_besov_check(ledger: DiagnosticsLedger, C1_emp: float = 1.0, gate: GateResult | None = None) -> AprioriReport:
    """``sup_t`` of the Besov sum against twice its initial value.

    When ``gate`` is given and failed, the check is skipped (``passed`` is None).
    """
    series = ledger.series("besov_sum")
    initial = float(series[0])
    sup = float(series.max())
    diss = float(ledger.records[-1]["besov_dissipation_integral"])
    lhs = sup + 0.5 * C1_emp * diss
    gate_ok = True if gate is None else gate.passed
    if not gate_ok:
        return AprioriReport(False, initial, sup, diss, lhs, None)
    passed = bool(sup <= 2 * initial and math.isfinite(diss))
    return AprioriReport(True, initial, sup, diss, lhs, passed)


@dataclass
class EnergyLedgerResult:
    residual: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def energy_ledger_residuals(ledger: DiagnosticsLedger) -> np.ndarray:
    return ledger.energy + ledger.dissipation_integral - ledger.energy[0]


def energy_ledger_check(ledger: DiagnosticsLedger, dt: float) -> EnergyLedgerResult:
    """``max_t [E(t) + int_0^t dissipation - E(0)]`` against ``10 dt^2 t_end E(0)``."""
    if len(ledger.records) < 2:
        raise ValueError("energy ledger check needs at least two samples")
    residual = float(energy_ledger_residuals(ledger).max())
    t_end = float(ledger.times[-1] - ledger.times[0])
    bound = 10 * dt**2 * t_end * float(ledger.energy[0]) + 1e-12
    return EnergyLedgerResult(residual, bound, residual <= bound)
