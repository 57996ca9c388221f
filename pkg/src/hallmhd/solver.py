"""Pseudo-spectral time integration of incompressible resistive Hall-MHD.

Viscosity and resistivity are both fixed to 1.  The pressure (including the
magnetic pressure ``|B|^2/2``) never appears: the velocity tendency is Leray
projected instead.  Diffusion is integrated exactly with the factor
``exp(-|k|^2 dt)`` and the nonlinear terms by the explicit midpoint rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .littlewood_paley import sobolev_norm_inhom
from .spectral import (
    Grid,
    SpectralField,
    advect_physical,
    curl,
    dealias,
    divergence,
    laplacian,
    leray_project,
    physical_array,
    to_physical,
    to_spectral,
    zeros,
)


class Regime(enum.IntEnum):
    FULL_3D = 0
    HALL_ONLY = 1
    TWO_AND_HALF_D = 2

    @classmethod
    def parse(cls, value) -> "Regime":
        if isinstance(value, Regime):
            return value
        if isinstance(value, int):
            return cls(value)
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "full": cls.FULL_3D,
            "full3d": cls.FULL_3D,
            "full_3d": cls.FULL_3D,
            "hall_only": cls.HALL_ONLY,
            "hallonly": cls.HALL_ONLY,
            "two_and_half_d": cls.TWO_AND_HALF_D,
            "twoandhalfd": cls.TWO_AND_HALF_D,
            "2p5d": cls.TWO_AND_HALF_D,
        }
        if key not in aliases:
            raise ValueError(f"unknown regime {value!r}")
        return aliases[key]

    @property
    def label(self) -> str:
        return {0: "full3d", 1: "hall_only", 2: "two_and_half_d"}[int(self)]


class RegimeError(ValueError):
    pass


class CFLViolation(RuntimeError):
    def __init__(self, dt: float, required: float):
        super().__init__(f"dt={dt:.6g} exceeds the stability bound {required:.6g}")
        self.dt = dt
        self.required = required


class NumericalBlowup(RuntimeError):
    def __init__(self, time: float, reason: str = "non-finite coefficients"):
        super().__init__(f"numerical blow-up at t={time:.6g}: {reason}")
        self.time = time


@dataclass(frozen=True, eq=False)
class SolverState:
    time: float
    u: SpectralField
    b: SpectralField
    regime: Regime = Regime.FULL_3D
    hall_coefficient: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        if self.u.ncomp != 3 or self.b.ncomp != 3:
            raise ValueError("u and b must be 3-component fields")
        if self.u.grid != self.b.grid:
            raise ValueError("u and b live on different grids")
        if self.hall_coefficient < 0:
            raise ValueError("hall_coefficient must be nonnegative")
        if self.time < 0:
            raise ValueError("time must be nonnegative")
        dims = self.u.grid.dims
        if self.regime == Regime.TWO_AND_HALF_D and dims != 2:
            raise RegimeError("the 2.5D regime lives on a 2D grid")
        if self.regime != Regime.TWO_AND_HALF_D and dims != 3:
            raise RegimeError(f"regime {self.regime.label} needs a 3D grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def with_fields(self, time, u, b) -> "SolverState":
        return replace(self, time=time, u=u, b=b)


@dataclass(frozen=True)
class StepControl:
    dt: float
    t_end: float
    cfl_safety: float = 1.0
    max_hm_norm: float = math.inf
    spectral_tail_fraction: float = 0.01
    hm_order: int = 3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not self.max_hm_norm > 0:
            raise ValueError("max_hm_norm must be positive")
        if not 0 < self.spectral_tail_fraction < 1:
            raise ValueError("spectral_tail_fraction must lie in (0, 1)")


# -- right-hand sides ------------------------------------------------------


def _hall_term(b: SpectralField, b_phys: np.ndarray) -> SpectralField:
    """``curl((curl B) x B)`` with a dealiased product."""
    j_phys = to_physical(curl(b))
    return curl(dealias(to_spectral(np.cross(j_phys, b_phys, axis=0), b.grid)))


def nonlinear_full(state: SolverState, phys=None) -> tuple[SpectralField, SpectralField]:
    """Nonlinear tendencies of the full system (velocity one projected)."""
    u, b = state.u, state.b
    u_phys, b_phys = phys if phys is not None else (to_physical(u), to_physical(b))
    grid = state.grid
    k = grid.wavevector
    nu = np.zeros((3,) + grid.shape)
    nb = np.zeros((3,) + grid.shape)
    # one inverse transform per partial derivative, shared by both equations
    for j in range(grid.dims):
        du_j = physical_array(1j * k[j] * u.coeffs, grid)
        db_j = physical_array(1j * k[j] * b.coeffs, grid)
        nu += b_phys[j] * db_j - u_phys[j] * du_j
        nb += b_phys[j] * du_j - u_phys[j] * db_j
    du = leray_project(dealias(to_spectral(nu, grid)))
    db = dealias(to_spectral(nb, grid))
    if state.hall_coefficient:
        db = db - state.hall_coefficient * _hall_term(b, b_phys)
    return du, db


def rhs_full(state: SolverState) -> tuple[SpectralField, SpectralField]:
    """``du = P[-(u.grad)u + (B.grad)B] + lap u``,
    ``db = -(u.grad)B - h curl((curl B) x B) + (B.grad)u + lap B``."""
    if state.regime != Regime.FULL_3D:
        raise RegimeError(f"rhs_full called in regime {state.regime.label}")
    du, db = nonlinear_full(state)
    return du + laplacian(state.u), db + laplacian(state.b)


def nonlinear_hall_only(state: SolverState, phys=None) -> SpectralField:
    b = state.b
    b_phys = phys[1] if phys is not None else to_physical(b)
    return -state.hall_coefficient * _hall_term(b, b_phys)


def rhs_hall_only(state: SolverState) -> SpectralField:
    """``db = -curl((curl B) x B) + lap B`` for the magnetic field alone."""
    if state.regime != Regime.HALL_ONLY:
        raise RegimeError(f"rhs_hall_only called in regime {state.regime.label}")
    if np.any(state.u.coeffs):
        raise RegimeError("hall-only regime requires u == 0")
    return nonlinear_hall_only(state) + laplacian(state.b)


def nonlinear_2p5d(state: SolverState, phys=None) -> tuple[SpectralField, SpectralField]:
    """Planar-gradient form with ``j = curl B`` and ``d_3 = 0``."""
    u, b = state.u, state.b
    grid = state.grid
    u_phys, b_phys = phys if phys is not None else (to_physical(u), to_physical(b))
    u_planar, b_planar = u_phys[:2], b_phys[:2]
    nu = advect_physical(b_planar, b) - advect_physical(u_planar, u)
    nb = advect_physical(b_planar, u) - advect_physical(u_planar, b)
    du = leray_project(dealias(to_spectral(nu, grid)))
    db = dealias(to_spectral(nb, grid))
    if state.hall_coefficient:
        j = curl(b)
        j_phys = to_physical(j)
        hall = advect_physical(b_planar, j) - advect_physical(j_phys[:2], b)
        db = db - state.hall_coefficient * dealias(to_spectral(hall, grid))
    return du, db


def rhs_2p5d(state: SolverState) -> tuple[SpectralField, SpectralField]:
    if state.regime != Regime.TWO_AND_HALF_D:
        raise RegimeError(f"rhs_2p5d called in regime {state.regime.label}")
    du, db = nonlinear_2p5d(state)
    return du + laplacian(state.u), db + laplacian(state.b)


def nonlinear_terms(state: SolverState, phys=None) -> tuple[SpectralField, SpectralField]:
    """Nonlinear tendencies; ``phys`` optionally carries ``(u, B)`` in physical space."""
    if state.regime == Regime.FULL_3D:
        return nonlinear_full(state, phys)
    if state.regime == Regime.HALL_ONLY:
        return zeros(state.grid), nonlinear_hall_only(state, phys)
    return nonlinear_2p5d(state, phys)


def rhs(state: SolverState) -> tuple[SpectralField, SpectralField]:
    if state.regime == Regime.FULL_3D:
        return rhs_full(state)
    if state.regime == Regime.HALL_ONLY:
        return zeros(state.grid), rhs_hall_only(state)
    return rhs_2p5d(state)


# -- time stepping ---------------------------------------------------------


def _max_magnitude(phys: np.ndarray) -> float:
    return float(np.sqrt(np.max(np.sum(phys * phys, axis=0))))


def max_magnitude(f: SpectralField) -> float:
    return _max_magnitude(to_physical(f))


def _physical_pair(state: SolverState):
    b_phys = to_physical(state.b)
    if state.regime == Regime.HALL_ONLY:
        return np.zeros_like(b_phys), b_phys
    return to_physical(state.u), b_phys


def _cfl_from_physical(state: SolverState, u_phys, b_phys, cfl_safety: float) -> float:
    dx = state.grid.dx
    umax = _max_magnitude(u_phys)
    bmax = _max_magnitude(b_phys)
    bounds = [math.inf]
    if umax > 0:
        bounds.append(dx / umax)
    if bmax > 0:
        bounds.append(dx / bmax)
    if state.hall_coefficient > 0:
        bounds.append(dx * dx / (math.pi**2 * state.hall_coefficient * bmax + 1e-300))
    return cfl_safety * min(bounds)


def cfl_bound(state: SolverState, cfl_safety: float = 1.0) -> float:
    """Largest admissible ``dt``: advection by ``u`` and ``B`` plus the whistler-type Hall limit."""
    return _cfl_from_physical(state, *_physical_pair(state), cfl_safety)


@lru_cache(maxsize=16)
def _integrating_factors(grid: Grid, dt: float) -> tuple[np.ndarray, np.ndarray]:
    half = np.exp(-grid.k2 * (0.5 * dt))
    return half, half * half


def _finite(*fields: SpectralField) -> bool:
    return all(np.all(np.isfinite(f.coeffs)) for f in fields)


def _enforce(state: SolverState, u: SpectralField, b: SpectralField) -> tuple[SpectralField, SpectralField]:
    if state.regime == Regime.HALL_ONLY:
        return zeros(state.grid), leray_project(dealias(b))
    return leray_project(dealias(u)), leray_project(dealias(b))


def step(state: SolverState, ctl: StepControl, dt: float | None = None) -> SolverState:
    """One integrating-factor midpoint step.

    ``y* = E(dt/2) (y + dt/2 N(y))``; ``y' = E(dt) y + dt E(dt/2) N(y*)``.
    """
    dt = ctl.dt if dt is None else dt
    if not _finite(state.u, state.b):
        raise NumericalBlowup(state.time)
    phys = _physical_pair(state)
    bound = _cfl_from_physical(state, *phys, ctl.cfl_safety)
    if dt > bound * (1 + 1e-12):
        raise CFLViolation(dt, bound)
    half, full = _integrating_factors(state.grid, dt)

    nu1, nb1 = nonlinear_terms(state, phys)
    u_mid = SpectralField(state.grid, half * (state.u.coeffs + 0.5 * dt * nu1.coeffs))
    b_mid = SpectralField(state.grid, half * (state.b.coeffs + 0.5 * dt * nb1.coeffs))
    u_mid, b_mid = _enforce(state, u_mid, b_mid)
    mid = state.with_fields(state.time + 0.5 * dt, u_mid, b_mid)

    nu2, nb2 = nonlinear_terms(mid)
    u_new = SpectralField(state.grid, full * state.u.coeffs + dt * half * nu2.coeffs)
    b_new = SpectralField(state.grid, full * state.b.coeffs + dt * half * nb2.coeffs)
    u_new, b_new = _enforce(state, u_new, b_new)
    if not _finite(u_new, b_new):
        raise NumericalBlowup(state.time + dt)
    return state.with_fields(state.time + dt, u_new, b_new)


# -- driving a run ---------------------------------------------------------


class Termination(str, enum.Enum):
    COMPLETED = "completed"
    NUMERICAL_BLOWUP = "numerical_blowup"
    RESOLUTION_LOST = "resolution_lost"


@dataclass
class RunOutcome:
    status: Termination
    time: float
    state: SolverState
    steps: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {"termination": self.status.value, "time": self.time, "steps": self.steps, "detail": self.detail}


def hm_energy(state: SolverState, m: int) -> float:
    """``||u||_{H^m}^2 + ||B||_{H^m}^2``."""
    return sobolev_norm_inhom(state.u, m) ** 2 + sobolev_norm_inhom(state.b, m) ** 2


def tail_fraction(state: SolverState) -> float:
    """Share of the energy carried by the top third of the retained wavenumber band."""
    g = state.grid
    power = np.sum(np.abs(state.u.coeffs) ** 2 + np.abs(state.b.coeffs) ** 2, axis=0)
    total = power.sum()
    if total == 0:
        return 0.0
    tail = g.kmag > (2.0 / 3.0) * g.k_dealias
    return float(power[tail].sum() / total)


Hook = Callable[[SolverState, int], None]


def run(
    initial: SolverState,
    ctl: StepControl,
    hooks: Iterable[tuple[int, Hook]] = (),
    checkpoint_path=None,
) -> RunOutcome:
    """Step from ``initial`` to ``ctl.t_end``.

    ``hooks`` is a list of ``(cadence, callback)``; each callback receives the
    state and step index at step 0, every ``cadence`` steps and once more at
    the final state.  The final state is written to ``checkpoint_path`` when
    given.
    """
    hooks = [(int(c), cb) for c, cb in hooks]
    if any(c < 1 for c, _ in hooks):
        raise ValueError("hook cadence must be >= 1")
    last = [-1] * len(hooks)

    def fire(s, i, final=False):
        for h, (cadence, cb) in enumerate(hooks):
            if last[h] != i and (i % cadence == 0 or final):
                cb(s, i)
                last[h] = i

    def finish(status, s, i, detail=""):
        fire(s, i, final=True)
        if checkpoint_path is not None:
            from .checkpoint import write_checkpoint

            write_checkpoint(checkpoint_path, s)
        return RunOutcome(status, s.time, s, i, detail)

    def verdict(s):
        hm = hm_energy(s, ctl.hm_order)
        if not math.isfinite(hm) or hm > ctl.max_hm_norm:
            return Termination.NUMERICAL_BLOWUP, f"H^{ctl.hm_order} energy {hm:.6g} above {ctl.max_hm_norm:.6g}"
        tail = tail_fraction(s)
        if tail > ctl.spectral_tail_fraction:
            return Termination.RESOLUTION_LOST, f"spectral tail fraction {tail:.3g}"
        return None

    state = initial
    nsteps = max(1, int(math.ceil((ctl.t_end - initial.time) / ctl.dt - 1e-9)))
    mean_u, mean_b = initial.u.mean, initial.b.mean
    stop = verdict(state)
    if stop:
        return finish(stop[0], state, 0, stop[1])
    fire(state, 0)
    for i in range(1, nsteps + 1):
        dt = min(ctl.dt, ctl.t_end - state.time)
        try:
            state = step(state, ctl, dt)
        except NumericalBlowup as exc:
            return finish(Termination.NUMERICAL_BLOWUP, state, i - 1, str(exc))
        if i == nsteps:
            state = replace(state, time=float(ctl.t_end))
        _check_means(state, mean_u, mean_b)
        stop = verdict(state)
        if stop:
            return finish(stop[0], state, i, stop[1])
        fire(state, i)
    return finish(Termination.COMPLETED, state, nsteps)


def _check_means(state, mean_u, mean_b, tol=1e-13):
    scale = 1.0 + np.abs(mean_u).max() + np.abs(mean_b).max()
    drift = max(np.abs(state.u.mean - mean_u).max(), np.abs(state.b.mean - mean_b).max())
    if drift > tol * scale:
        raise AssertionError(f"mean drifted by {drift:.3g} at t={state.time:.6g}")


def divergence_residual(state: SolverState) -> float:
    """Max of ``|div u|`` and ``|div B|`` over the grid."""
    return max(float(np.abs(to_physical(divergence(f))).max()) for f in (state.u, state.b))
