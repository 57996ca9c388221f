"""Initial-data families for the solver and the smallness experiments."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .inequalities import make_rng
from .littlewood_paley import besov_norm, norm_report, sobolev_norm_hom
from .spectral import (
    Grid,
    SpectralField,
    curl,
    dealias,
    divergence,
    l2_norm,
    leray_project,
    resample,
    to_physical,
    to_spectral,
    zeros,
)


class InitialDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class InitialData:
    u0: SpectralField
    b0: SpectralField

    def __post_init__(self):
        for name, f in (("u0", self.u0), ("b0", self.b0)):
            phys = to_physical(f)
            scale = 1.0 + float(np.abs(phys).max(initial=0.0))
            resid = float(np.abs(to_physical(divergence(f))).max())
            if resid > 1e-12 * scale:
                raise InitialDataError(f"{name} is not divergence-free (residual {resid:.3g})")

    @property
    def grid(self) -> Grid:
        return self.u0.grid

    @cached_property
    def reports(self) -> dict:
        return {"u": norm_report(self.u0), "b": norm_report(self.b0)}


def beltrami_field(grid: Grid, amplitude: float, lam: int) -> SpectralField:
    """ABC field with ``curl B = lam B``; the ``x_3``-independent variant on 2D grids."""
    x = grid.mesh()
    if grid.dims == 3:
        x1, x2, x3 = x
        b = np.stack(
            [
                np.sin(lam * x3) + np.cos(lam * x2),
                np.sin(lam * x1) + np.cos(lam * x3),
                np.sin(lam * x2) + np.cos(lam * x1),
            ]
        )
    else:
        x1, x2 = x
        b = np.stack([np.cos(lam * x2), np.sin(lam * x1), np.sin(lam * x2) + np.cos(lam * x1)])
    return to_spectral(amplitude * b, grid)


def gen_beltrami(grid: Grid, amplitude: float = 1.0, lam: int = 1) -> InitialData:
    if int(lam) != lam or lam < 1:
        raise InitialDataError(f"lambda must be a positive integer, got {lam}")
    if grid.box_length != 2 * np.pi:
        raise InitialDataError("Beltrami family is defined on the 2*pi box")
    if lam > grid.k_dealias:
        raise InitialDataError(f"lambda={lam} exceeds the dealiased band {grid.k_dealias:.3g}")
    b = beltrami_field(grid, amplitude, int(lam))
    resid = l2_norm(curl(b) - lam * b)
    if resid > 1e-12 * max(1.0, l2_norm(b)):
        raise InitialDataError(f"curl eigen-relation residual {resid:.3g}")
    return InitialData(zeros(grid), b)


GATE_NORMS = ("besov_gate", "sobolev_gate", "l2", "besov_sum")


def gate_norm(name: str, u: SpectralField, b: SpectralField) -> float:
    """Named norm of a ``(u, B)`` pair; homogeneous of degree one in the pair."""
    if name == "besov_gate":
        return besov_norm(u, 0.5) + besov_norm(b, 1.5)
    if name == "sobolev_gate":
        return sobolev_norm_hom(u, 1.5) + sobolev_norm_hom(b, 1.5)
    if name == "besov_sum":
        return besov_norm(u, 0.5) + besov_norm(b, 0.5) + besov_norm(b, 1.5)
    if name == "l2":
        return float(np.hypot(l2_norm(u), l2_norm(b)))
    raise InitialDataError(f"unknown norm {name!r}; expected one of {GATE_NORMS}")


def random_solenoidal(grid: Grid, rng: np.random.Generator, k_min: float, k_max: float) -> SpectralField:
    noise = rng.standard_normal((3,) + grid.shape)
    f = to_spectral(noise, grid)
    kmag = grid.kmag
    band = (kmag >= k_min - 1e-12) & (kmag <= k_max + 1e-12) & (kmag > 0)
    return leray_project(dealias(SpectralField(grid, f.coeffs * band)))


def _base_grid(grid: Grid, k_max: float) -> Grid:
    # k_dealias = n * pi / (1.5 L); smallest even n with k_max inside
    n = max(4, int(np.ceil(1.5 * k_max * grid.box_length / np.pi - 1e-9)))
    n += n % 2
    while Grid(n, grid.box_length, grid.dims).k_dealias < k_max * (1 - 1e-12):
        n += 2
    return Grid(min(n, grid.n), grid.box_length, grid.dims)


def gen_random_bandlimited(
    grid: Grid,
    norm: tuple[str, float],
    k_min: float = 1.0,
    k_max: float = 3.0,
    seed: int = 0,
    fields: str = "both",
) -> InitialData:
    """Divergence-free random data rescaled so ``norm = (name, target)`` holds exactly.

    The noise is drawn on the smallest grid whose dealiased band holds
    ``k_max`` and then resampled, so a seed gives the same field at every
    resolution.
    """
    name, target = norm
    if target < 0:
        raise InitialDataError("target norm must be nonnegative")
    kmag = grid.kmag
    band = (kmag >= k_min - 1e-12) & (kmag <= k_max + 1e-12) & (kmag > 0) & grid.dealias_mask
    if not band.any():
        raise InitialDataError(f"no retained modes with {k_min} <= |k| <= {k_max}")
    if fields not in ("both", "u", "b"):
        raise InitialDataError(f"fields must be 'both', 'u' or 'b', got {fields!r}")
    if target == 0:
        return InitialData(zeros(grid), zeros(grid))
    rng = make_rng(seed)
    base = _base_grid(grid, k_max)
    u = resample(random_solenoidal(base, rng, k_min, k_max), grid)
    b = resample(random_solenoidal(base, rng, k_min, k_max), grid)
    if fields == "u":
        b = zeros(grid)
    elif fields == "b":
        u = zeros(grid)
    current = gate_norm(name, u, b)
    if current == 0:
        raise InitialDataError(f"norm {name!r} vanishes on the generated field; target unreachable")
    factor = target / current
    return InitialData(u * factor, b * factor)


def gen_orszag_tang_2p5d(grid: Grid, amplitude: float = 1.0) -> InitialData:
    """Classical Orszag-Tang vortex with zero third components."""
    if grid.dims != 2:
        raise InitialDataError("Orszag-Tang 2.5D data needs a 2D grid")
    x1, x2 = grid.mesh()
    z = np.zeros(grid.shape)
    u = np.stack([-np.sin(x2), np.sin(x1), z])
    b = np.stack([-np.sin(x2), np.sin(2 * x1), z])
    return InitialData(to_spectral(amplitude * u, grid), to_spectral(amplitude * b, grid))


def gen_orszag_tang_3d(grid: Grid, amplitude: float = 1.0) -> InitialData:
    """Three-dimensional Orszag-Tang-like vortex (z-modulated magnetic field)."""
    if grid.dims != 3:
        raise InitialDataError("3D Orszag-Tang data needs a 3D grid")
    x1, x2, x3 = grid.mesh()
    z = np.zeros(grid.shape)
    u = np.stack([-2 * np.sin(x2), 2 * np.sin(x1), z])
    b = np.stack([-2 * np.sin(2 * x2) + np.sin(x3), 2 * np.sin(x1) + np.sin(x3), z])
    return InitialData(to_spectral(amplitude * u, grid), to_spectral(amplitude * b, grid))


GENERATORS = {
    "zero": lambda grid, **kw: InitialData(zeros(grid), zeros(grid)),
    "beltrami": gen_beltrami,
    "random_bandlimited": gen_random_bandlimited,
    "orszag_tang_2p5d": gen_orszag_tang_2p5d,
    "orszag_tang_3d": gen_orszag_tang_3d,
}
