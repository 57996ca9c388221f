"""Numerical oracles for the Littlewood-Paley toolbox inequalities.

Each ``check_*`` function returns the ratio LHS/RHS of one inequality with
the unknown constant set to 1.  The calibration protocol runs a check over a
seeded population of random fields and records the largest ratio as the
empirical constant; later populations must stay below ``1.05`` times it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .littlewood_paley import (
    besov_norm,
    bmo_gradient,
    bmo_proxy,
    build_ladder,
    commutator,
    dyadic_block,
)
from .spectral import (
    Grid,
    SpectralField,
    gradient,
    l2_norm,
    lp_norm_samples,
    multiply_physical,
    physical_array,
    to_physical,
    to_spectral,
)

RNG_NAME = "numpy.PCG64/v1"

# fixed experimental setup for the calibrated constants
SUITE_GRID = Grid(16, 2 * np.pi, 3)
SUITE_SAMPLES = 1000
TOLERANCE_FACTOR = 1.05


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _ratio(num: float, den: float) -> float:
    if num == 0:
        return 0.0
    if den == 0:
        return math.inf
    return num / den


# -- random inputs ---------------------------------------------------------


def random_field(
    grid: Grid,
    rng: np.random.Generator,
    k_min: float,
    k_max: float,
    ncomp: int = 1,
    slope: float = 0.0,
) -> SpectralField:
    """Real random field with Gaussian spectrum confined to ``k_min <= |k| <= k_max``.

    Coefficients are drawn from white noise in physical space so Hermitian
    symmetry holds by construction; ``slope`` tilts the amplitudes as
    ``|k|**-slope``.
    """
    noise = rng.standard_normal((ncomp,) + grid.shape)
    f = to_spectral(noise, grid)
    kmag = grid.kmag
    band = (kmag >= k_min - 1e-12) & (kmag <= k_max + 1e-12) & grid.dealias_mask & (kmag > 0)
    weight = np.zeros(grid.shape)
    weight[band] = kmag[band] ** (-slope)
    return SpectralField(grid, f.coeffs * weight)


def shell_field(grid: Grid, rng: np.random.Generator, q: int, ncomp: int = 1) -> SpectralField:
    return dyadic_block(random_field(grid, rng, 2.0 ** (q - 1), 2.0**q, ncomp), q)


# -- (i) Bernstein ---------------------------------------------------------


@dataclass
class BernsteinRatios:
    derivative: float
    inverse_derivative: float
    embedding: float

    def as_dict(self):
        return {"derivative": self.derivative, "inverse_derivative": self.inverse_derivative, "embedding": self.embedding}


def derivative_samples(f: SpectralField, order: int) -> np.ndarray:
    """Physical samples of every ``order``-th partial derivative of ``f``."""
    k = f.grid.wavevector
    coeffs = f.coeffs
    for _ in range(order):
        coeffs = np.stack([1j * k[j] * coeffs for j in range(f.grid.dims)], axis=1)
        coeffs = coeffs.reshape((-1,) + f.grid.shape)
    return physical_array(coeffs, f.grid)


def check_bernstein(f: SpectralField, q: int, order: int = 1, p_low: float = 2.0, p_high: float = np.inf) -> BernsteinRatios:
    """Derivative and embedding ratios for a field supported in shell ``q``.

    The derivative ratios are taken in ``L^{p_low}``.
    """
    if p_low > p_high:
        raise ValueError("p_low must not exceed p_high")
    ladder = build_ladder(f.grid)
    amp = np.abs(f.coeffs).max(axis=0)
    # transform roundoff outside the shell is tolerated
    if np.any(amp[~ladder.mask(q)] > 1e-13 * amp.max(initial=0.0)):
        raise ValueError(f"field is not supported in shell {q}")
    g = f.grid
    phys = to_physical(f)
    f_low = lp_norm_samples(phys, g, p_low)
    f_high = lp_norm_samples(phys, g, p_high)
    d_low = lp_norm_samples(derivative_samples(f, order), g, p_low)
    scale = 2.0 ** (q * order)
    inv_high = 0.0 if np.isinf(p_high) else 1.0 / p_high
    embed_scale = 2.0 ** (q * g.dims * (1.0 / p_low - inv_high))
    return BernsteinRatios(
        derivative=_ratio(d_low, scale * f_low),
        inverse_derivative=_ratio(scale * f_low, d_low),
        embedding=_ratio(f_high, embed_scale * f_low),
    )


# -- (ii) equivalence of norms ---------------------------------------------


def check_norm_equivalence(f: SpectralField, s: float) -> float:
    """``||grad f||_{B^s_{2,1}} / ||f||_{B^{s+1}_{2,1}}`` for a scalar field."""
    return _ratio(besov_norm(gradient(f), s), besov_norm(f, s + 1))


# -- (iii) product law -----------------------------------------------------


@dataclass
class ProductLawMargin:
    ratio: float
    endpoint: bool


def check_product_law(f: SpectralField, g: SpectralField, s1: float, s2: float) -> ProductLawMargin:
    """``||fg||_{B^{s1+s2-n/2}_{2,1}} / (||f||_{B^{s1}_{2,1}} ||g||_{B^{s2}_{2,1}})``.

    Indices on the boundary ``s_i = n/2`` are admitted and flagged.
    """
    n = f.grid.dims
    if s1 > n / 2 or s2 > n / 2:
        raise ValueError(f"product law needs s1, s2 <= n/2 = {n / 2}")
    if s1 + s2 <= 0:
        raise ValueError("product law needs s1 + s2 > 0")
    rhs = besov_norm(f, s1) * besov_norm(g, s2)
    if rhs == 0:
        raise ValueError("operands must have nonzero homogeneous norm")
    lhs = besov_norm(multiply_physical(f, g), s1 + s2 - n / 2)
    return ProductLawMargin(lhs / rhs, endpoint=(s1 == n / 2 or s2 == n / 2))


# -- (iv) commutator -------------------------------------------------------


def commutator_ratio(u: SpectralField, w: SpectralField, q: int, s: float = 0.5) -> float:
    n = u.grid.dims
    lhs = l2_norm(commutator(u, w, q))
    rhs = 2.0 ** (-q * (s + 1)) * besov_norm(u, n / 2 + 1) * besov_norm(w, s)
    return _ratio(lhs, rhs)


def check_commutator(u: SpectralField, w: SpectralField, s: float = 0.5) -> float:
    """Largest commutator ratio over all populated shells.

    ``u`` and ``w`` must have nonzero homogeneous norms; for a constant ``u``
    the commutator vanishes identically and the ratio is meaningless.
    """
    if besov_norm(u, u.grid.dims / 2 + 1) == 0 or besov_norm(w, s) == 0:
        raise ValueError("operands must have nonzero homogeneous norm")
    ladder = build_ladder(u.grid)
    return max(commutator_ratio(u, w, q, s) for q in ladder.shells)


# -- (v) interpolation -----------------------------------------------------


def check_interpolation(f: SpectralField, s: float, s1: float, theta: float | None = None) -> float:
    """``||f||_{B^s_{2,1}} / (||f||_{B^{s1}_{2,1}}^theta ||f||_{L^2}^(1-theta))``."""
    if not (s > 0 and s1 > 0):
        raise ValueError("interpolation needs s, s1 > 0")
    expected = s / s1
    if theta is None:
        theta = expected
    elif not math.isclose(theta, expected, rel_tol=1e-12):
        raise ValueError(f"theta must equal s/s1 = {expected}, got {theta}")
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    lhs = besov_norm(f, s)
    rhs = besov_norm(f, s1) ** theta * l2_norm(f) ** (1 - theta)
    return _ratio(lhs, rhs)


# -- (vi) BMO bound --------------------------------------------------------


def check_bmo_bound(f: SpectralField) -> float:
    """``bmo(f) / (bmo(grad f) + ||f||_{L^2})``."""
    return _ratio(bmo_proxy(f), bmo_gradient(f) + l2_norm(f))


# -- calibration -----------------------------------------------------------


def _sample_bernstein(grid, rng):
    q = 2
    return check_bernstein(shell_field(grid, rng, q), q, order=1, p_low=2.0, p_high=np.inf).as_dict()


def _sample_equivalence(grid, rng):
    return {"ratio": check_norm_equivalence(random_field(grid, rng, 1, grid.k_dealias), 0.5)}


def _sample_product(grid, rng):
    f = random_field(grid, rng, 1, 3)
    g = random_field(grid, rng, 1, 3)
    return {"ratio": check_product_law(f, g, 1.5, 1.5).ratio}


def _sample_commutator(grid, rng):
    u = random_field(grid, rng, 1, 2)
    w = random_field(grid, rng, 1, 3)
    return {"ratio": check_commutator(u, w, 0.5)}


def _sample_interpolation(grid, rng):
    return {"ratio": check_interpolation(random_field(grid, rng, 1, grid.k_dealias, slope=1.0), 0.5, 1.5)}


def _sample_bmo(grid, rng):
    return {"ratio": check_bmo_bound(random_field(grid, rng, 1, grid.k_dealias, slope=1.0))}


ORACLES = {
    "bernstein": _sample_bernstein,
    "norm_equivalence": _sample_equivalence,
    "product_law": _sample_product,
    "commutator": _sample_commutator,
    "interpolation": _sample_interpolation,
    "bmo_bound": _sample_bmo,
}


def sample_ratios(name: str, samples: int = SUITE_SAMPLES, seed: int = 0, grid: Grid = SUITE_GRID) -> dict[str, np.ndarray]:
    """Ratios of oracle ``name`` over ``samples`` random inputs, keyed by sub-ratio."""
    sampler = ORACLES[name]
    rng = make_rng(seed)
    rows = [sampler(grid, rng) for _ in range(samples)]
    return {key: np.array([r[key] for r in rows]) for key in rows[0]}


def calibrate(name: str, samples: int = SUITE_SAMPLES, seed: int = 0, grid: Grid = SUITE_GRID) -> dict[str, float]:
    return {key: float(v.max()) for key, v in sample_ratios(name, samples, seed, grid).items()}


def calibrate_all(samples: int = SUITE_SAMPLES, seed: int = 0, grid: Grid = SUITE_GRID) -> dict[str, dict[str, float]]:
    return {name: calibrate(name, samples, seed, grid) for name in ORACLES}


def load_constants() -> dict:
    """Frozen empirical constants shipped with the package."""
    text = resources.files("hallmhd").joinpath("calibrated_constants.json").read_text()
    return json.loads(text)


@dataclass
class OracleResult:
    name: str
    key: str
    calibrated: float
    observed_max: float
    exceed_count: int

    @property
    def passed(self) -> bool:
        return math.isfinite(self.observed_max) and self.exceed_count == 0


def verify_against(constants: dict, samples: int = SUITE_SAMPLES, seed: int = 1, grid: Grid = SUITE_GRID) -> list[OracleResult]:
    """Re-run every oracle and count samples above ``1.05`` times the calibrated constant."""
    results = []
    table = constants["constants"]
    for name in ORACLES:
        for key, ratios in sample_ratios(name, samples, seed, grid).items():
            c = table[name][key]
            results.append(
                OracleResult(name, key, c, float(ratios.max()), int(np.sum(ratios > TOLERANCE_FACTOR * c)))
            )
    return results
