"""Sharp dyadic decomposition of the wavenumber lattice and the norms built on it.

Shell ``q`` holds the wavevectors with ``2**(q-1) < |k| <= 2**q``, so every
nonzero mode belongs to exactly one shell and the blocks are mutually
L2-orthogonal.  All homogeneous norms drop the zero mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    gradient_tensor,
    l2_norm,
    lp_norm,
    multiply_physical,
    physical_array,
)

BESOV_ORDERS = (0.5, 1.5, 2.5, 3.5)
SOBOLEV_ORDERS = (0.5, 1.5, 2.5)


@dataclass(frozen=True, eq=False)
class DyadicLadder:
    grid: Grid
    q_min: int
    q_max: int
    shell_index: np.ndarray  # per-mode shell index; meaningless at the zero mode
    masks: dict = field(repr=False)

    @property
    def shells(self) -> range:
        return range(self.q_min, self.q_max + 1)

    def mask(self, q: int) -> np.ndarray:
        m = self.masks.get(q)
        if m is None:
            return np.zeros(self.grid.shape, dtype=bool)
        return m


@lru_cache(maxsize=32)
def build_ladder(grid: Grid) -> DyadicLadder:
    """Shell membership for every nonzero mode of ``grid`` (cached per grid)."""
    kmag = grid.kmag
    nonzero = kmag > 0
    q = np.zeros(grid.shape, dtype=np.int64)
    # exact powers of two sit on the upper edge of their shell
    q[nonzero] = np.ceil(np.log2(kmag[nonzero]) - 1e-12).astype(np.int64)
    qs = q[nonzero]
    q_min, q_max = int(qs.min()), int(qs.max())
    masks = {}
    for s in range(q_min, q_max + 1):
        m = nonzero & (q == s)
        m.setflags(write=False)
        masks[s] = m
    q.setflags(write=False)
    return DyadicLadder(grid, q_min, q_max, q, masks)


def shell_of(k: float) -> int:
    """Shell index of a single wavenumber magnitude ``k > 0``."""
    return int(np.ceil(np.log2(k) - 1e-12))


def dyadic_block(f: SpectralField, q: int) -> SpectralField:
    ladder = build_ladder(f.grid)
    return SpectralField(f.grid, f.coeffs * ladder.mask(q))


def block_l2_norms(f: SpectralField) -> dict[int, float]:
    """``||Delta_q f||_{L^2}`` for every populated shell."""
    ladder = build_ladder(f.grid)
    power = np.sum(np.abs(f.coeffs) ** 2, axis=0)
    vol = f.grid.volume
    return {q: float(np.sqrt(vol * power[ladder.mask(q)].sum())) for q in ladder.shells}


def besov_norm(f: SpectralField, s: float, q_index: float = 1) -> float:
    """Homogeneous ``B^s_{2,r}`` norm with ``r = q_index`` in ``{1, 2, inf}``."""
    blocks = block_l2_norms(f)
    weighted = np.array([2.0 ** (q * s) * a for q, a in blocks.items()])
    if q_index == 1:
        return float(weighted.sum())
    if q_index == 2:
        return float(np.sqrt(np.sum(weighted**2)))
    if np.isinf(q_index):
        return float(weighted.max(initial=0.0))
    raise ValueError(f"q_index must be 1, 2 or inf, got {q_index}")


def sobolev_norm_hom(f: SpectralField, s: float) -> float:
    g = f.grid
    weight = np.zeros(g.shape)
    nz = g.k2 > 0
    weight[nz] = g.k2[nz] ** s
    return float(np.sqrt(g.volume * np.sum(weight * np.abs(f.coeffs) ** 2)))


def sobolev_norm_inhom(f: SpectralField, m: int) -> float:
    """``H^m`` norm with symbol ``(1 + |k|^2)^m``."""
    g = f.grid
    return float(np.sqrt(g.volume * np.sum((1.0 + g.k2) ** m * np.abs(f.coeffs) ** 2)))


def square_function(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Pointwise ``(sum_q |Delta_q f(x)|^2)^(1/2)`` over all components of ``coeffs``.

    ``coeffs`` may carry any number of leading component axes; they are
    combined as a Euclidean norm.
    """
    ladder = build_ladder(grid)
    flat = coeffs.reshape((-1,) + grid.shape)
    acc = np.zeros(grid.shape)
    for q in ladder.shells:
        block = physical_array(flat * ladder.mask(q), grid)
        acc += np.sum(block * block, axis=0)
    return np.sqrt(acc)


def bmo_proxy(f: SpectralField) -> float:
    """Grid supremum of the ``F^0_{inf,2}`` square function."""
    return float(square_function(f.coeffs, f.grid).max())


def bmo_gradient(f: SpectralField) -> float:
    """BMO proxy of all partial derivatives ``d_j f_i`` taken together."""
    return float(square_function(gradient_tensor(f), f.grid).max())


def commutator(u: SpectralField, w: SpectralField, q: int) -> SpectralField:
    """``u Delta_q w - Delta_q(u w)`` with dealiased products."""
    if u.grid != w.grid:
        raise ValueError("fields live on different grids")
    return multiply_physical(u, dyadic_block(w, q)) - dyadic_block(multiply_physical(u, w), q)


@dataclass
class NormReport:
    """Snapshot of the norms monitored for one field."""

    besov_s_2_1: dict[float, float]
    sobolev_hom: dict[float, float]
    sobolev_inhom_m: float
    hm_order: int
    bmo_proxy: float
    lp: dict[float, float]

    def to_dict(self) -> dict[str, float]:
        out = {f"besov_2_1_s{s:g}": v for s, v in self.besov_s_2_1.items()}
        out.update({f"sobolev_hom_s{s:g}": v for s, v in self.sobolev_hom.items()})
        out[f"sobolev_inhom_m{self.hm_order}"] = self.sobolev_inhom_m
        out["bmo_proxy"] = self.bmo_proxy
        out.update({f"lp_p{_pkey(p)}": v for p, v in self.lp.items()})
        return out

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "NormReport":
        besov, sob, lp = {}, {}, {}
        inhom, m, bmo = None, None, None
        for key, v in d.items():
            if key.startswith("besov_2_1_s"):
                besov[float(key[len("besov_2_1_s"):])] = v
            elif key.startswith("sobolev_hom_s"):
                sob[float(key[len("sobolev_hom_s"):])] = v
            elif key.startswith("sobolev_inhom_m"):
                m, inhom = int(key[len("sobolev_inhom_m"):]), v
            elif key == "bmo_proxy":
                bmo = v
            elif key.startswith("lp_p"):
                lp[float(key[len("lp_p"):])] = v
            else:
                raise KeyError(f"unknown NormReport key {key!r}")
        return cls(besov, sob, inhom, m, bmo, lp)


def _pkey(p: float) -> str:
    return "inf" if np.isinf(p) else f"{p:g}"


def norm_report(f: SpectralField, hm_order: int = 3, lp_orders=(2.0, 4.0, np.inf)) -> NormReport:
    return NormReport(
        besov_s_2_1={s: besov_norm(f, s) for s in BESOV_ORDERS},
        sobolev_hom={s: sobolev_norm_hom(f, s) for s in SOBOLEV_ORDERS},
        sobolev_inhom_m=sobolev_norm_inhom(f, hm_order),
        hm_order=hm_order,
        bmo_proxy=bmo_proxy(f),
        lp={float(p): (l2_norm(f) if p == 2 else lp_norm(f, p)) for p in lp_orders},
    )
