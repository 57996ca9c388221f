"""Periodic-grid field representation and Fourier-side operators.

Fields live on the torus ``[0, L)^d`` and are stored as the full complex
lattice of Fourier coefficients.  The forward transform carries the
``1/N^d`` factor, so a field is synthesised as ``sum_k c_k exp(i k.x)`` and
the coefficient of the zero mode is the spatial mean.  Coefficient arrays
are indexed ``(component, i_1, ..., i_d)`` in numpy FFT order along each
axis (``0, 1, ..., n/2-1, -n/2, ..., -1``).

Two-dimensional grids carry three-component fields that do not depend on
``x_3``; every operator treats the third wavenumber as identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

PAIRINGS = ("pointwise", "cross", "dot", "advective")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with an integer wavenumber lattice.

    ``n`` points per axis, period ``box_length`` and ``dims`` spatial
    dimensions.  Equality and hashing use only these three numbers so a grid
    can key caches.
    """

    n: int
    box_length: float = 2 * np.pi
    dims: int = 3

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"n_per_axis must be an integer, got {self.n!r}")
        if self.n < 4:
            raise ValueError(f"n_per_axis must be >= 4, got {self.n}")
        if self.n % 2:
            raise ValueError(f"n_per_axis must be even, got {self.n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if self.dims not in (2, 3):
            raise ValueError(f"dims must be 2 or 3, got {self.dims}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dims

    @property
    def size(self) -> int:
        return self.n**self.dims

    @property
    def volume(self) -> float:
        return self.box_length**self.dims

    @property
    def dx(self) -> float:
        return self.box_length / self.n

    @property
    def k0(self) -> float:
        """Fundamental wavenumber ``2 pi / L``."""
        return 2 * np.pi / self.box_length

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Integer lattice frequencies along one axis, FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @cached_property
    def wavevector(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Three broadcastable wavenumber arrays; ``k_3 = 0`` on 2D grids."""
        k1d = self.frequencies * self.k0
        ks = []
        for axis in range(self.dims):
            shape = [1] * self.dims
            shape[axis] = self.n
            ks.append(k1d.reshape(shape))
        while len(ks) < 3:
            ks.append(np.zeros((1,) * self.dims))
        return tuple(ks)

    @cached_property
    def k2(self) -> np.ndarray:
        k1, k2, k3 = self.wavevector
        return np.broadcast_to(k1**2 + k2**2 + k3**2, self.shape).copy()

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @property
    def k_nyquist(self) -> float:
        return np.pi * self.n / self.box_length

    @property
    def k_dealias(self) -> float:
        """Radius of the retained ball under the 2/3 rule."""
        return 2.0 / 3.0 * self.k_nyquist

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        # small slack so modes sitting exactly on the cutoff radius are kept
        return self.kmag <= self.k_dealias * (1 + 1e-12)

    @cached_property
    def inv_k2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        nz = self.k2 > 0
        out[nz] = 1.0 / self.k2[nz]
        return out

    def coordinates(self) -> list[np.ndarray]:
        """Physical coordinates ``x_i = i L / n`` as broadcastable arrays."""
        x = np.arange(self.n) * self.dx
        out = []
        for axis in range(self.dims):
            shape = [1] * self.dims
            shape[axis] = self.n
            out.append(x.reshape(shape))
        return out

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[np.arange(self.n) * self.dx] * self.dims, indexing="ij")


def make_grid(n_per_axis: int, box_length: float = 2 * np.pi, dims: int = 3) -> Grid:
    return Grid(n_per_axis, box_length, dims)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real scalar (1 component) or vector field."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim == self.grid.dims:
            c = c[np.newaxis]
        if c.shape[1:] != self.grid.shape or c.shape[0] not in (1, 3):
            raise ValueError(
                f"coefficient shape {c.shape} does not match grid {self.grid.shape} "
                "with 1 or 3 components"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def component(self, i: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[i : i + 1])

    @property
    def mean(self) -> np.ndarray:
        return self.coeffs[(slice(None),) + (0,) * self.grid.dims].real.copy()

    def physical(self) -> np.ndarray:
        return to_physical(self)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def _wrap(self, coeffs):
        return SpectralField(self.grid, coeffs)

    def _check(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        if other.ncomp != self.ncomp:
            raise ValueError(f"component mismatch: {self.ncomp} vs {other.ncomp}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        if not np.isscalar(scalar) or np.iscomplexobj(scalar):
            return NotImplemented
        return self._wrap(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return self._wrap(-self.coeffs)


def zeros(grid: Grid, ncomp: int = 3) -> SpectralField:
    return SpectralField(grid, np.zeros((ncomp,) + grid.shape, dtype=np.complex128))


def _axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(-grid.dims, 0))


def _hermitian_complete(half: np.ndarray, n: int, dims: int) -> np.ndarray:
    """Rebuild the full lattice from an ``rfftn`` half spectrum."""
    full = np.empty(half.shape[:-1] + (n,), dtype=np.complex128)
    m = n // 2 + 1
    full[..., :m] = half
    # c(-k) = conj(c(k)): index -i along every axis is (n - i) % n
    rev = (-np.arange(n)) % n
    mirrored = half[..., 1 : n - m + 1]
    for axis in range(-dims, -1):
        mirrored = np.take(mirrored, rev, axis=axis)
    full[..., m:] = np.conj(mirrored[..., ::-1])
    return full


def to_spectral(samples: np.ndarray, grid: Grid) -> SpectralField:
    """Forward transform of real samples of shape ``grid.shape`` or ``(c, *grid.shape)``."""
    x = np.asarray(samples)
    if np.iscomplexobj(x):
        if np.abs(x.imag).max(initial=0.0) > 1e-12 * max(np.abs(x.real).max(initial=0.0), 1.0):
            raise ValueError("physical samples must be real")
        x = x.real
    x = x.astype(np.float64, copy=False)
    if x.shape == grid.shape:
        x = x[np.newaxis]
    if x.shape[1:] != grid.shape or x.shape[0] not in (1, 3):
        raise ValueError(f"sample shape {np.shape(samples)} does not match grid {grid.shape}")
    half = sfft.rfftn(x, axes=_axes(grid), norm="forward")
    return SpectralField(grid, _hermitian_complete(half, grid.n, grid.dims))


def physical_array(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    m = grid.n // 2 + 1
    return sfft.irfftn(coeffs[..., :m], s=grid.shape, axes=_axes(grid), norm="forward")


def to_physical(f: SpectralField) -> np.ndarray:
    """Inverse transform; returns real samples of shape ``(ncomp, *grid.shape)``.

    Assumes Hermitian coefficients, which every operator here preserves.
    """
    return physical_array(f.coeffs, f.grid)


def hermitian_defect(f: SpectralField) -> float:
    """Max ``|c(-k) - conj c(k)|`` relative to the largest coefficient."""
    c = f.coeffs
    rev = (-np.arange(f.grid.n)) % f.grid.n
    mirrored = c
    for axis in range(1, c.ndim):
        mirrored = np.take(mirrored, rev, axis=axis)
    scale = np.abs(c).max(initial=0.0)
    if scale == 0:
        return 0.0
    return float(np.abs(mirrored - np.conj(c)).max() / scale)


def dealias(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask)


# -- differential operators ------------------------------------------------


def derivative(f: SpectralField, axis: int) -> SpectralField:
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
    return SpectralField(f.grid, 1j * f.grid.wavevector[axis] * f.coeffs)


def gradient(f: SpectralField) -> SpectralField:
    """Gradient of a scalar field (3 components, last is zero on 2D grids)."""
    if f.ncomp != 1:
        raise ValueError("gradient expects a scalar field; use gradient_tensor for vectors")
    k = f.grid.wavevector
    return SpectralField(f.grid, np.stack([1j * k[i] * f.coeffs[0] for i in range(3)]))


def gradient_tensor(f: SpectralField) -> np.ndarray:
    """Coefficients of ``d_j f_i`` with shape ``(ncomp, 3, *grid.shape)``."""
    k = f.grid.wavevector
    return np.stack([1j * k[j] * f.coeffs for j in range(3)], axis=1)


def divergence(f: SpectralField) -> SpectralField:
    if f.ncomp != 3:
        raise ValueError("divergence expects a 3-component field")
    k = f.grid.wavevector
    return SpectralField(f.grid, 1j * (k[0] * f.coeffs[0] + k[1] * f.coeffs[1] + k[2] * f.coeffs[2]))


def curl(f: SpectralField) -> SpectralField:
    if f.ncomp != 3:
        raise ValueError("curl requires a 3-component field")
    k1, k2, k3 = f.grid.wavevector
    a1, a2, a3 = f.coeffs
    out = 1j * np.stack([k2 * a3 - k3 * a2, k3 * a1 - k1 * a3, k1 * a2 - k2 * a1])
    return SpectralField(f.grid, out)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, -f.grid.k2 * f.coeffs)


def leray_project(f: SpectralField) -> SpectralField:
    """Per-mode projection ``I - k k^T / |k|^2``; the zero mode is left alone."""
    if f.ncomp != 3:
        raise ValueError("leray_project expects a 3-component field")
    k = f.grid.wavevector
    kdotf = k[0] * f.coeffs[0] + k[1] * f.coeffs[1] + k[2] * f.coeffs[2]
    phi = kdotf * f.grid.inv_k2
    return SpectralField(f.grid, np.stack([f.coeffs[i] - k[i] * phi for i in range(3)]))


def rescale_coordinates(f: SpectralField, factor: int) -> SpectralField:
    """Spectral representation of ``x -> f(factor * x)`` on the same grid.

    The coefficient at ``k`` moves to ``factor * k``; content pushed past the
    dealiasing radius is an error rather than silently aliased.
    """
    if int(factor) != factor or factor < 1:
        raise ValueError(f"factor must be a positive integer, got {factor}")
    factor = int(factor)
    g = f.grid
    amp = np.abs(f.coeffs).max(axis=0)
    # transform roundoff is not content
    nz = amp > 1e-13 * amp.max(initial=0.0)
    if np.any(nz & (factor * g.kmag > g.k_dealias * (1 + 1e-12))):
        raise ValueError("rescaled field would leave the dealiased band")
    out = np.zeros_like(f.coeffs)
    freqs = g.frequencies
    src = np.nonzero(np.abs(freqs * factor) < g.n // 2)[0]
    dst = (freqs[src] * factor) % g.n
    index_src = np.ix_(*[src] * g.dims)
    index_dst = np.ix_(*[dst] * g.dims)
    out[(slice(None),) + index_dst] = f.coeffs[(slice(None),) + index_src]
    return SpectralField(g, out)


def resample(f: SpectralField, grid: Grid) -> SpectralField:
    """Move ``f`` to another resolution of the same box, keeping the modes both grids share.

    Nyquist modes are dropped, so refinement followed by coarsening is exact
    for fields without Nyquist content.
    """
    src_grid = f.grid
    if grid.box_length != src_grid.box_length or grid.dims != src_grid.dims:
        raise ValueError("resampling needs the same box and dimension")
    half = min(src_grid.n, grid.n) // 2
    m = np.arange(-(half - 1), half)
    out = np.zeros((f.ncomp,) + grid.shape, dtype=complex)
    index_src = np.ix_(*[m % src_grid.n] * grid.dims)
    index_dst = np.ix_(*[m % grid.n] * grid.dims)
    out[(slice(None),) + index_dst] = f.coeffs[(slice(None),) + index_src]
    return SpectralField(grid, out)


# -- nonlinear products ----------------------------------------------------


def _same_grid(f: SpectralField, g: SpectralField):
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")


def multiply_physical(f: SpectralField, g: SpectralField, pairing: str = "pointwise") -> SpectralField:
    """Form a product in physical space and return its dealiased spectrum.

    ``pointwise``: componentwise product (a scalar broadcasts against a vector).
    ``cross``: ``f x g``.  ``dot``: ``f . g``.  ``advective``: ``(f . grad) g``.
    """
    _same_grid(f, g)
    grid = f.grid
    if pairing == "pointwise":
        if f.ncomp != g.ncomp and 1 not in (f.ncomp, g.ncomp):
            raise ValueError(f"pointwise product of {f.ncomp} and {g.ncomp} components")
        prod = to_physical(f) * to_physical(g)
    elif pairing == "cross":
        if f.ncomp != 3 or g.ncomp != 3:
            raise ValueError("cross product requires 3-component fields")
        prod = np.cross(to_physical(f), to_physical(g), axis=0)
    elif pairing == "dot":
        if f.ncomp != g.ncomp:
            raise ValueError(f"dot product of {f.ncomp} and {g.ncomp} components")
        prod = np.sum(to_physical(f) * to_physical(g), axis=0)
    elif pairing == "advective":
        if f.ncomp != 3:
            raise ValueError("advecting field must have 3 components")
        prod = advect_physical(to_physical(f), g)
    else:
        raise ValueError(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")
    return dealias(to_spectral(prod, grid))


def advect_physical(a_phys: np.ndarray, g: SpectralField) -> np.ndarray:
    """Physical samples of ``(a . grad) g`` given ``a`` already in physical space."""
    grid = g.grid
    k = grid.wavevector
    out = np.zeros((g.ncomp,) + grid.shape)
    for j in range(grid.dims):
        dg = physical_array(1j * k[j] * g.coeffs, grid)
        out += a_phys[j] * dg
    return out


# -- norms and pairings ----------------------------------------------------


def pointwise_magnitude(samples: np.ndarray) -> np.ndarray:
    """Euclidean magnitude over the leading (component) axis."""
    if samples.shape[0] == 1:
        return np.abs(samples[0])
    return np.sqrt(np.sum(samples * samples, axis=0))


def lp_norm_samples(samples: np.ndarray, grid: Grid, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mag = pointwise_magnitude(samples)
    if np.isinf(p):
        return float(mag.max())
    return float((grid.volume * np.mean(mag**p)) ** (1.0 / p))


def lp_norm(f: SpectralField, p: float) -> float:
    """``L^p`` norm by uniform quadrature over the torus (``p = inf``: grid max)."""
    return lp_norm_samples(to_physical(f), f.grid, p)


def l2_norm(f: SpectralField) -> float:
    """``L^2`` norm from the spectral side (Parseval)."""
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.coeffs) ** 2)))


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """``int f . g dx`` evaluated spectrally."""
    _same_grid(f, g)
    if f.ncomp != g.ncomp:
        raise ValueError(f"component mismatch: {f.ncomp} vs {g.ncomp}")
    return float(f.grid.volume * np.sum((f.coeffs * np.conj(g.coeffs)).real))
