"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import math
import numbers

import numpy as np

from .spectral import Grid


def check_positive(name: str, value, allow_inf: bool = False) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    v = float(value)
    if math.isnan(v) or v <= 0 or (math.isinf(v) and not allow_inf):
        raise ValueError(f"{name} must be positive{'' if allow_inf else ' and finite'}, got {value}")
    return v


def check_grid(n, box_length, dims) -> Grid:
    try:
        return Grid(int(n), float(box_length), int(dims))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid grid: {exc}") from None


def check_field_batch(X, grid: Grid, ncomp: int | None = None) -> np.ndarray:
    """Return ``X`` as a float array of shape ``(n_samples, ncomp, *grid.shape)``.

    A single field (no leading sample axis) is promoted to a batch of one.
    """
    arr = np.asarray(X)
    if np.iscomplexobj(arr):
        raise ValueError("fields must be real-valued physical samples")
    arr = arr.astype(float, copy=False)
    if arr.shape[-grid.dims :] != grid.shape:
        raise ValueError(f"trailing axes {arr.shape[-grid.dims:]} do not match grid shape {grid.shape}")
    lead = arr.shape[: -grid.dims]
    if len(lead) == 1:
        arr = arr[None]
    elif len(lead) != 2:
        raise ValueError(f"expected (n_samples, ncomp, *grid) or (ncomp, *grid), got shape {arr.shape}")
    if arr.shape[1] not in (1, 3) or (ncomp is not None and arr.shape[1] != ncomp):
        want = ncomp if ncomp is not None else "1 or 3"
        raise ValueError(f"expected {want} components, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("fields contain non-finite values")
    return arr


def check_state_array(X, grid: Grid) -> np.ndarray:
    """A ``(u, B)`` pair stacked as ``(2, 3, *grid.shape)``."""
    arr = np.asarray(X, dtype=float)
    want = (2, 3) + grid.shape
    if arr.shape != want:
        raise ValueError(f"expected state array of shape {want}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state contains non-finite values")
    return arr
