"""Binary checkpoint format.

Layout (little-endian)::

    magic        4 bytes   b"HMHD"
    version      u32       currently 1
    dims         u8        2 or 3
    n_per_axis   u32
    box_length   f64
    time         f64
    regime       u8        0 full3d, 1 hall_only, 2 two_and_half_d
    payload      complex128 coefficients of u (3 components) then B (3 components),
                 component-major, wavevector in row-major lattice order
                 (numpy FFT ordering along each axis)

Each complex number is stored as (real f64, imag f64).  The Hall coefficient
is not part of the format; readers supply it.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .solver import Regime, SolverState
from .spectral import Grid, SpectralField

MAGIC = b"HMHD"
VERSION = 1
HEADER = struct.Struct("<4sIBIddB")


class CheckpointError(ValueError):
    pass


def encode_checkpoint(state: SolverState) -> bytes:
    g = state.grid
    header = HEADER.pack(MAGIC, VERSION, g.dims, g.n, g.box_length, state.time, int(state.regime))
    payload = np.concatenate([state.u.coeffs, state.b.coeffs]).astype("<c16", copy=False)
    return header + payload.tobytes(order="C")


def decode_checkpoint(data: bytes, hall_coefficient: float = 1.0) -> SolverState:
    if len(data) < HEADER.size:
        raise CheckpointError("truncated header")
    magic, version, dims, n, box_length, time, regime = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    grid = Grid(n, box_length, dims)
    count = 6 * grid.size
    expected = HEADER.size + 16 * count
    if len(data) != expected:
        raise CheckpointError(f"payload size {len(data) - HEADER.size} != {16 * count}")
    coeffs = np.frombuffer(data, dtype="<c16", count=count, offset=HEADER.size)
    coeffs = coeffs.astype(np.complex128).reshape((6,) + grid.shape)
    return SolverState(
        time=time,
        u=SpectralField(grid, coeffs[:3].copy()),
        b=SpectralField(grid, coeffs[3:].copy()),
        regime=Regime(regime),
        hall_coefficient=hall_coefficient,
    )


def write_checkpoint(path, state: SolverState) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(encode_checkpoint(state))
    os.replace(tmp, path)


def read_checkpoint(path, hall_coefficient: float = 1.0) -> SolverState:
    with open(path, "rb") as fh:
        return decode_checkpoint(fh.read(), hall_coefficient)
