"""Spectrum dumps and trajectory checkpoints.

Two interchange formats for a field's coefficients:

* CSV: header line with the resolution, then one row (k1, k2, re, im) per
  lattice mode in raster order; floats are written with repr so the text
  round-trips to the same doubles.
* binary: little-endian header (magic, version, n) followed by the raw
  complex128 buffer; byte-exact round trip.

A checkpoint is a binary header (n, ν, κ, α, β, t) followed by the θ and ω
coefficient buffers; reload is bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .dynamics import FlowState, PhysParams
from .spectral import GridSpec, SpectralField, make_grid

SPECTRUM_MAGIC = b"BQSP"
CHECKPOINT_MAGIC = b"BQCK"
FORMAT_VERSION = 1


def dump_spectrum_csv(field: SpectralField, path) -> None:
    n = field.grid.n
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    with open(path, "w") as fh:
        fh.write(f"# spectrum n={n}\n")
        fh.write("k1,k2,re,im\n")
        for i in range(n):
            for j in range(n):
                c = field.coeffs[i, j]
                fh.write(f"{k[i]},{k[j]},{c.real!r},{c.imag!r}\n")


def load_spectrum_csv(path) -> SpectralField:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# spectrum n="):
            raise ValueError(f"not a spectrum dump: {path}")
        n = int(header.split("=", 1)[1])
        grid = make_grid(n)
        fh.readline()  # column names
        coeffs = np.zeros((n, n), dtype=np.complex128)
        for line in fh:
            k1s, k2s, res, ims = line.rstrip("\n").split(",")
            i, j = int(k1s) % n, int(k2s) % n
            coeffs[i, j] = complex(float(res), float(ims))
    return SpectralField(grid, coeffs)


def dump_spectrum_binary(field: SpectralField, path) -> None:
    with open(path, "wb") as fh:
        _write_spectrum(fh, field)


def load_spectrum_binary(path) -> SpectralField:
    with open(path, "rb") as fh:
        return _read_spectrum(fh)


def _write_spectrum(fh, field: SpectralField) -> None:
    fh.write(SPECTRUM_MAGIC)
    fh.write(struct.pack("<II", FORMAT_VERSION, field.grid.n))
    buf = np.ascontiguousarray(field.coeffs, dtype=np.complex128)
    fh.write(buf.tobytes())


def _read_spectrum(fh) -> SpectralField:
    magic = fh.read(4)
    if magic != SPECTRUM_MAGIC:
        raise ValueError(f"bad spectrum magic {magic!r}")
    version, n = struct.unpack("<II", fh.read(8))
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported spectrum format version {version}")
    grid = make_grid(n)
    raw = fh.read(16 * n * n)
    coeffs = np.frombuffer(raw, dtype=np.complex128).reshape(n, n).copy()
    return SpectralField(grid, coeffs)


def save_checkpoint(state: FlowState, params: PhysParams, path) -> None:
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, state.grid.n))
        fh.write(
            struct.pack("<5d", params.nu, params.kappa, params.alpha, params.beta, state.t)
        )
        _write_spectrum(fh, state.theta)
        _write_spectrum(fh, state.omega)


def load_checkpoint(path, allow_out_of_range: bool = False) -> tuple[FlowState, PhysParams]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        version, n = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version}")
        nu, kappa, alpha, beta, t = struct.unpack("<5d", fh.read(40))
        theta = _read_spectrum(fh)
        omega = _read_spectrum(fh)
    if theta.grid.n != n or omega.grid.n != n:
        raise ValueError("checkpoint field resolution mismatch")
    params = PhysParams(nu, kappa, alpha, beta, allow_out_of_range=allow_out_of_range)
    return FlowState(theta, omega, t), params
