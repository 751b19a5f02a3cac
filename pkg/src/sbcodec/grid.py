"""Field data model: FLD1 raw I/O, mask interpolation, synthetic test fields,
and finite-difference directional derivatives.

A Field is a stack of ``ncomp`` 2-D planes of 32-bit floats with an optional
per-sample validity mask.  All operations here are pure: they never mutate
their inputs and return new Field values.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidSampleError, MaskError, TruncatedError

FLD1_MAGIC = b"FLD1"
FLD1_VERSION = 1

# magic, version, nx, ny, ncomp, mask_flag, dtype, 10 reserved bytes = 32 total
_FLD1_HEADER = struct.Struct("<4sIIIIBB10x")
FLD1_HEADER_BYTES = _FLD1_HEADER.size

SYNTH_KINDS = ("smooth", "vortices", "ramp", "noise")


@dataclass(frozen=True)
class FieldStats:
    """Summary statistics over the valid samples of a field."""

    vmin: float
    vmax: float
    valid_count: int
    mean: float
    variance: float


@dataclass(frozen=True)
class Field:
    """A 2-D/3-D floating-point array with validity mask and metadata.

    ``samples`` has shape (ncomp, ny, nx), float32, laid out row-major within
    a component and component-major overall.  ``mask`` is a boolean array of
    the same shape (True = valid) or None meaning all samples are valid.
    Invalid samples may hold arbitrary bit patterns (including NaN).
    """

    name: str
    units: str
    nx: int
    ny: int
    ncomp: int
    samples: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.ncomp < 1:
            raise ValueError("grid dimensions must be positive")
        shape = (self.ncomp, self.ny, self.nx)
        if self.samples.shape != shape:
            raise ValueError(f"samples shape {self.samples.shape} != {shape}")
        if self.samples.dtype != np.float32:
            object.__setattr__(self, "samples", self.samples.astype(np.float32))
        if self.mask is not None:
            if self.mask.shape != shape:
                raise ValueError(f"mask shape {self.mask.shape} != {shape}")
            if self.mask.dtype != np.bool_:
                object.__setattr__(self, "mask", self.mask.astype(np.bool_))
            if bool(self.mask.all()):
                object.__setattr__(self, "mask", None)
        valid = self.samples if self.mask is None else self.samples[self.mask]
        if valid.size and not np.isfinite(valid).all():
            raise InvalidSampleError("valid samples contain NaN or Inf")

    @property
    def valid_count(self) -> int:
        if self.mask is None:
            return self.samples.size
        return int(self.mask.sum())

    def valid_values(self) -> np.ndarray:
        return self.samples if self.mask is None else self.samples[self.mask]

    def stats(self) -> FieldStats:
        v = self.valid_values().astype(np.float64)
        if v.size == 0:
            raise MaskError("field has no valid samples")
        return FieldStats(
            vmin=float(v.min()),
            vmax=float(v.max()),
            valid_count=int(v.size),
            mean=float(v.mean()),
            variance=float(v.var()),
        )

    def with_samples(self, samples: np.ndarray, mask=None, name=None) -> "Field":
        return Field(
            name=self.name if name is None else name,
            units=self.units,
            nx=self.nx,
            ny=self.ny,
            ncomp=self.ncomp,
            samples=samples,
            mask=mask,
        )


def raw_file_size(nx: int, ny: int, ncomp: int, masked: bool = False) -> int:
    """Byte size of an FLD1 file with the given dimensions."""
    n = nx * ny * ncomp
    return FLD1_HEADER_BYTES + 4 * n + (n if masked else 0)


def write_raw(field: Field, path) -> int:
    """Write a field to an FLD1 file.  Returns the byte count written."""
    masked = field.mask is not None
    header = _FLD1_HEADER.pack(
        FLD1_MAGIC, FLD1_VERSION, field.nx, field.ny, field.ncomp, int(masked), 0
    )
    payload = np.ascontiguousarray(field.samples, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        if masked:
            fh.write(field.mask.astype(np.uint8).tobytes())
    return len(header) + len(payload) + (field.mask.size if masked else 0)


def load_raw(path) -> Field:
    """Read an FLD1 file back into a Field."""
    raw = Path(path).read_bytes()
    if len(raw) < FLD1_HEADER_BYTES:
        raise TruncatedError(f"{path}: shorter than the 32-byte FLD1 header")
    magic, version, nx, ny, ncomp, mask_flag, dtype = _FLD1_HEADER.unpack_from(raw)
    if magic != FLD1_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FLD1_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype != 0:
        raise FormatError(f"{path}: unsupported dtype code {dtype}")
    if mask_flag not in (0, 1):
        raise FormatError(f"{path}: bad mask flag {mask_flag}")
    n = nx * ny * ncomp
    expected = raw_file_size(nx, ny, ncomp, masked=bool(mask_flag))
    if len(raw) < expected:
        raise TruncatedError(
            f"{path}: {len(raw)} bytes, expected {expected} for {nx}x{ny}x{ncomp}"
        )
    samples = np.frombuffer(raw, dtype="<f4", count=n, offset=FLD1_HEADER_BYTES)
    samples = samples.reshape(ncomp, ny, nx).copy()
    mask = None
    if mask_flag:
        mbytes = np.frombuffer(raw, dtype=np.uint8, count=n, offset=FLD1_HEADER_BYTES + 4 * n)
        mask = (mbytes != 0).reshape(ncomp, ny, nx).copy()
    return Field(
        name=Path(path).stem, units="", nx=nx, ny=ny, ncomp=ncomp,
        samples=samples, mask=mask,
    )


def _neighbor_mean(u: np.ndarray) -> np.ndarray:
    """Mean of the 4-neighborhood with reflective (Neumann) edges."""
    p = np.pad(u, 1, mode="edge")
    return 0.25 * (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:])


def _dilate_seed(plane: np.ndarray, known: np.ndarray) -> np.ndarray:
    """Fill unknown cells by repeatedly averaging known 4-neighbors outward."""
    u = plane.copy()
    u[~known] = 0.0
    known = known.copy()
    while not known.all():
        p = np.pad(u, 1, mode="constant")
        k = np.pad(known, 1, mode="constant")
        ssum = (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:])
        scnt = (
            k[:-2, 1:-1].astype(np.int32) + k[2:, 1:-1] + k[1:-1, :-2] + k[1:-1, 2:]
        )
        frontier = (~known) & (scnt > 0)
        if not frontier.any():  # disconnected unknown region cannot occur on a grid
            raise MaskError("mask dilation stalled")
        u[frontier] = ssum[frontier] / scnt[frontier]
        known |= frontier
    return u


def fill_masked(field: Field, max_iters: int | None = None, tol: float | None = None) -> Field:
    """Replace invalid samples with a discrete harmonic (Laplace) interpolant.

    Values on the invalid set are relaxed by Jacobi iteration of the
    4-neighbor Laplace stencil, seeded by nearest-valid dilation, until the
    largest update falls below ``tol`` or ``max_iters`` sweeps have run.
    Valid samples are never altered, and by the discrete maximum principle
    the filled values stay inside the valid range of each component.
    """
    if field.mask is None:
        return field
    stats = field.stats()
    if tol is None:
        tol = 1e-6 * (stats.vmax - stats.vmin)
    if max_iters is None:
        max_iters = 10 * (field.nx + field.ny)
    out = field.samples.astype(np.float64)
    for c in range(field.ncomp):
        known = field.mask[c]
        if not known.any():
            raise MaskError(f"component {c} has no valid samples")
        if known.all():
            continue
        u = _dilate_seed(out[c], known)
        invalid = ~known
        for _ in range(max_iters):
            avg = _neighbor_mean(u)
            delta = np.abs(avg[invalid] - u[invalid]).max() if invalid.any() else 0.0
            u[invalid] = avg[invalid]
            if delta < tol:
                break
        out[c] = u
    return field.with_samples(out.astype(np.float32), mask=None)


def synth_field(kind: str, nx: int, ny: int, ncomp: int = 1, seed: int = 0) -> Field:
    """Generate a deterministic synthetic test field.

    ``smooth``   band-limited mixture of broad Gaussian bumps
    ``vortices`` superposed Gaussian-envelope rotational bumps across scales,
                 mimicking the eddy-bearing velocity structure of ocean fields
    ``ramp``     f(x, y) = x + nx*y exactly
    ``noise``    i.i.d. standard normal samples
    """
    if kind not in SYNTH_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if nx < 8 or ny < 8:
        raise ValueError("synthetic fields require nx, ny >= 8")
    rng = np.random.default_rng(seed)
    x = np.arange(nx, dtype=np.float64)
    y = np.arange(ny, dtype=np.float64)
    xx, yy = np.meshgrid(x, y)
    comps = np.empty((ncomp, ny, nx), dtype=np.float64)
    for c in range(ncomp):
        if kind == "ramp":
            comps[c] = xx + nx * yy
        elif kind == "noise":
            comps[c] = rng.standard_normal((ny, nx))
        elif kind == "smooth":
            plane = np.zeros((ny, nx))
            for _ in range(12):
                cx, cy = rng.uniform(0, nx), rng.uniform(0, ny)
                sigma = rng.uniform(min(nx, ny) / 16, min(nx, ny) / 4)
                amp = rng.uniform(-1.0, 1.0)
                plane += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
            comps[c] = plane
        else:  # vortices
            plane = np.zeros((ny, nx))
            for _ in range(48):
                cx, cy = rng.uniform(0, nx), rng.uniform(0, ny)
                # log-uniform radii from a few cells up to an eighth of the grid
                sigma = math.exp(rng.uniform(math.log(2.5), math.log(min(nx, ny) / 8)))
                amp = rng.uniform(-1.0, 1.0)
                env = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
                # x-velocity of a Gaussian eddy: tangential flow around (cx, cy)
                plane += amp * env * (-(yy - cy) / sigma)
            comps[c] = plane
    return Field(
        name=f"{kind}-{nx}x{ny}x{ncomp}-s{seed}", units="", nx=nx, ny=ny,
        ncomp=ncomp, samples=comps.astype(np.float32),
    )


def _derivative(field: Field, axis: int, suffix: str) -> Field:
    # axis 2 = along x (E-W), axis 1 = along y (N-S)
    n = field.nx if axis == 2 else field.ny
    if n < 3:
        raise ValueError("derivative needs at least 3 samples along the axis")
    s = np.moveaxis(field.samples.astype(np.float64), axis, 2)
    d = np.empty_like(s)
    d[..., 1:-1] = 0.5 * (s[..., 2:] - s[..., :-2])
    d[..., 0] = s[..., 1] - s[..., 0]
    d[..., -1] = s[..., -1] - s[..., -2]
    mask = None
    if field.mask is not None:
        m = np.moveaxis(field.mask, axis, 2)
        dm = np.empty_like(m)
        dm[..., 1:-1] = m[..., 2:] & m[..., :-2]
        dm[..., 0] = m[..., 0] & m[..., 1]
        dm[..., -1] = m[..., -1] & m[..., -2]
        d = np.where(dm, d, 0.0)  # invalid stencils may touch NaN cells
        mask = np.moveaxis(dm, 2, axis).copy()
    out = np.moveaxis(d, 2, axis).astype(np.float32)
    return field.with_samples(out, mask=mask, name=field.name + suffix)


def derivative_ew(field: Field) -> Field:
    """Central-difference derivative along x (east-west), one-sided at edges.

    The mask is propagated: a derivative sample is valid only where every
    sample of its stencil is valid.
    """
    return _derivative(field, axis=2, suffix="_ddx")


def derivative_ns(field: Field) -> Field:
    """Central-difference derivative along y (north-south); see derivative_ew."""
    return _derivative(field, axis=1, suffix="_ddy")
