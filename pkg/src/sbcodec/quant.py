"""Fixed-point normalization, per-subband deadzone quantization, and
floating-point entropy estimation.

The field is mapped by an affine normalization into a signed range of B bits
(B defaults to 26), transformed, and quantized with q = sign(c) * floor(|c| /
step[b]).  Steps follow step[b] = 1 / sqrt(gain[b]) so a unit quantization
error contributes the same reconstruction MSE in every subband; each step is
rounded to an exactly serializable exponent/mantissa form before use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRangeError, MagnitudeOverflowError
from .grid import Field, FieldStats
from .transform import SubbandPyramid

DEFAULT_BITS = 26
_STEP_EXP_BIAS = 16   # u16 step code: 5-bit exponent (biased), 11-bit mantissa
MAX_MAGNITUDE = (1 << 31) - 1


def encode_step(step: float) -> int:
    """Round a positive step to its 16-bit (exponent, mantissa) code."""
    if not (step > 0):
        raise ValueError("step must be positive")
    e = math.floor(math.log2(step))
    m = int(round((step / 2.0**e - 1.0) * 2048))
    if m == 2048:
        e += 1
        m = 0
    e += _STEP_EXP_BIAS
    if not (0 <= e < 32):
        raise ValueError(f"step {step} out of representable range")
    return (e << 11) | m


def decode_step(code: int) -> float:
    e = (code >> 11) - _STEP_EXP_BIAS
    m = code & 0x7FF
    return (1.0 + m / 2048.0) * 2.0**e


@dataclass(frozen=True)
class QuantSpec:
    """Normalization plus per-subband deadzone step sizes."""

    bits: int
    offset: float
    scale: float
    steps: np.ndarray          # float64, one per subband, exactly serializable
    recon_bias: float = 0.5    # serialized as a u8 numerator over 256

    def step_codes(self) -> list[int]:
        return [encode_step(float(s)) for s in self.steps]


def derive_spec(stats: FieldStats, bits: int, gains: np.ndarray) -> QuantSpec:
    """Build the quantizer for a field from its stats and the subband gains."""
    if not 8 <= bits <= 30:
        raise ValueError("bits must be in [8, 30]")
    if not stats.vmax > stats.vmin:
        raise DegenerateRangeError(
            f"field range [{stats.vmin}, {stats.vmax}] has no dynamic range"
        )
    offset = 0.5 * (stats.vmax + stats.vmin)
    scale = (2.0**bits - 1.0) / (stats.vmax - stats.vmin)
    steps = np.array([decode_step(encode_step(1.0 / math.sqrt(g))) for g in gains])
    return QuantSpec(bits=bits, offset=offset, scale=scale, steps=steps)


@dataclass
class QuantizedPyramid:
    """Integer subband planes mirroring a SubbandPyramid's structure."""

    nx: int
    ny: int
    levels: int
    planes: list[np.ndarray]   # int32, sign carried by the value
    spec: QuantSpec
    gains: np.ndarray


def quantize(pyr: SubbandPyramid, spec: QuantSpec) -> QuantizedPyramid:
    """Deadzone-quantize every subband; magnitudes must fit 31 bits."""
    if len(spec.steps) != len(pyr.planes):
        raise ValueError("spec was derived for a different decomposition")
    out = []
    layout = pyr.layout
    for i, plane in enumerate(pyr.planes):
        mag = np.floor(np.abs(plane) / spec.steps[i])
        peak = float(mag.max()) if mag.size else 0.0
        if peak > MAX_MAGNITUDE:
            raise MagnitudeOverflowError(layout[i].name, int(peak))
        out.append((np.sign(plane) * mag).astype(np.int32))
    return QuantizedPyramid(nx=pyr.nx, ny=pyr.ny, levels=pyr.levels,
                            planes=out, spec=spec, gains=pyr.gains)


def dequantize(qpyr: QuantizedPyramid, dropped_planes=None) -> SubbandPyramid:
    """Midpoint reconstruction of a (possibly partially decoded) pyramid.

    ``dropped_planes`` gives, per subband, a per-sample count of magnitude
    bit-planes that were never decoded; reconstruction uses the effective
    step ``step[b] * 2**dropped`` and the midpoint bias within that bin.
    None means every plane was decoded in full.
    """
    spec = qpyr.spec
    planes = []
    for i, q in enumerate(qpyr.planes):
        mag = np.abs(q.astype(np.int64))
        sgn = np.sign(q).astype(np.float64)
        if dropped_planes is None:
            step_eff = spec.steps[i]
        else:
            d = dropped_planes[i].astype(np.int64)
            mag = mag >> d
            step_eff = spec.steps[i] * np.exp2(d.astype(np.float64))
        rec = np.where(mag > 0, sgn * (mag + spec.recon_bias) * step_eff, 0.0)
        planes.append(rec)
    return SubbandPyramid(nx=qpyr.nx, ny=qpyr.ny, levels=qpyr.levels,
                          planes=planes, gains=qpyr.gains)


def estimate_entropy(field: Field, bits: int) -> float:
    """Upper-bound estimate of the first-order entropy of the B-bit uniform
    quantization of the field's valid samples.

    A 2^16-bin histogram is measured over the valid range; within each coarse
    bin the quantizer levels are assumed uniformly occupied, which adds
    log2(levels per bin) = B - 16 bits and makes the estimate an upper bound.
    """
    v = field.valid_values().astype(np.float64)
    vmin, vmax = float(v.min()), float(v.max())
    if not vmax > vmin:
        return 0.0
    nbins = 1 << min(bits, 16)
    idx = np.floor((v - vmin) / (vmax - vmin) * nbins).astype(np.int64)
    np.clip(idx, 0, nbins - 1, out=idx)
    counts = np.bincount(idx, minlength=nbins)
    p = counts[counts > 0] / v.size
    h_coarse = float(-(p * np.log2(p)).sum())
    return h_coarse + max(0, bits - 16)
