"""Irreversible 9/7 lifting wavelet transform and multilevel 2-D pyramids.

The 1-D transform runs the four standard lifting steps over a whole-sample
symmetric extension (mirror without repeating the edge sample), then scales
the high channel by K.  With this normalization the lowpass has DC gain K,
so the LL band of a 2-D level scales a constant input by K^2 per level; the
decoder divides the composed K factors back out when reconstructing at a
reduced resolution.  All arithmetic is float64 regardless of input dtype.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field as dc_field

import numpy as np

ALPHA = -1.586134342059924
BETA = -0.052980118572961
GAMMA = 0.882911075530934
DELTA = 0.443506852043971
K = 1.230174104914001

COMPONENT_TRANSFORMS = ("none", "haar_pairs", "dwt97_z")

_PAD = 4  # lifting reach: one sample per step per side


def max_levels(nx: int, ny: int) -> int:
    """Largest decomposition depth allowed for a plane of the given dims."""
    return max(0, int(math.floor(math.log2(min(nx, ny)))) - 2)


@dataclass(frozen=True)
class TransformSpec:
    """Decomposition parameters; boundary handling is fixed to whole-sample
    symmetric extension."""

    levels: int = 5
    component_transform: str = "none"

    def __post_init__(self):
        if self.levels < 0:
            raise ValueError("levels must be >= 0")
        if self.component_transform not in COMPONENT_TRANSFORMS:
            raise ValueError(f"unknown component transform {self.component_transform!r}")

    def validate_dims(self, nx: int, ny: int) -> None:
        lim = max_levels(nx, ny)
        if self.levels > lim:
            raise ValueError(
                f"levels={self.levels} out of range for {nx}x{ny} (max {lim})"
            )


def _forward_last(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward lifting along the last axis of a float64 array (n >= 2)."""
    n = a.shape[-1]
    e = np.pad(a.astype(np.float64, copy=True), [(0, 0)] * (a.ndim - 1) + [(_PAD, _PAD)],
               mode="reflect")
    # odd-indexed samples of e are odd samples of the extended signal
    e[..., 1:-1:2] += ALPHA * (e[..., 0:-2:2] + e[..., 2::2])
    e[..., 2:-1:2] += BETA * (e[..., 1:-2:2] + e[..., 3::2])
    e[..., 1:-1:2] += GAMMA * (e[..., 0:-2:2] + e[..., 2::2])
    e[..., 2:-1:2] += DELTA * (e[..., 1:-2:2] + e[..., 3::2])
    low = e[..., _PAD:_PAD + n:2].copy()
    high = e[..., _PAD + 1:_PAD + n:2] * K
    return low, high


def _inverse_last(low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_forward_last`; reassembles a length n signal."""
    n = low.shape[-1] + high.shape[-1]
    y = np.empty(low.shape[:-1] + (n,), dtype=np.float64)
    y[..., 0::2] = low
    y[..., 1::2] = np.asarray(high, dtype=np.float64) / K
    e = np.pad(y, [(0, 0)] * (y.ndim - 1) + [(_PAD, _PAD)], mode="reflect")
    e[..., 2:-1:2] -= DELTA * (e[..., 1:-2:2] + e[..., 3::2])
    e[..., 1:-1:2] -= GAMMA * (e[..., 0:-2:2] + e[..., 2::2])
    e[..., 2:-1:2] -= BETA * (e[..., 1:-2:2] + e[..., 3::2])
    e[..., 1:-1:2] -= ALPHA * (e[..., 0:-2:2] + e[..., 2::2])
    return e[..., _PAD:_PAD + n].copy()


def dwt97_forward_1d(signal) -> tuple[np.ndarray, np.ndarray]:
    """One level of the forward 9/7 transform of a 1-D signal.

    Returns (low, high) with ceil(n/2) and floor(n/2) coefficients.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ValueError("signal must be 1-D with n >= 2")
    low, high = _forward_last(x[None, :])
    return low[0], high[0]


def dwt97_inverse_1d(low, high) -> np.ndarray:
    """Inverse of :func:`dwt97_forward_1d`."""
    lo = np.asarray(low, dtype=np.float64)
    hi = np.asarray(high, dtype=np.float64)
    if lo.ndim != 1 or hi.ndim != 1 or not (0 <= lo.shape[0] - hi.shape[0] <= 1):
        raise ValueError("low/high lengths must differ by 0 or 1")
    return _inverse_last(lo[None, :], hi[None, :])[0]


# Subband bookkeeping -------------------------------------------------------

_KINDS = ("HL", "LH", "HH")

# orientation class for significance contexts: LL and LH share a class
ORIENT_CLASS = {"LL": 0, "LH": 0, "HL": 1, "HH": 2}


@dataclass(frozen=True)
class Subband:
    name: str      # e.g. "LL3", "HL1"
    kind: str      # LL | HL | LH | HH
    level: int     # 1..levels for details; = levels for the LL band
    width: int
    height: int


def subband_layout(nx: int, ny: int, levels: int) -> list[Subband]:
    """Canonical coarse-first subband list: LL_L, then HL/LH/HH per level
    from the coarsest (level L) down to level 1."""
    dims = [(nx, ny)]
    w, h = nx, ny
    for _ in range(levels):
        w, h = (w + 1) // 2, (h + 1) // 2
        dims.append((w, h))
    out = [Subband(f"LL{levels}", "LL", levels, dims[levels][0], dims[levels][1])]
    for lev in range(levels, 0, -1):
        pw, ph = dims[lev - 1]
        lw, hw = (pw + 1) // 2, pw // 2
        lh, hh = (ph + 1) // 2, ph // 2
        out.append(Subband(f"HL{lev}", "HL", lev, hw, lh))
        out.append(Subband(f"LH{lev}", "LH", lev, lw, hh))
        out.append(Subband(f"HH{lev}", "HH", lev, hw, hh))
    return out


def subband_resolution(index: int) -> int:
    """Resolution group of a subband index: 0 for LL, then 1 (coarsest
    detail level) upward in steps of three."""
    return 0 if index == 0 else (index - 1) // 3 + 1


@dataclass
class SubbandPyramid:
    """Multilevel dyadic decomposition of one plane."""

    nx: int
    ny: int
    levels: int
    planes: list[np.ndarray]   # float64, aligned with subband_layout order
    gains: np.ndarray          # synthesis energy gain per subband

    @property
    def layout(self) -> list[Subband]:
        return subband_layout(self.nx, self.ny, self.levels)


def dwt2d_forward(plane: np.ndarray, spec: TransformSpec) -> SubbandPyramid:
    """Separable row-then-column 9/7 decomposition, recursing on LL."""
    a = np.asarray(plane, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("plane must be 2-D")
    ny, nx = a.shape
    spec.validate_dims(nx, ny)
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    ll = a
    for _ in range(spec.levels):
        lo, hi = _forward_last(ll)                      # rows
        lo_l, lo_h = _forward_last(np.ascontiguousarray(lo.T))   # columns
        hi_l, hi_h = _forward_last(np.ascontiguousarray(hi.T))
        ll = np.ascontiguousarray(lo_l.T)
        details.append((np.ascontiguousarray(hi_l.T),   # HL: high in x, low in y
                        np.ascontiguousarray(lo_h.T),   # LH
                        np.ascontiguousarray(hi_h.T)))  # HH
    planes = [ll]
    for hl, lh, hh in reversed(details):
        planes.extend((hl, lh, hh))
    gains = compute_gains(nx, ny, spec.levels)
    return SubbandPyramid(nx=nx, ny=ny, levels=spec.levels, planes=planes, gains=gains)


def dwt2d_inverse(pyr: SubbandPyramid) -> np.ndarray:
    """Reassemble the source plane from a pyramid (perfect reconstruction)."""
    layout = pyr.layout
    if len(pyr.planes) != len(layout):
        raise ValueError("pyramid plane count does not match its layout")
    for p, sb in zip(pyr.planes, layout):
        if p.shape != (sb.height, sb.width):
            raise ValueError(f"subband {sb.name} has shape {p.shape}, "
                             f"expected {(sb.height, sb.width)}")
    ll = np.asarray(pyr.planes[0], dtype=np.float64)
    for lev in range(pyr.levels, 0, -1):
        base = 1 + 3 * (pyr.levels - lev)
        hl = np.asarray(pyr.planes[base], dtype=np.float64)
        lh = np.asarray(pyr.planes[base + 1], dtype=np.float64)
        hh = np.asarray(pyr.planes[base + 2], dtype=np.float64)
        lo = _inverse_last(np.ascontiguousarray(ll.T), np.ascontiguousarray(lh.T)).T
        hi = _inverse_last(np.ascontiguousarray(hl.T), np.ascontiguousarray(hh.T)).T
        ll = _inverse_last(np.ascontiguousarray(lo), np.ascontiguousarray(hi))
    return ll


def zero_pyramid(nx: int, ny: int, levels: int) -> SubbandPyramid:
    layout = subband_layout(nx, ny, levels)
    planes = [np.zeros((sb.height, sb.width)) for sb in layout]
    return SubbandPyramid(nx=nx, ny=ny, levels=levels, planes=planes,
                          gains=compute_gains(nx, ny, levels))


# Synthesis gains ------------------------------------------------------------

_gain_cache: dict[tuple[int, int, int], np.ndarray] = {}
_gain_lock = threading.Lock()


def _basis_norm_sq_1d(n: int, levels: int, band_level: int, high: bool) -> float:
    """Squared norm of the 1-D synthesis basis vector for a mid-band
    coefficient at the given level of a length-n system."""
    sizes = [n]
    for _ in range(levels):
        sizes.append((sizes[-1] + 1) // 2)
    if high:
        m = sizes[band_level - 1] // 2
        vec = np.zeros(m)
        vec[m // 2] = 1.0
        cur = _inverse_last(np.zeros((1, sizes[band_level - 1] - m)), vec[None, :])[0]
        start = band_level - 1
    else:
        m = sizes[band_level]
        vec = np.zeros(m)
        vec[m // 2] = 1.0
        cur = vec
        start = band_level
    for lev in range(start, 0, -1):
        cur = _inverse_last(cur[None, :], np.zeros((1, sizes[lev - 1] // 2)))[0]
    return float(np.dot(cur, cur))


def compute_gains(nx: int, ny: int, levels: int) -> np.ndarray:
    """Synthesis energy gain per subband: the squared norm of the 2-D
    synthesis basis vector of a representative interior coefficient.

    The 2-D basis is the outer product of the 1-D row and column bases, so
    the gain is the product of the two 1-D squared norms.  Cached per
    (nx, ny, levels); the cache is only ever appended to, so concurrent reads
    are safe.
    """
    key = (nx, ny, levels)
    with _gain_lock:
        hit = _gain_cache.get(key)
    if hit is not None:
        return hit
    layout = subband_layout(nx, ny, levels)
    gains = np.empty(len(layout))
    if levels == 0:
        gains[0] = 1.0
    else:
        for i, sb in enumerate(layout):
            gx = _basis_norm_sq_1d(nx, levels, sb.level, high=sb.kind in ("HL", "HH"))
            gy = _basis_norm_sq_1d(ny, levels, sb.level, high=sb.kind in ("LH", "HH"))
            gains[i] = gx * gy
    gains.setflags(write=False)
    with _gain_lock:
        _gain_cache[key] = gains
    return gains


# Cross-component decorrelation ----------------------------------------------

_SQRT2 = math.sqrt(2.0)


def component_decorrelate(comps: np.ndarray, mode: str) -> np.ndarray:
    """Apply the cross-component transform along axis 0.

    ``haar_pairs`` rotates adjacent component pairs to orthonormal
    sum/difference; ``dwt97_z`` runs the 1-D 9/7 transform along the
    component axis and concatenates [low | high].
    """
    if mode == "none":
        return np.asarray(comps, dtype=np.float64)
    ncomp = comps.shape[0]
    if ncomp < 2:
        raise ValueError(f"component transform {mode!r} needs ncomp >= 2")
    a = np.asarray(comps, dtype=np.float64)
    if mode == "haar_pairs":
        out = a.copy()
        pairs = ncomp // 2
        ev, od = a[0:2 * pairs:2], a[1:2 * pairs:2]
        out[0:2 * pairs:2] = (ev + od) / _SQRT2
        out[1:2 * pairs:2] = (ev - od) / _SQRT2
        return out
    if mode == "dwt97_z":
        flat = a.reshape(ncomp, -1).T  # one z-signal per pixel, along last axis
        low, high = _forward_last(np.ascontiguousarray(flat))
        return np.concatenate([low.T, high.T], axis=0).reshape(a.shape)
    raise ValueError(f"unknown component transform {mode!r}")


def component_recompose(comps: np.ndarray, mode: str) -> np.ndarray:
    """Inverse of :func:`component_decorrelate`."""
    if mode == "none":
        return np.asarray(comps, dtype=np.float64)
    a = np.asarray(comps, dtype=np.float64)
    ncomp = a.shape[0]
    if mode == "haar_pairs":
        out = a.copy()
        pairs = ncomp // 2
        s, d = a[0:2 * pairs:2], a[1:2 * pairs:2]
        out[0:2 * pairs:2] = (s + d) / _SQRT2
        out[1:2 * pairs:2] = (s - d) / _SQRT2
        return out
    if mode == "dwt97_z":
        nlow = (ncomp + 1) // 2
        low = a[:nlow].reshape(nlow, -1).T
        high = a[nlow:].reshape(ncomp - nlow, -1).T
        rec = _inverse_last(np.ascontiguousarray(low), np.ascontiguousarray(high))
        return rec.T.reshape(a.shape)
    raise ValueError(f"unknown component transform {mode!r}")
