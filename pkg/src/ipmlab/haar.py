"""Haar multiresolution analysis for dyadic piecewise-constant functions on [0,1]^d.

Functions live on the regular grid with 2^L cells per axis.  Coefficients live
in the orthonormal tensor-product Haar basis: one scaling coefficient (on the
constant function 1) plus, for every level j < L, orientation o in
{1, ..., 2^d - 1} and cell k in [0, 2^{dj}), one detail coefficient.  Bit a of
the orientation selects the mother factor on axis a; a clear bit selects the
father factor.  Analysis and synthesis are exact inverses on this space up to
float rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DyadicFunction",
    "DyadicDensity",
    "WaveletCoeffs",
    "analyze",
    "synthesize",
    "eval_basis",
    "truncated",
    "uniform_density",
]

_SQRT1_2 = math.sqrt(0.5)


def _cell_count(dim: int, level: int) -> int:
    return 1 << (dim * level)


@dataclass(frozen=True, eq=False)
class DyadicFunction:
    """Piecewise-constant function on the dyadic grid of [0,1]^d.

    ``values`` has one entry per cell, cell-major in lexicographic order of the
    d-tuple of per-axis indices (C order of the (2^L,)*d grid, axis 0 major).
    Cell volume is 2^{-dL}, so the integral is exactly the mean of ``values``.
    """

    dim: int
    level: int
    values: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.level < 0:
            raise ValueError(f"level must be nonnegative, got {self.level}")
        vals = np.ascontiguousarray(self.values, dtype=float).ravel()
        expected = _cell_count(self.dim, self.level)
        if vals.size != expected:
            raise ValueError(
                f"expected {expected} cell values for dim={self.dim}, "
                f"level={self.level}, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("cell values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def integral(self) -> float:
        return float(self.values.mean())

    def grid(self) -> np.ndarray:
        """Values reshaped to (2^L,)*dim."""
        return self.values.reshape((1 << self.level,) * self.dim)

    def to_json(self) -> dict:
        return {"dim": self.dim, "level": self.level, "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict):
        return cls(int(obj["dim"]), int(obj["level"]),
                   np.asarray(obj["values"], dtype=float))


@dataclass(frozen=True, eq=False)
class DyadicDensity(DyadicFunction):
    """Probability density: nonnegative cell values integrating to 1."""

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.values < 0.0):
            k = int(np.argmin(self.values))
            raise ValueError(f"density value at cell {k} is negative: {self.values[k]!r}")
        mean = float(self.values.mean())
        if abs(mean - 1.0) > 1e-12:
            raise ValueError(f"density must integrate to 1, got {mean!r}")


def uniform_density(dim: int, level: int) -> DyadicDensity:
    return DyadicDensity(dim, level, np.ones(_cell_count(dim, level)))


@dataclass(frozen=True, eq=False)
class WaveletCoeffs:
    """Haar coefficient tree.

    ``detail[j]`` has shape (2^d - 1, 2^{dj}); row o-1 holds the level-j
    coefficients for orientation o, in lexicographic cell order.  ``scaling``
    multiplies the constant function 1 over [0,1]^d.
    """

    dim: int
    max_level: int
    scaling: float
    detail: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.max_level < 0:
            raise ValueError(f"max_level must be nonnegative, got {self.max_level}")
        if not math.isfinite(self.scaling):
            raise ValueError("scaling coefficient must be finite")
        object.__setattr__(self, "scaling", float(self.scaling))
        if len(self.detail) != self.max_level:
            raise ValueError(
                f"expected {self.max_level} detail levels, got {len(self.detail)}"
            )
        n_or = (1 << self.dim) - 1
        levels = []
        for j, arr in enumerate(self.detail):
            a = np.ascontiguousarray(arr, dtype=float)
            shape = (n_or, _cell_count(self.dim, j))
            if a.shape != shape:
                raise ValueError(f"detail level {j}: expected shape {shape}, got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"detail level {j}: non-finite coefficient")
            a.flags.writeable = False
            levels.append(a)
        object.__setattr__(self, "detail", tuple(levels))

    @property
    def n_orientations(self) -> int:
        return (1 << self.dim) - 1

    def detail_count(self) -> int:
        return sum(a.size for a in self.detail)

    def flat_detail(self) -> np.ndarray:
        """All detail coefficients, flattened in (j, o, k) order."""
        if not self.detail:
            return np.empty(0)
        return np.concatenate([a.ravel() for a in self.detail])

    def sum_squares(self) -> float:
        return self.scaling ** 2 + sum(float((a * a).sum()) for a in self.detail)

    @classmethod
    def zeros(cls, dim: int, max_level: int, scaling: float = 0.0):
        n_or = (1 << dim) - 1
        detail = tuple(np.zeros((n_or, _cell_count(dim, j))) for j in range(max_level))
        return cls(dim, max_level, scaling, detail)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "max_level": self.max_level,
            "scaling": self.scaling,
            "detail": self.flat_detail().tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict):
        dim = int(obj["dim"])
        max_level = int(obj["max_level"])
        flat = np.asarray(obj["detail"], dtype=float)
        n_or = (1 << dim) - 1
        detail, pos = [], 0
        for j in range(max_level):
            size = n_or * _cell_count(dim, j)
            detail.append(flat[pos:pos + size].reshape(n_or, _cell_count(dim, j)))
            pos += size
        if pos != flat.size:
            raise ValueError(f"expected {pos} detail coefficients, got {flat.size}")
        return cls(dim, max_level, float(obj["scaling"]), tuple(detail))


def _split_bands(s: np.ndarray, dim: int) -> dict:
    """One analysis step: father coefficients at a level -> 2^d band arrays.

    Keys are orientation bit patterns; band 0 is the coarser father array.
    """
    bands = {0: s}
    for axis in range(dim):
        nxt = {}
        for bits, arr in bands.items():
            even = arr[(slice(None),) * axis + (slice(0, None, 2),)]
            odd = arr[(slice(None),) * axis + (slice(1, None, 2),)]
            nxt[bits] = (even + odd) * _SQRT1_2
            nxt[bits | (1 << axis)] = (even - odd) * _SQRT1_2
        bands = nxt
    return bands


def _merge_bands(bands: dict, dim: int) -> np.ndarray:
    """Inverse of _split_bands."""
    for axis in range(dim):
        nxt = {}
        for bits in list(bands):
            if bits & (1 << axis):
                continue
            lo = bands[bits]
            hi = bands[bits | (1 << axis)]
            shape = list(lo.shape)
            shape[axis] *= 2
            out = np.empty(shape)
            out[(slice(None),) * axis + (slice(0, None, 2),)] = (lo + hi) * _SQRT1_2
            out[(slice(None),) * axis + (slice(1, None, 2),)] = (lo - hi) * _SQRT1_2
            nxt[bits] = out
        bands = nxt
    return bands[0]


def analyze(f: DyadicFunction) -> WaveletCoeffs:
    """Exact orthonormal Haar transform of a dyadic piecewise-constant function."""
    d, L = f.dim, f.level
    # Father coefficients at the finest level: <f, Phi_{L,k}> = value * 2^{-dL/2}.
    s = f.grid() * 2.0 ** (-0.5 * d * L)
    detail = [None] * L
    n_or = (1 << d) - 1
    for j in range(L - 1, -1, -1):
        bands = _split_bands(s, d)
        s = bands[0]
        level = np.empty((n_or, _cell_count(d, j)))
        for o in range(1, n_or + 1):
            level[o - 1] = bands[o].ravel()
        detail[j] = level
    # The father cascade lands on the integral; take the exact mean instead of
    # the 1/sqrt(2)-product path so constants survive bit-for-bit.
    scaling = float(f.values.mean())
    return WaveletCoeffs(d, L, scaling, tuple(detail))


def synthesize(c: WaveletCoeffs) -> DyadicFunction:
    """Inverse of :func:`analyze`; output resolution equals ``c.max_level``."""
    d, L = c.dim, c.max_level
    s = np.full((1,) * d, c.scaling)
    for j in range(L):
        bands = {0: s}
        for o in range(1, c.n_orientations + 1):
            bands[o] = c.detail[j][o - 1].reshape((1 << j,) * d)
        s = _merge_bands(bands, d)
    values = s * 2.0 ** (0.5 * d * L)
    return DyadicFunction(d, L, values.ravel())


def _axis_indices(dim: int, j: int, k: int) -> list:
    """Decode flat cell index into per-axis dyadic indices (axis 0 major)."""
    side = 1 << j
    out = []
    for a in range(dim):
        out.append((k >> (j * (dim - 1 - a))) & (side - 1))
    return out


def eval_basis(dim: int, j: int, o: int, k: int, x) -> float:
    """Pointwise value of the tensor Haar basis function h_{j,o,k} at x in [0,1]^d.

    Boundary convention: a coordinate equal to 1 belongs to the last cell (all
    other cells are half-open), so evaluation is total on the closed cube.
    """
    if j < 0:
        raise ValueError(f"level must be nonnegative, got {j}")
    if not 1 <= o <= (1 << dim) - 1:
        raise ValueError(f"orientation must lie in [1, {(1 << dim) - 1}], got {o}")
    if not 0 <= k < _cell_count(dim, j):
        raise ValueError(f"cell index must lie in [0, {_cell_count(dim, j)}), got {k}")
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.shape != (dim,):
        raise ValueError(f"expected a point with {dim} coordinates, got shape {pt.shape}")
    if np.any(pt < 0.0) or np.any(pt > 1.0):
        raise ValueError("point outside [0,1]^d")
    side = 1 << j
    sign = 1.0
    for a, m in enumerate(_axis_indices(dim, j, k)):
        t = pt[a] * side - m
        if t < 0.0 or t > 1.0 or (t == 1.0 and m != side - 1):
            return 0.0
        if (o >> a) & 1 and not t < 0.5:
            sign = -sign
    return sign * 2.0 ** (0.5 * j * dim)


def _cells_and_signs(points: np.ndarray, j: int):
    """Per-point flat cell index and per-axis mother signs at level j.

    ``points`` has shape (n, d) inside [0,1]^d; coordinates equal to 1 map to
    the last cell.  Returns (flat_index[n], signs[n, d]).
    """
    n, d = points.shape
    side = 1 << j
    scaled = points * side
    m = np.minimum(scaled.astype(np.int64), side - 1)
    t = scaled - m
    signs = np.where(t < 0.5, 1.0, -1.0)
    flat = np.zeros(n, dtype=np.int64)
    for a in range(d):
        flat = (flat << j) | m[:, a]
    return flat, signs


def truncated(c: WaveletCoeffs, keep_levels: int) -> WaveletCoeffs:
    """Copy of ``c`` with every detail level >= ``keep_levels`` zeroed out."""
    if keep_levels < 0:
        raise ValueError(f"keep_levels must be nonnegative, got {keep_levels}")
    detail = tuple(
        a if j < keep_levels else np.zeros_like(a) for j, a in enumerate(c.detail)
    )
    return WaveletCoeffs(c.dim, c.max_level, c.scaling, detail)
