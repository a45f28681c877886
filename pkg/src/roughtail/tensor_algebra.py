"""Truncated tensor algebra over R^d and the step-L nilpotent group.

A group element stores the tensor levels 1..L of a signature-like object
(the scalar level 0 is always 1 and kept implicit).  Levels are dense
row-major ndarrays, level k having shape (d,)*k.  Only L in {1, 2, 3} is
supported: every downstream computation in this package works with
variation orders p < 4.

All operations are pure and elements are immutable after construction, so
values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NumericError

MAX_LEVEL = 3


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GroupElement:
    """Levels 1..L of a truncated-signature value over R^d.

    ``levels[k-1]`` is the level-k tensor with shape ``(dim,)*k``.  The
    constructor copies its inputs and rejects non-finite entries.
    """

    dim: int
    level: int
    levels: tuple

    def __post_init__(self):
        if not 1 <= self.level <= MAX_LEVEL:
            raise DimensionMismatchError(f"level must be in 1..{MAX_LEVEL}, got {self.level}")
        if self.dim < 1:
            raise DimensionMismatchError(f"dim must be positive, got {self.dim}")
        if len(self.levels) != self.level:
            raise DimensionMismatchError(
                f"expected {self.level} level tensors, got {len(self.levels)}")
        frozen = []
        for k, arr in enumerate(self.levels, start=1):
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != (self.dim,) * k:
                raise DimensionMismatchError(
                    f"level {k} tensor has shape {arr.shape}, expected {(self.dim,) * k}")
            if not np.all(np.isfinite(arr)):
                raise NumericError(f"level {k} tensor contains non-finite entries")
            frozen.append(_frozen(arr))
        object.__setattr__(self, "levels", tuple(frozen))

    def level_tensor(self, k: int) -> np.ndarray:
        """Level-k tensor, k in 1..level."""
        return self.levels[k - 1]


def identity_element(dim: int, level: int) -> GroupElement:
    """Neutral element: all tensor levels zero."""
    return GroupElement(dim, level, tuple(np.zeros((dim,) * k) for k in range(1, level + 1)))


def _check_compatible(a: GroupElement, b: GroupElement) -> None:
    if a.dim != b.dim or a.level != b.level:
        raise DimensionMismatchError(
            f"incompatible elements: (dim={a.dim}, level={a.level}) vs "
            f"(dim={b.dim}, level={b.level})")


def mul_levels(a: tuple, b: tuple, level: int) -> list:
    """Truncated tensor product on raw level tuples (level-0 components = 1)."""
    out = [a[0] + b[0]]
    if level >= 2:
        out.append(a[1] + b[1] + np.multiply.outer(a[0], b[0]))
    if level >= 3:
        out.append(a[2] + b[2] + np.multiply.outer(a[0], b[1]) + np.multiply.outer(a[1], b[0]))
    return out


def inverse_levels(g: tuple, level: int) -> list:
    """Group inverse on raw level tuples: (1+a)^{-1} = 1 - a + a^2 - a^3."""
    out = [-g[0]]
    if level >= 2:
        out.append(-g[1] + np.multiply.outer(g[0], g[0]))
    if level >= 3:
        out.append(-g[2] + np.multiply.outer(g[0], g[1]) + np.multiply.outer(g[1], g[0])
                   - np.multiply.outer(np.multiply.outer(g[0], g[0]), g[0]))
    return out


def increment_levels(a: tuple, b: tuple, level: int) -> list:
    """Levels of a^{-1} (x) b without forming the inverse explicitly."""
    x1 = b[0] - a[0]
    out = [x1]
    if level >= 2:
        x2 = b[1] - a[1] - np.multiply.outer(a[0], x1)
        out.append(x2)
    if level >= 3:
        x3 = (b[2] - a[2] - np.multiply.outer(a[0], out[1])
              - np.multiply.outer(a[1], x1))
        out.append(x3)
    return out


def log_levels(g: tuple, level: int) -> list:
    """Tensor logarithm of a group-like element: a - a^2/2 + a^3/3."""
    out = [np.array(g[0], dtype=np.float64)]
    if level >= 2:
        out.append(g[1] - 0.5 * np.multiply.outer(g[0], g[0]))
    if level >= 3:
        out.append(g[2]
                   - 0.5 * (np.multiply.outer(g[0], g[1]) + np.multiply.outer(g[1], g[0]))
                   + np.multiply.outer(np.multiply.outer(g[0], g[0]), g[0]) / 3.0)
    return out


def exp_levels(m: tuple, level: int) -> list:
    """Tensor exponential of an algebra element with zero scalar part."""
    out = [np.array(m[0], dtype=np.float64)]
    if level >= 2:
        out.append(m[1] + 0.5 * np.multiply.outer(m[0], m[0]))
    if level >= 3:
        out.append(m[2]
                   + 0.5 * (np.multiply.outer(m[0], m[1]) + np.multiply.outer(m[1], m[0]))
                   + np.multiply.outer(np.multiply.outer(m[0], m[0]), m[0]) / 6.0)
    return out


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    """Truncated tensor product of two group elements (Chen composition)."""
    _check_compatible(a, b)
    return GroupElement(a.dim, a.level, tuple(mul_levels(a.levels, b.levels, a.level)))


def inverse(g: GroupElement) -> GroupElement:
    """Group inverse: mul(g, inverse(g)) is the identity."""
    return GroupElement(g.dim, g.level, tuple(inverse_levels(g.levels, g.level)))


def segment_exp(increment, level: int) -> GroupElement:
    """Signature of one linear segment: level k equals increment^{(x)k} / k!."""
    v = np.asarray(increment, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError("increment must be a 1-D vector")
    levels = [v]
    if level >= 2:
        levels.append(0.5 * np.multiply.outer(v, v))
    if level >= 3:
        levels.append(np.multiply.outer(np.multiply.outer(v, v), v) / 6.0)
    return GroupElement(v.shape[0], level, tuple(levels[:level]))


def homogeneous_norm(g: GroupElement) -> float:
    """max_k |level k|^(1/k) with the Euclidean (Frobenius) tensor norm.

    Homogeneous of degree 1 under dilation.  Equivalent to every other
    homogeneous norm on the group, which is all the downstream estimates
    need; the constant of equivalence is absorbed by them.
    """
    return max(float(np.linalg.norm(g.levels[k - 1].ravel()) ** (1.0 / k))
               for k in range(1, g.level + 1))


def dilate(g: GroupElement, lam: float) -> GroupElement:
    """Dilation: level k is scaled by lam^k."""
    return GroupElement(g.dim, g.level,
                        tuple(g.levels[k - 1] * lam ** k for k in range(1, g.level + 1)))


def tensor_log(g: GroupElement) -> tuple:
    """Raw levels of log(g); level 1 of the result generates the segment direction."""
    return tuple(log_levels(g.levels, g.level))


def tensor_exp(m: tuple, dim: int, level: int) -> GroupElement:
    """Inverse of :func:`tensor_log` on raw level tuples."""
    return GroupElement(dim, level, tuple(exp_levels(m, level)))
