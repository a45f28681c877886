"""Grid rough paths: piecewise-linear lifts, group increments, translation.

A ``RoughPathGrid`` stores the running signature (from the first grid time)
as dense per-level arrays, so increments over any grid interval come out of
a few vectorised contractions.  Between grid points the path is interpolated
along the one-parameter subgroup generated by the segment log-increment;
for canonical lifts of piecewise-linear paths that is plain linear
interpolation of the first level.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass

import numpy as np

from . import tensor_algebra as ta
from .errors import DimensionMismatchError, GridError

_BINARY_MAGIC = b"RTPATH1"
_BINARY_VERSION = 1


@dataclass(frozen=True)
class PiecewiseLinearPath:
    """Sampled R^d path, linear between samples.

    times: strictly increasing, shape (n+1,); values: shape (n+1, d).
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or t.shape[0] < 2:
            raise GridError("need at least 2 grid points")
        if v.shape[0] != t.shape[0]:
            raise GridError(f"times ({t.shape[0]}) and values ({v.shape[0]}) disagree")
        if not np.all(np.diff(t) > 0):
            raise GridError("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise GridError("non-finite entries in path data")
        t = t.copy(); t.setflags(write=False)
        v = v.copy(); v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_segments(self) -> int:
        return self.times.shape[0] - 1

    def resample(self, times) -> "PiecewiseLinearPath":
        """Linear interpolation onto a new grid (within the original span)."""
        times = np.asarray(times, dtype=np.float64)
        if times[0] < self.times[0] - 1e-12 or times[-1] > self.times[-1] + 1e-12:
            raise GridError("resample grid exceeds the path's time span")
        cols = [np.interp(times, self.times, self.values[:, j]) for j in range(self.dim)]
        return PiecewiseLinearPath(times, np.stack(cols, axis=1))

    def __add__(self, other: "PiecewiseLinearPath") -> "PiecewiseLinearPath":
        if not np.array_equal(self.times, other.times):
            raise GridError("paths must share the same grid; resample first")
        return PiecewiseLinearPath(self.times, self.values + other.values)

    def __neg__(self) -> "PiecewiseLinearPath":
        return PiecewiseLinearPath(self.times, -self.values)


def _chain_segments(times: np.ndarray, t1: np.ndarray, t2, t3, level: int):
    """Running signature from per-segment group increments.

    t1 (n, d), t2 (n, d, d), t3 (n, d, d, d) are the per-segment increment
    levels; returns cumulative levels S1 (n+1, d), S2, S3 with S(k+1) =
    S(k) (x) T(k), assembled by cumulative sums so no Python loop is needed.
    """
    n, d = t1.shape
    s1 = np.zeros((n + 1, d))
    np.cumsum(t1, axis=0, out=s1[1:])
    s2 = s3 = None
    if level >= 2:
        terms2 = t2 + np.einsum("ki,kj->kij", s1[:-1], t1)
        s2 = np.zeros((n + 1, d, d))
        np.cumsum(terms2, axis=0, out=s2[1:])
    if level >= 3:
        terms3 = (t3 + np.einsum("kij,kl->kijl", s2[:-1], t1)
                  + np.einsum("ki,kjl->kijl", s1[:-1], t2))
        s3 = np.zeros((n + 1, d, d, d))
        np.cumsum(terms3, axis=0, out=s3[1:])
    return s1, s2, s3


class RoughPathGrid:
    """Time grid plus the running signature at every grid point.

    ``level1[k]`` is the level-1 signature over [t0, tk] (so level1[0] = 0),
    and likewise for higher levels.  Chen consistency of increments is
    automatic in this representation.
    """

    def __init__(self, times, level1, level2=None, level3=None):
        times = np.asarray(times, dtype=np.float64)
        level1 = np.asarray(level1, dtype=np.float64)
        if times.ndim != 1 or times.shape[0] < 2:
            raise GridError("need at least 2 grid points")
        if not np.all(np.diff(times) > 0):
            raise GridError("times must be strictly increasing")
        n1, d = level1.shape
        if n1 != times.shape[0]:
            raise GridError("level arrays and times disagree in length")
        self.times = times
        self.dim = d
        self.level = 1 + (level2 is not None) + (level3 is not None)
        if level3 is not None and level2 is None:
            raise DimensionMismatchError("level3 given without level2")
        self.level1 = level1
        self.level2 = None if level2 is None else np.asarray(level2, dtype=np.float64)
        self.level3 = None if level3 is None else np.asarray(level3, dtype=np.float64)
        for arr, shape in ((self.level2, (n1, d, d)), (self.level3, (n1, d, d, d))):
            if arr is not None and arr.shape != shape:
                raise DimensionMismatchError(f"level array has shape {arr.shape}, want {shape}")
        if np.linalg.norm(self.level1[0]) != 0.0:
            raise GridError("signature at the first grid point must be the identity")
        self._segment_logs = None

    @property
    def n_segments(self) -> int:
        return self.times.shape[0] - 1

    def _levels_at_index(self, i: int) -> tuple:
        out = [self.level1[i]]
        if self.level >= 2:
            out.append(self.level2[i])
        if self.level >= 3:
            out.append(self.level3[i])
        return tuple(out)

    def point(self, i: int) -> ta.GroupElement:
        """Signature over [t0, ti] as a group element."""
        return ta.GroupElement(self.dim, self.level, self._levels_at_index(i))

    def increment(self, i: int, j: int) -> ta.GroupElement:
        """Group increment over [ti, tj] (i <= j)."""
        n1 = self.times.shape[0]
        if not (0 <= i <= j < n1):
            raise GridError(f"increment indices ({i}, {j}) out of range for {n1} points")
        levels = ta.increment_levels(self._levels_at_index(i), self._levels_at_index(j),
                                     self.level)
        return ta.GroupElement(self.dim, self.level, tuple(levels))

    def segment_increment_arrays(self):
        """Per-segment group increments stacked along the leading axis."""
        x1 = np.diff(self.level1, axis=0)
        x2 = x3 = None
        if self.level >= 2:
            x2 = (self.level2[1:] - self.level2[:-1]
                  - np.einsum("ki,kj->kij", self.level1[:-1], x1))
        if self.level >= 3:
            x3 = (self.level3[1:] - self.level3[:-1]
                  - np.einsum("ki,kjl->kijl", self.level1[:-1], x2)
                  - np.einsum("kij,kl->kijl", self.level2[:-1], x1))
        return x1, x2, x3

    def segment_logs(self):
        """Per-segment log-increments, cached; used for interior interpolation."""
        if self._segment_logs is None:
            n, d = self.n_segments, self.dim
            x1, x2, x3 = self.segment_increment_arrays()
            g1 = x1
            g2 = np.zeros((n, d, d))
            g3 = np.zeros((n, d, d, d))
            if self.level >= 2:
                g2 = x2 - 0.5 * np.einsum("ki,kj->kij", x1, x1)
            if self.level >= 3:
                g3 = (x3
                      - 0.5 * (np.einsum("ki,kjl->kijl", x1, x2)
                               + np.einsum("kij,kl->kijl", x2, x1))
                      + np.einsum("ki,kj,kl->kijl", x1, x1, x1) / 3.0)
            self._segment_logs = (g1, g2, g3)
        return self._segment_logs

    def signature_levels_at(self, t: float) -> tuple:
        """Raw signature levels at an arbitrary time inside the grid span."""
        times = self.times
        if not (times[0] - 1e-12 <= t <= times[-1] + 1e-12):
            raise GridError(f"time {t} outside [{times[0]}, {times[-1]}]")
        t = min(max(t, times[0]), times[-1])
        j = int(np.searchsorted(times, t, side="right") - 1)
        if j >= self.n_segments:
            j = self.n_segments - 1
        if t == times[j]:
            return self._levels_at_index(j)
        theta = (t - times[j]) / (times[j + 1] - times[j])
        g1, g2, g3 = self.segment_logs()
        scaled = [theta * g1[j]]
        if self.level >= 2:
            scaled.append(theta * g2[j])
        if self.level >= 3:
            scaled.append(theta * g3[j])
        mid = ta.exp_levels(tuple(scaled), self.level)
        return tuple(ta.mul_levels(self._levels_at_index(j), tuple(mid), self.level))

    def signature_at(self, t: float) -> ta.GroupElement:
        return ta.GroupElement(self.dim, self.level, self.signature_levels_at(t))

    def refine(self, times) -> "RoughPathGrid":
        """Same rough path re-indexed on a finer grid (must contain the span)."""
        times = np.asarray(times, dtype=np.float64)
        rows = [self.signature_levels_at(t) for t in times]
        base = self.signature_levels_at(times[0])
        levels = []
        for k in range(self.level):
            stack = np.stack([r[k] for r in rows], axis=0)
            levels.append(stack)
        # re-base so the first point is the identity
        rebased1 = levels[0] - base[0]
        rebased2 = rebased3 = None
        if self.level >= 2:
            rebased2 = levels[1] - base[1] - np.einsum("i,kj->kij", base[0], rebased1)
        if self.level >= 3:
            rebased3 = (levels[2] - base[2]
                        - np.einsum("i,kjl->kijl", base[0], rebased2)
                        - np.einsum("ij,kl->kijl", base[1], rebased1))
        return RoughPathGrid(times, rebased1, rebased2, rebased3)


def lift(path: PiecewiseLinearPath, level: int) -> RoughPathGrid:
    """Canonical lift of a piecewise-linear path: exact segment signatures
    chained by the group product.
    """
    if not 1 <= level <= ta.MAX_LEVEL:
        raise DimensionMismatchError(f"level must be in 1..{ta.MAX_LEVEL}")
    dx = np.diff(path.values, axis=0)
    t2 = t3 = None
    if level >= 2:
        t2 = 0.5 * np.einsum("ki,kj->kij", dx, dx)
    if level >= 3:
        t3 = np.einsum("ki,kj,kl->kijl", dx, dx, dx) / 6.0
    s1, s2, s3 = _chain_segments(path.times, dx, t2, t3, level)
    return RoughPathGrid(path.times, s1, s2, s3)


def increment(x: RoughPathGrid, i: int, j: int) -> ta.GroupElement:
    """Free-function alias for :meth:`RoughPathGrid.increment`."""
    return x.increment(i, j)


def translate(x: RoughPathGrid, h: PiecewiseLinearPath) -> RoughPathGrid:
    """Translation of a grid rough path by a finite-variation path.

    Levels follow the usual translation formulas: level 1 adds h, level 2
    adds the three cross/self integrals of (x1, h), level 3 adds the seven
    mixed third-order integrals.  All cross-integrals are evaluated
    segment-by-segment in closed form (the integrands are polynomial on
    each linear piece), so for canonical lifts translate(lift(x), h) equals
    lift(x + h) up to roundoff.

    h is resampled onto x's grid by linear interpolation when the grids
    differ (part of the operation contract).
    """
    if h.dim != x.dim:
        raise DimensionMismatchError(f"driver dim {x.dim} vs translation dim {h.dim}")
    if not np.array_equal(h.times, x.times):
        h = h.resample(x.times)
    w = np.diff(h.values, axis=0)          # (n, d) per-segment increments of h
    u, x2, x3 = x.segment_increment_arrays()
    v = u + w
    t1 = v
    t2 = t3 = None
    if x.level >= 2:
        # T2 = X2 + int h (x) dx1 + int x1 (x) dh + int h (x) dh, per segment
        ell2 = x2 - 0.5 * np.einsum("ki,kj->kij", u, u)
        t2 = ell2 + 0.5 * np.einsum("ki,kj->kij", v, v)
    if x.level >= 3:
        vvv = np.einsum("ki,kj,kl->kijl", v, v, v) / 6.0
        uuu = np.einsum("ki,kj,kl->kijl", u, u, u) / 6.0
        cross = 0.5 * (np.einsum("kij,kl->kijl", ell2, w)
                       + np.einsum("ki,kjl->kijl", w, ell2))
        t3 = x3 - uuu + vvv + cross
    s1, s2, s3 = _chain_segments(x.times, t1, t2, t3, x.level)
    return RoughPathGrid(x.times, s1, s2, s3)


# ---------------------------------------------------------------------------
# path I/O: CSV with header t,x1,...,xd and the RTPATH1 binary batch format
# ---------------------------------------------------------------------------

def write_path_csv(fileobj_or_name, path: PiecewiseLinearPath) -> None:
    """CSV with header ``t,x1,...,xd``, one row per grid point, '.' decimals."""
    close = False
    f = fileobj_or_name
    if not hasattr(f, "write"):
        f = open(f, "w", newline="", encoding="utf-8")
        close = True
    try:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t"] + [f"x{j + 1}" for j in range(path.dim)])
        for i in range(path.times.shape[0]):
            writer.writerow([f"{path.times[i]:.17g}"]
                            + [f"{path.values[i, j]:.17g}" for j in range(path.dim)])
    finally:
        if close:
            f.close()


def read_path_csv(fileobj_or_name) -> PiecewiseLinearPath:
    close = False
    f = fileobj_or_name
    if not hasattr(f, "read"):
        f = open(f, "r", newline="", encoding="utf-8")
        close = True
    try:
        reader = csv.reader(f)
        header = next(reader)
        if not header or header[0].strip() != "t":
            raise GridError("path CSV must start with header t,x1,...,xd")
        rows = [[float(c) for c in row] for row in reader if row]
    finally:
        if close:
            f.close()
    data = np.asarray(rows, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] < 2:
        raise GridError("path CSV needs a time column and at least one component")
    return PiecewiseLinearPath(data[:, 0], data[:, 1:])


def write_path_batch_binary(fileobj_or_name, times, values) -> None:
    """RTPATH1 batch file: magic, version, u32 n, u32 d, u32 count, times,
    then per path the component columns contiguously (little-endian f64).
    """
    times = np.asarray(times, dtype="<f8")
    values = np.asarray(values, dtype="<f8")
    if values.ndim == 2:
        values = values[None, :, :]
    count, n, d = values.shape
    if times.shape[0] != n:
        raise GridError("times and values disagree in length")
    close = False
    f = fileobj_or_name
    if not hasattr(f, "write"):
        f = open(f, "wb")
        close = True
    try:
        f.write(_BINARY_MAGIC)
        f.write(struct.pack("<B", _BINARY_VERSION))
        f.write(struct.pack("<III", n, d, count))
        f.write(struct.pack("<I", 0))
        f.write(times.tobytes())
        for k in range(count):
            f.write(np.ascontiguousarray(values[k].T).tobytes())  # columnar per path
    finally:
        if close:
            f.close()


def read_path_batch_binary(fileobj_or_name):
    """Returns (times (n,), values (count, n, d))."""
    close = False
    f = fileobj_or_name
    if not hasattr(f, "read"):
        f = open(f, "rb")
        close = True
    try:
        magic = f.read(7)
        if magic != _BINARY_MAGIC:
            raise GridError(f"bad magic {magic!r}; not an RTPATH1 file")
        (version,) = struct.unpack("<B", f.read(1))
        if version != _BINARY_VERSION:
            raise GridError(f"unsupported RTPATH1 version {version}")
        n, d, count = struct.unpack("<III", f.read(12))
        f.read(4)  # reserved
        times = np.frombuffer(f.read(8 * n), dtype="<f8").copy()
        values = np.empty((count, n, d))
        for k in range(count):
            block = np.frombuffer(f.read(8 * n * d), dtype="<f8").reshape(d, n)
            values[k] = block.T
    finally:
        if close:
            f.close()
    return times, values


def path_to_csv_bytes(path: PiecewiseLinearPath) -> bytes:
    buf = io.StringIO()
    write_path_csv(buf, path)
    return buf.getvalue().encode("utf-8")
