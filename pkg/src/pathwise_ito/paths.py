"""Sampled paths on a finite time grid and refining partition sequences.

Everything downstream works from one data model: a strictly increasing grid
``0 = t_0 < t_1 < ... < t_{N-1} = T`` carrying vector samples.  A path is
read either as a cadlag step function (the value is held from the left grid
point, ``STEP``) or as the continuous piecewise-linear interpolant of its
samples (``LINEAR``).  Containers are immutable; operations return new
objects and never touch shared state, so they are safe to use from worker
threads.

The partition machinery thins the base grid dyadically: level ``n`` of an
``L``-level sequence keeps every ``2**(L-n)``-th grid point plus the final
one, so levels are nested and the finest level is the grid itself.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

STEP = "step"
LINEAR = "linear"
_INTERPOLATIONS = (STEP, LINEAR)

_GRID_RTOL = 1e-12


class DomainError(ValueError):
    """A path value lies outside its configured open domain."""


class GridError(ValueError):
    """Incompatible grids, or a time that is not a grid point."""


class PathFormatError(ValueError):
    """Malformed path CSV input."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned open box used as a path domain.

    Bounds are strict: a value sitting exactly on a face is outside.  Use
    ``-inf`` / ``inf`` for unbounded axes.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def contains(self, values: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        v = np.asarray(values, dtype=np.float64)
        return np.all((v > lo) & (v < hi), axis=-1)


Domain = Union[Box, Callable[[np.ndarray], np.ndarray]]


def positive_orthant(d: int = 1) -> Box:
    return Box(lower=(0.0,) * d, upper=(np.inf,) * d)


def _check_domain(values: np.ndarray, domain: Domain | None) -> None:
    if domain is None:
        return
    if isinstance(domain, Box):
        ok = domain.contains(values)
    else:
        ok = np.asarray(domain(values), dtype=bool)
    ok = np.atleast_1d(ok)
    if not bool(np.all(ok)):
        idx = int(np.argmin(ok))
        raise DomainError(f"path value at grid index {idx} lies outside the domain")


def _validate_grid(times: np.ndarray) -> np.ndarray:
    t = np.ascontiguousarray(np.asarray(times, dtype=np.float64))
    if t.ndim != 1 or t.shape[0] < 2:
        raise GridError("a grid needs at least two time points")
    if t[0] != 0.0:
        raise GridError("the grid must start at time 0")
    if not np.all(np.diff(t) > 0.0):
        raise GridError("grid times must be strictly increasing")
    return t


@dataclass(frozen=True, eq=False)
class SampledPath:
    """A vector-valued path sampled on a fixed grid.

    ``values`` has shape (N, d); a 1-d array is promoted to a single
    component.  If ``domain`` is given, every grid value must lie inside it
    (a violation raises :class:`DomainError` at construction, which is what
    makes one-sided finite differences near a boundary detectable).
    """

    times: np.ndarray
    values: np.ndarray
    interpolation: str = LINEAR
    domain: Domain | None = None

    def __post_init__(self) -> None:
        t = _validate_grid(self.times)
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise GridError("values must be a (N, d) array")
        v = np.ascontiguousarray(v)
        if v.shape[0] != t.shape[0]:
            raise GridError("times and values disagree on the number of grid points")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        if self.interpolation not in _INTERPOLATIONS:
            raise ValueError(f"unknown interpolation tag {self.interpolation!r}")
        self._check_extra(v)
        _check_domain(v, self.domain)
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def _check_extra(self, values: np.ndarray) -> None:
        pass

    @classmethod
    def _trusted(
        cls,
        times: np.ndarray,
        values: np.ndarray,
        interpolation: str,
        domain: Domain | None,
    ) -> "SampledPath":
        # Internal constructor for derived paths whose grid was already
        # validated and whose values are drawn from an accepted path.
        obj = object.__new__(cls)
        values.setflags(write=False)
        object.__setattr__(obj, "times", times)
        object.__setattr__(obj, "values", values)
        object.__setattr__(obj, "interpolation", interpolation)
        object.__setattr__(obj, "domain", domain)
        return obj

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_points(self) -> int:
        return self.times.shape[0]

    def _locate(self, t: float) -> int:
        """Index of the largest grid time <= t."""
        T = self.times[-1]
        if t < 0.0 or t > T:
            if t < 0.0 and t > -_GRID_RTOL * max(1.0, T):
                return 0
            if t > T and t < T * (1.0 + _GRID_RTOL) + _GRID_RTOL:
                return self.n_points - 1
            raise GridError(f"time {t} outside [0, {T}]")
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), self.n_points - 1)

    def value(self, t: float) -> np.ndarray:
        """Path value at any t in [0, T] under the interpolation tag."""
        t = float(t)
        i = self._locate(t)
        if self.interpolation == STEP or t == self.times[i] or i == self.n_points - 1:
            return self.values[i]
        t0, t1 = self.times[i], self.times[i + 1]
        w = (t - t0) / (t1 - t0)
        # lerp via the increment so constant cells reproduce their value bitwise
        return self.values[i] + w * (self.values[i + 1] - self.values[i])

    def left_limit(self, t: float) -> np.ndarray:
        """Limit from the left at t > 0 (equals value(t) for LINEAR paths)."""
        t = float(t)
        if t <= 0.0:
            raise GridError("left limits need t > 0")
        if self.interpolation == LINEAR:
            return self.value(t)
        i = int(np.searchsorted(self.times, t, side="left")) - 1
        return self.values[min(max(i, 0), self.n_points - 1)]

    def grid_index(self, t: float) -> int:
        """Index of grid time t; raises GridError if t is not on the grid."""
        t = float(t)
        i = self._locate(t)
        scale = max(1.0, abs(self.times[-1]))
        for j in (i, min(i + 1, self.n_points - 1)):
            if abs(self.times[j] - t) <= _GRID_RTOL * scale:
                return j
        raise GridError(f"time {t} is not a grid point")

    def component(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def with_values(self, values: np.ndarray) -> "SampledPath":
        """Same grid, tag and domain with new samples (domain re-checked)."""
        return type(self)(self.times, values, self.interpolation, self.domain)

    def scalar(self, t: float) -> float:
        if self.d != 1:
            raise ValueError("scalar() needs a one-component path")
        return float(self.value(t)[0])

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"{type(self).__name__}(n={self.n_points}, d={self.d}, "
            f"T={self.horizon:g}, {self.interpolation})"
        )


@dataclass(frozen=True, eq=False)
class BVPath(SampledPath):
    """Piecewise-linear extra components of bounded variation.

    Holds the m user components A_1..A_m; the running clock A_0(t) = t is
    implicit and supplied by consumers that need it.  m = 0 is allowed and
    stands for "no extra components".
    """

    interpolation: str = LINEAR

    def _check_extra(self, values: np.ndarray) -> None:
        if self.interpolation != LINEAR:
            raise ValueError("BV components are piecewise linear by construction")

    @property
    def m(self) -> int:
        return self.d

    @classmethod
    def empty(cls, times: np.ndarray) -> "BVPath":
        times = _validate_grid(np.asarray(times, dtype=np.float64))
        return cls._trusted(times, np.zeros((times.shape[0], 0)), LINEAR, None)

    def slice_components(self, lo: int, hi: int) -> "BVPath":
        if not (0 <= lo <= hi <= self.m):
            raise ValueError("component slice out of range")
        return BVPath._trusted(self.times, self.values[:, lo:hi], LINEAR, self.domain)

    def component_total_variation(self, i: int) -> float:
        return float(np.sum(np.abs(np.diff(self.values[:, i]))))


def concat_components(a: BVPath, b: BVPath | None) -> BVPath:
    """Positional concatenation of extra components on a shared grid."""
    if b is None or b.m == 0:
        return a
    if a.m == 0:
        return b
    _require_same_grid(a, b)
    vals = np.ascontiguousarray(np.hstack([a.values, b.values]))
    return BVPath._trusted(a.times, vals, LINEAR, None)


def append_components(a: BVPath, new_values: np.ndarray) -> BVPath:
    new_values = np.asarray(new_values, dtype=np.float64)
    if new_values.ndim == 1:
        new_values = new_values[:, None]
    if new_values.shape[0] != a.n_points:
        raise GridError("new components must live on the same grid")
    vals = np.ascontiguousarray(np.hstack([a.values, new_values]))
    return BVPath._trusted(a.times, vals, LINEAR, None)


def _require_same_grid(p, q) -> None:
    if p.times is q.times:
        return
    if p.times.shape != q.times.shape or not np.array_equal(p.times, q.times):
        raise GridError("paths live on different grids")


# ---------------------------------------------------------------------------
# Refining partitions


@dataclass(frozen=True, eq=False)
class PartitionSequence:
    """Dyadic thinning of a base grid into nested partition levels.

    Level ``num_levels`` is the base grid; level ``n`` keeps base indices
    ``0, k, 2k, ...`` with ``k = 2**(num_levels - n)`` plus the final index,
    so every level contains 0 and T and coarser levels are subsets of finer
    ones.  When the stride exceeds the grid, a level degrades to {0, T}.
    """

    times: np.ndarray
    num_levels: int

    def __post_init__(self) -> None:
        t = _validate_grid(self.times)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        if int(self.num_levels) < 1:
            raise ValueError("need at least one partition level")
        object.__setattr__(self, "num_levels", int(self.num_levels))

    @classmethod
    def for_path(cls, path: SampledPath, num_levels: int) -> "PartitionSequence":
        return cls(path.times, num_levels)

    def _check_level(self, level: int) -> int:
        level = int(level)
        if not 1 <= level <= self.num_levels:
            raise ValueError(f"level must lie in [1, {self.num_levels}]")
        return level

    def stride(self, level: int) -> int:
        return 2 ** (self.num_levels - self._check_level(level))

    def indices(self, level: int) -> np.ndarray:
        """Base-grid indices of the level's partition points."""
        n = self.times.shape[0]
        k = self.stride(level)
        idx = np.arange(0, n - 1, k, dtype=np.intp)
        return np.append(idx, n - 1)

    def points(self, level: int) -> np.ndarray:
        return self.times[self.indices(level)]

    def num_cells(self, level: int) -> int:
        return self.indices(level).shape[0] - 1

    def mesh(self, level: int) -> float:
        return float(np.max(np.diff(self.points(level))))

    def contains(self, level: int, t: float) -> bool:
        pts = self.points(level)
        i = int(np.searchsorted(pts, t))
        scale = max(1.0, abs(self.times[-1]))
        for j in (i - 1, i, i + 1):
            if 0 <= j < pts.shape[0] and abs(pts[j] - t) <= _GRID_RTOL * scale:
                return True
        return False

    def successor(self, level: int, t: float) -> float:
        """Next partition point strictly after t; T maps to itself."""
        pts = self.points(level)
        T = float(pts[-1])
        if t >= T:
            return T
        i = int(np.searchsorted(pts, t, side="right"))
        return float(pts[i])


# ---------------------------------------------------------------------------
# Path operations


def stop(path: SampledPath, t: float) -> SampledPath:
    """Freeze the path at time t: unchanged on [0, t], constant after.

    The result lives on the same grid.  For a LINEAR path and a t between
    grid points the frozen value is the interpolated one; the kink at t then
    sits inside a grid cell, so the returned samples are exact but linear
    interpolation across that one cell smooths the kink.  At grid times the
    operation is exact everywhere (and idempotent).
    """
    T = path.horizon
    if t < 0.0 or t > T * (1.0 + _GRID_RTOL) + _GRID_RTOL:
        raise DomainError(f"stopping time {t} outside [0, {T}]")
    frozen = path.value(t)
    mask = path.times <= t
    vals = np.where(mask[:, None], path.values, frozen[None, :])
    return type(path)._trusted(path.times, vals, path.interpolation, path.domain)


def _stepped_values(path: SampledPath, partition: PartitionSequence, level: int) -> np.ndarray:
    _require_same_grid(path, partition)
    idx = partition.indices(level)
    n = path.n_points
    pos = np.searchsorted(idx, np.arange(n), side="right") - 1
    succ = idx[np.minimum(pos + 1, idx.shape[0] - 1)]
    vals = path.values[succ].copy()
    vals[-1] = path.values[-1]
    return vals


def stepped_approx(path: SampledPath, partition: PartitionSequence, level: int) -> SampledPath:
    """Level-n step approximation: on [s, s') the value is X(s').

    Takes a continuous path and returns a STEP path on the same grid whose
    value at T is X(T).  Note the look-ahead: between partition points the
    step path already shows the value at the cell's right endpoint.
    """
    if path.interpolation != LINEAR:
        raise ValueError("stepped_approx expects a continuous (LINEAR) path")
    vals = _stepped_values(path, partition, level)
    return type(path)._trusted(path.times, vals, STEP, path.domain)


def pre_step(
    path: SampledPath, partition: PartitionSequence, level: int, s: float
) -> SampledPath:
    """Left limit of the stopped step approximation at partition point s.

    Equals the level-n step path on [0, s) and is frozen at X(s) from s on.
    ``s`` must be a level-n partition point.
    """
    if not partition.contains(level, s):
        raise GridError(f"{s} is not a level-{level} partition point")
    j = path.grid_index(s)
    stepped = _stepped_values(path, partition, level)
    return _pre_step_from_arrays(path, stepped, j)


def _pre_step_from_arrays(
    path: SampledPath, stepped_values: np.ndarray, j: int
) -> SampledPath:
    mask = np.arange(path.n_points) < j
    vals = np.where(mask[:, None], stepped_values, path.values[j][None, :])
    return type(path)._trusted(path.times, vals, STEP, path.domain)


def sup_distance(p: SampledPath, q: SampledPath) -> float:
    """Sup distance over the grid, sampling left limits for mixed tags.

    For two STEP or two LINEAR paths the grid values already realise the
    supremum over [0, T].  When the tags differ, the largest gap can sit at
    a left limit just before a jump, so those are sampled as well.
    """
    _require_same_grid(p, q)
    if p.d != q.d:
        raise GridError("paths have different dimensions")
    gaps = np.linalg.norm(p.values - q.values, axis=1)
    best = float(np.max(gaps))
    if p.interpolation != q.interpolation:
        pl = p.values[:-1] if p.interpolation == STEP else p.values[1:]
        ql = q.values[:-1] if q.interpolation == STEP else q.values[1:]
        best = max(best, float(np.max(np.linalg.norm(pl - ql, axis=1))))
    return best


# ---------------------------------------------------------------------------
# CSV I/O
#
# Path files are plain CSV with a header ``t,x1,...,xd`` (or ``a1..am`` for
# extra components); numbers are written with 17 significant digits so a
# round trip reproduces every float bit for bit.


def _format(x: float) -> str:
    return f"{float(x):.17g}"


def write_path_csv(path: SampledPath, dest, prefix: str = "x") -> None:
    close = False
    if not hasattr(dest, "write"):
        dest = open(dest, "w", newline="")
        close = True
    try:
        writer = csv.writer(dest)
        writer.writerow(["t"] + [f"{prefix}{i + 1}" for i in range(path.d)])
        for i in range(path.n_points):
            writer.writerow(
                [_format(path.times[i])] + [_format(v) for v in path.values[i]]
            )
    finally:
        if close:
            dest.close()


def read_path_table(src) -> tuple[np.ndarray, np.ndarray, list[str]]:
    close = False
    if not hasattr(src, "read"):
        src = open(src, "r", newline="")
        close = True
    try:
        reader = csv.reader(src)
        try:
            header = next(reader)
        except StopIteration:
            raise PathFormatError("empty path file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "t":
            raise PathFormatError("first CSV column must be 't'")
        width = len(header)
        times: list[float] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise PathFormatError(f"line {lineno}: expected {width} columns")
            try:
                nums = [float(c) for c in row]
            except ValueError as exc:
                raise PathFormatError(f"line {lineno}: {exc}") from None
            times.append(nums[0])
            rows.append(nums[1:])
        if len(times) < 2:
            raise PathFormatError("a path file needs at least two samples")
        return np.asarray(times), np.asarray(rows), header[1:]
    finally:
        if close:
            src.close()


def load_sampled_path(
    src, interpolation: str = LINEAR, domain: Domain | None = None
) -> SampledPath:
    times, values, _ = read_path_table(src)
    try:
        return SampledPath(times, values, interpolation, domain)
    except GridError as exc:
        raise PathFormatError(str(exc)) from None


def load_bv_path(src) -> BVPath:
    times, values, _ = read_path_table(src)
    try:
        return BVPath(times, values)
    except GridError as exc:
        raise PathFormatError(str(exc)) from None


def path_to_csv_text(path: SampledPath, prefix: str = "x") -> str:
    buf = io.StringIO()
    write_path_csv(path, buf, prefix=prefix)
    return buf.getvalue()


def default_output_dir() -> str:
    """Directory used for relative output paths (env override)."""
    return os.environ.get("PATHWISE_ITO_OUT_DIR", ".")
