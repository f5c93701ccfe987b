"""Quadratic variation and covariation along a refining partition sequence.

The level-n quadratic variation of a scalar path is the sum of squared
increments over the level-n partition,

    [x]_n(t) = sum_{s in T_n, s <= t} (x(s') - x(s))^2,

clipped in the final cell so that t -> [x]_n(t) is continuous between
partition points.  Whether the level sums settle down as n grows depends on
the path AND on the partition sequence; convergence is therefore always
reported as a diagnostic, never assumed, and nothing below ever raises just
because a path fails to converge.

Off-diagonal entries are never formed from cross products.  They are defined
by polarization,

    [x_i, x_j] = ([x_i + x_j] - [x_i] - [x_j]) / 2,

which keeps every matrix exactly symmetric and consistent with the scalar
sums by construction.

All reductions run in a fixed order (see reduction.py), so repeated runs
produce bit-identical results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import PartitionSequence, SampledPath, _require_same_grid
from .reduction import running_sum
from .stieltjes import StieltjesMeasure


def _scalar_qv_arrays(
    values: np.ndarray, partition: PartitionSequence, level: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-grid-time QV path and per-cell QV increments for one component.

    The increment over a base cell [u, u'] inside the partition cell
    starting at s is (x(u') - x(s))^2 - (x(u) - x(s))^2; summed over a full
    partition cell this telescopes to the squared partition increment.
    """
    idx = partition.indices(level)
    v = values[idx]
    dv = np.diff(v)
    cum = running_sum(dv * dv)
    pos = np.searchsorted(idx, np.arange(values.shape[0]), side="right") - 1
    anchored = values - v[pos]
    path = cum[pos] + anchored * anchored
    increments = anchored[1:] ** 2 - anchored[:-1] ** 2
    # At partition points after the first the anchor changes; the base cell
    # ending there still belongs to the previous anchor.
    boundary = idx[1:]
    prev_anchor = values[boundary] - v[pos[boundary] - 1]
    increments[boundary - 1] = prev_anchor**2 - anchored[boundary - 1] ** 2
    return path, increments


def qv_scalar(
    x: SampledPath,
    partition: PartitionSequence,
    level: int,
    t: float | None = None,
    component: int = 0,
) -> float:
    """Level-n quadratic variation of one component up to grid time t."""
    _require_same_grid(x, partition)
    path, _ = _scalar_qv_arrays(x.values[:, component], partition, level)
    if t is None:
        return float(path[-1])
    return float(path[x.grid_index(t)])


@dataclass(frozen=True, eq=False)
class QVMatrix:
    """Symmetric QV/covariation matrices along the grid at one level.

    ``matrices`` has shape (N, d, d); entry paths are continuous between
    partition points thanks to final-cell clipping, start at zero, and the
    diagonals are nondecreasing along partition points (between them the
    clipped term can dip while the path wanders back toward its anchor).
    When produced by :func:`qv_converged` the per-level diagnostics are
    attached.
    """

    times: np.ndarray
    matrices: np.ndarray
    level: int
    levels: tuple[int, ...] | None = None
    level_diffs: np.ndarray | None = None
    converged: bool | None = None
    tol: float | None = None

    @property
    def d(self) -> int:
        return self.matrices.shape[1]

    def entry_path(self, i: int, j: int) -> np.ndarray:
        return self.matrices[:, i, j]

    def final(self) -> np.ndarray:
        return self.matrices[-1]

    def value(self, t: float) -> np.ndarray:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.matrices[min(max(i, 0), self.times.shape[0] - 1)]


def qv_matrix(
    x: SampledPath, partition: PartitionSequence, level: int
) -> "QVMatrix":
    """Full matrix [x_i, x_j]_n on the grid; off-diagonals by polarization."""
    mats, _ = _qv_matrix_arrays(x, partition, level)
    return QVMatrix(times=x.times, matrices=mats, level=int(level))


def _qv_matrix_arrays(
    x: SampledPath, partition: PartitionSequence, level: int
) -> tuple[np.ndarray, np.ndarray]:
    """(N, d, d) matrix paths and (N-1, d, d) per-cell increment arrays."""
    _require_same_grid(x, partition)
    n, d = x.values.shape
    mats = np.empty((n, d, d), dtype=np.float64)
    incs = np.empty((n - 1, d, d), dtype=np.float64)
    diag_paths = []
    diag_incs = []
    for i in range(d):
        p, inc = _scalar_qv_arrays(x.values[:, i], partition, level)
        diag_paths.append(p)
        diag_incs.append(inc)
        mats[:, i, i] = p
        incs[:, i, i] = inc
    for i in range(d):
        for j in range(i + 1, d):
            p_sum, inc_sum = _scalar_qv_arrays(
                x.values[:, i] + x.values[:, j], partition, level
            )
            off_path = 0.5 * (p_sum - diag_paths[i] - diag_paths[j])
            off_inc = 0.5 * (inc_sum - diag_incs[i] - diag_incs[j])
            mats[:, i, j] = off_path
            mats[:, j, i] = off_path
            incs[:, i, j] = off_inc
            incs[:, j, i] = off_inc
    return mats, incs


def qv_measures(
    x: SampledPath, partition: PartitionSequence, level: int
) -> list[list[StieltjesMeasure]]:
    """Stieltjes measures d[x_i, x_j]_n for every entry, as a d x d table."""
    _, incs = _qv_matrix_arrays(x, partition, level)
    d = incs.shape[1]
    return [
        [StieltjesMeasure(x.times, np.ascontiguousarray(incs[:, i, j])) for j in range(d)]
        for i in range(d)
    ]


def qv_converged(
    x: SampledPath,
    partition: PartitionSequence,
    tol: float = 1e-2,
    levels: tuple[int, ...] | None = None,
) -> QVMatrix:
    """Finest-level QV matrix with cross-level convergence diagnostics.

    Runs the matrix at every requested level (default: all of them, at
    least three) and records the max-over-time, max-over-entry difference
    between consecutive levels.  ``converged`` holds iff the last recorded
    difference is below ``tol`` (an absolute threshold).
    """
    if levels is None:
        levels = tuple(range(1, partition.num_levels + 1))
    levels = tuple(int(n) for n in levels)
    if len(levels) < 3:
        raise ValueError("convergence diagnostics need at least three levels")
    diffs = []
    prev = None
    mats = None
    for n in levels:
        mats, _ = _qv_matrix_arrays(x, partition, n)
        if prev is not None:
            diffs.append(float(np.max(np.abs(mats - prev))))
        prev = mats
    level_diffs = np.asarray(diffs)
    return QVMatrix(
        times=x.times,
        matrices=mats,
        level=levels[-1],
        levels=levels,
        level_diffs=level_diffs,
        converged=bool(level_diffs[-1] < tol),
        tol=float(tol),
    )


__all__ = [
    "QVMatrix",
    "qv_scalar",
    "qv_matrix",
    "qv_measures",
    "qv_converged",
]
