"""Pathwise Ito integrals along refining partitions and identities built on them.

The level-n integral of a functional integrand xi = grad_X F(., ., A) is the
Riemann-type sum over completed level-n cells,

    I_n(t) = sum over cells [s, s') with s' <= t of
             xi(s, pre_step(X, n, s)) . (X(s') - X(s)),

where the pre-step path agrees with the level-n stepped approximation before
s and is frozen at X(s) from s on.  Summing completed cells keeps I_n(0) = 0
and makes constant integrands telescope exactly at every partition point; at
t = T it agrees with the sum over all partition points because the final
look-ahead increment is empty.  Between partition points the reported path
is linear interpolation and flagged as such.

On top of the integral sit the full change-of-variables decomposition, the
quadratic-variation identity for vector integrals, the augmented-system
construction that turns integral paths back into functional values, and the
associativity verifier comparing integration against Y with integration
against X under a composed integrand.  All sums run in a fixed order, so
reports are bit-reproducible across runs and thread counts.

Derivative evaluations fall back to finite differences per functional; for
large grids supply analytic derivatives, otherwise each of the N sample
evaluations costs another O(N) path rebuild.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .functionals import Functional, compose
from .paths import (
    BVPath,
    GridError,
    LINEAR,
    PartitionSequence,
    SampledPath,
    _pre_step_from_arrays,
    _require_same_grid,
    _stepped_values,
    concat_components,
)
from .qv import qv_converged, qv_matrix, qv_measures
from .reduction import map_chunked, running_sum
from .stieltjes import cumulative_stieltjes, measures_with_clock

_TINY = 1e-30


class HypothesisError(RuntimeError):
    """A numerically checked hypothesis of an identity failed its gate."""

    def __init__(self, message: str, residual: float, tol: float) -> None:
        super().__init__(message)
        self.residual = residual
        self.tol = tol


@dataclass(frozen=True, eq=False)
class AdmissibleIntegrand:
    """An integrand xi(t, X) = grad_X F(t, X, A) packaged with its data.

    ``bv`` is the component path A bound into F; it must carry exactly the
    components F expects, and must be None exactly when F expects none.
    """

    functional: Functional
    bv: BVPath | None = None

    def __post_init__(self) -> None:
        got = 0 if self.bv is None else self.bv.m
        if got != self.functional.m:
            raise ValueError(
                f"integrand data has {got} components, functional wants {self.functional.m}"
            )

    @property
    def d(self) -> int:
        return self.functional.d

    def xi(self, t: float, x) -> np.ndarray:
        """The integrand vector at (t, x)."""
        return self.functional.vertical(t, x, self.bv)


def _level_list(partition: PartitionSequence, levels) -> tuple[int, ...]:
    if levels is None:
        return tuple(range(1, partition.num_levels + 1))
    if isinstance(levels, (int, np.integer)):
        return (int(levels),)
    out = tuple(int(n) for n in levels)
    if not out:
        raise ValueError("need at least one level")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("levels must be strictly increasing")
    return out


@dataclass(frozen=True, eq=False)
class IntegralResult:
    """Per-level integral paths on the base grid plus Cauchy diagnostics.

    ``values[k]`` holds I_n for ``levels[k]`` at every base grid time;
    entries marked in ``interpolated`` sit between that level's partition
    points and are linear interpolation, not Riemann sums.  ``converged``
    is None when a single level leaves nothing to compare.
    """

    times: np.ndarray
    levels: tuple[int, ...]
    values: np.ndarray
    interpolated: np.ndarray
    cauchy_diffs: np.ndarray
    converged: bool | None
    tol: float
    plain_riemann: bool

    @property
    def final(self) -> np.ndarray:
        """The finest-level integral path."""
        return self.values[-1]

    def at(self, t: float, level: int | None = None) -> float:
        row = -1 if level is None else self.levels.index(level)
        scale = max(1.0, abs(float(self.times[-1])))
        i = int(np.searchsorted(self.times, t - 1e-12 * scale))
        if i >= self.times.shape[0] or abs(float(self.times[i]) - t) > 1e-12 * scale:
            raise GridError(f"{t} is not a grid time")
        return float(self.values[row, i])


def ito_integral(
    xi: AdmissibleIntegrand,
    x: SampledPath,
    partition: PartitionSequence,
    levels: Sequence[int] | int | None = None,
    tol: float = 1e-3,
    threads: int = 1,
    plain_riemann: bool = False,
) -> IntegralResult:
    """Level-n Riemann sums of xi against X for each requested level.

    ``plain_riemann`` evaluates xi on the original path instead of the
    pre-step approximations; that variant is a diagnostic for comparing
    the two summation conventions, not the integral this module defines.
    Convergence is a Cauchy check: the last cross-level difference must
    stay below tol relative to the finest level's sup norm.
    """
    _require_same_grid(x, partition)
    if x.interpolation != LINEAR:
        raise ValueError("the integrator path must be continuous (LINEAR)")
    if xi.functional.d != x.d:
        raise ValueError("integrand and path dimensions differ")
    if xi.bv is not None:
        _require_same_grid(x, xi.bv)
    lv = _level_list(partition, levels)
    n_pts = x.n_points
    values = np.empty((len(lv), n_pts))
    interp = np.zeros((len(lv), n_pts), dtype=bool)
    for row, n in enumerate(lv):
        idx = partition.indices(n)
        pts = x.times[idx]
        dx = x.values[idx[1:]] - x.values[idx[:-1]]
        terms = np.empty(idx.shape[0] - 1)
        if plain_riemann:
            def fill(lo, hi, out):
                for j in range(lo, hi):
                    out[j] = float(np.dot(xi.xi(float(pts[j]), x), dx[j]))
        else:
            stepped = _stepped_values(x, partition, n)
            def fill(lo, hi, out):
                for j in range(lo, hi):
                    pre = _pre_step_from_arrays(x, stepped, int(idx[j]))
                    out[j] = float(np.dot(xi.xi(float(pts[j]), pre), dx[j]))
        map_chunked(fill, terms, threads=threads)
        at_points = running_sum(terms)
        values[row] = np.interp(x.times, pts, at_points)
        values[row, idx] = at_points
        interp[row] = True
        interp[row, idx] = False
    diffs = (
        np.max(np.abs(np.diff(values, axis=0)), axis=1)
        if len(lv) > 1
        else np.zeros(0)
    )
    converged: bool | None = None
    if diffs.shape[0]:
        scale = max(float(np.max(np.abs(values[-1]))), _TINY)
        converged = bool(diffs[-1] <= tol * scale)
    for arr in (values, interp, diffs):
        arr.setflags(write=False)
    return IntegralResult(
        times=x.times,
        levels=lv,
        values=values,
        interpolated=interp,
        cauchy_diffs=diffs,
        converged=converged,
        tol=float(tol),
        plain_riemann=bool(plain_riemann),
    )


# ---------------------------------------------------------------------------
# Change-of-variables decomposition


def _sampled_horizontal(F: Functional, x: SampledPath, a: BVPath | None) -> np.ndarray:
    out = np.empty((x.n_points, F.m + 1))
    for k, t in enumerate(x.times):
        out[k] = F.horizontal(float(t), x, a)
    return out


def _sampled_vertical(F: Functional, x: SampledPath, a: BVPath | None) -> np.ndarray:
    out = np.empty((x.n_points, F.d))
    for k, t in enumerate(x.times):
        out[k] = F.vertical(float(t), x, a)
    return out


def _sampled_vertical2(F: Functional, x: SampledPath, a: BVPath | None) -> np.ndarray:
    out = np.empty((x.n_points, F.d, F.d))
    for k, t in enumerate(x.times):
        out[k] = F.vertical2(float(t), x, a)
    return out


def _horizontal_path(F: Functional, x: SampledPath, a: BVPath | None, weights=None) -> np.ndarray:
    """Cumulative sum_i integral of D_i F dA_i including the clock dA_0."""
    hv = _sampled_horizontal(F, x, a)
    if weights is not None:
        hv = hv * weights[:, None]
    measures = measures_with_clock(a if a is not None else BVPath.empty(x.times))
    acc = np.zeros(x.n_points)
    for i, mu in enumerate(measures):
        acc += cumulative_stieltjes(hv[:, i], mu)
    return acc


def _qv_term_path(v2: np.ndarray, measures, weights=None) -> np.ndarray:
    """Cumulative (1/2) sum_ij integral of given second verticals d[X_i, X_j]."""
    n, d = v2.shape[0], v2.shape[1]
    acc = np.zeros(n)
    for i in range(d):
        for j in range(d):
            f = v2[:, i, j] if weights is None else v2[:, i, j] * weights
            acc += cumulative_stieltjes(f, measures[i][j])
    return 0.5 * acc


@dataclass(frozen=True, eq=False)
class FormulaReport:
    """Per-level terms of the change-of-variables decomposition at T.

    residuals[k] = lhs - (ito_at_T[k] + horizontal_at_T + qv_at_T[k]);
    the horizontal Stieltjes term is level-independent because it runs on
    the base grid, while the integral and QV terms depend on the level.
    """

    levels: tuple[int, ...]
    lhs: float
    ito_at_T: np.ndarray
    horizontal_at_T: float
    qv_at_T: np.ndarray
    residuals: np.ndarray
    integral: IntegralResult
    qv_level_diffs: np.ndarray | None
    qv_ok: bool | None


def ito_formula_report(
    F: Functional,
    x: SampledPath,
    a: BVPath | None,
    partition: PartitionSequence,
    levels: Sequence[int] | int | None = None,
    tol: float = 1e-3,
    qv_tol: float = 1e-2,
    threads: int = 1,
) -> FormulaReport:
    """Evaluate all four terms of the decomposition and their residuals.

    QV convergence diagnostics ride along whenever the partition has the
    three levels the check needs; non-convergence is reported, not raised.
    """
    lv = _level_list(partition, levels)
    T = float(x.times[-1])
    lhs = F.evaluate(T, x, a) - F.evaluate(0.0, x, a)
    integral = ito_integral(AdmissibleIntegrand(F, a), x, partition, lv, tol, threads)
    ito_at_T = integral.values[:, -1].copy()
    horiz = _horizontal_path(F, x, a)
    v2 = _sampled_vertical2(F, x, a)
    qv_at_T = np.empty(len(lv))
    for row, n in enumerate(lv):
        qv_at_T[row] = _qv_term_path(v2, qv_measures(x, partition, n))[-1]
    residuals = lhs - (ito_at_T + horiz[-1] + qv_at_T)
    qv_diffs = qv_ok = None
    if partition.num_levels >= 3:
        qv_rep = qv_converged(x, partition, tol=qv_tol)
        qv_diffs = qv_rep.level_diffs
        qv_ok = qv_rep.converged
    for arr in (ito_at_T, qv_at_T, residuals):
        arr.setflags(write=False)
    return FormulaReport(
        levels=lv,
        lhs=float(lhs),
        ito_at_T=ito_at_T,
        horizontal_at_T=float(horiz[-1]),
        qv_at_T=qv_at_T,
        residuals=residuals,
        integral=integral,
        qv_level_diffs=qv_diffs,
        qv_ok=qv_ok,
    )


# ---------------------------------------------------------------------------
# Vector integrals and their quadratic variation


def build_Y(
    xis: Sequence[AdmissibleIntegrand],
    x: SampledPath,
    partition: PartitionSequence,
    levels: Sequence[int] | int | None = None,
    threads: int = 1,
) -> SampledPath:
    """Integral paths Y_l(t) = integral of xi_(l) dX as one continuous path.

    Uses the finest requested level for the values; Y(0) = 0 always.
    """
    xis = list(xis)
    if not xis:
        raise ValueError("need at least one integrand")
    cols = [
        ito_integral(xi, x, partition, levels, threads=threads).final for xi in xis
    ]
    return SampledPath(x.times, np.column_stack(cols), LINEAR)


@dataclass(frozen=True, eq=False)
class QvIdentityReport:
    """Direct [Y] against the integrand-weighted [X] at one level.

    ``residuals[k, l]`` is the max over grid times of the absolute entry
    difference; ``relative`` divides the worst residual by the largest
    final [Y] entry, the scale the associativity gate compares against.
    """

    level: int
    residuals: np.ndarray
    relative: float
    direct_final: np.ndarray
    weighted_final: np.ndarray


def _xi_samples(xis: Sequence[AdmissibleIntegrand], x: SampledPath) -> np.ndarray:
    sam = np.empty((len(xis), x.n_points, x.d))
    for row, xi in enumerate(xis):
        sam[row] = _sampled_vertical(xi.functional, x, xi.bv)
    return sam


def _weighted_qv_paths(
    sam: np.ndarray, x: SampledPath, partition: PartitionSequence, level: int
) -> np.ndarray:
    """Paths t -> sum_kl integral of xi_(i),k xi_(j),l d[X_k, X_l] for all (i, j)."""
    nu, n_pts, d = sam.shape
    measures = qv_measures(x, partition, level)
    out = np.zeros((n_pts, nu, nu))
    for i in range(nu):
        for j in range(i, nu):
            acc = np.zeros(n_pts)
            for k in range(d):
                for l in range(d):
                    acc += cumulative_stieltjes(sam[i, :, k] * sam[j, :, l], measures[k][l])
            out[:, i, j] = acc
            out[:, j, i] = acc
    return out


def qv_of_Y_check(
    xis: Sequence[AdmissibleIntegrand],
    x: SampledPath,
    partition: PartitionSequence,
    level: int,
    threads: int = 1,
) -> QvIdentityReport:
    """Compare qv_matrix of the built Y against the weighted [X] integrals.

    The weights sample each integrand along the true path X.  The identity
    is the standing hypothesis of the associativity statement, so its
    residual gates that check.
    """
    xis = list(xis)
    y = build_Y(xis, x, partition, level, threads=threads)
    direct = qv_matrix(y, partition, level)
    weighted = _weighted_qv_paths(_xi_samples(xis, x), x, partition, level)
    residuals = np.max(np.abs(direct.matrices - weighted), axis=0)
    scale = max(float(np.max(np.abs(direct.final()))), _TINY)
    residuals.setflags(write=False)
    return QvIdentityReport(
        level=int(level),
        residuals=residuals,
        relative=float(np.max(residuals) / scale),
        direct_final=direct.final(),
        weighted_final=weighted[-1],
    )


# ---------------------------------------------------------------------------
# Augmentation: turning integral paths back into functional values


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """Extended data (A, A_new) and recentered functionals representing Y.

    Each recentered functional reads its own appended component from the
    passed path data, so its horizontal derivative in that direction is
    the constant -1 by construction, not by sampling.
    """

    functionals: tuple[Functional, ...]
    bv: BVPath
    constants: np.ndarray
    base_m: int
    level: int

    @property
    def nu(self) -> int:
        return len(self.functionals)

    def representation_path(self, x: SampledPath) -> SampledPath:
        """Y via the recentered functionals on the extended data."""
        vals = np.empty((x.n_points, self.nu))
        for k, t in enumerate(x.times):
            for ell, F in enumerate(self.functionals):
                vals[k, ell] = F.evaluate(float(t), x, self.bv)
        return SampledPath(x.times, vals, LINEAR)


def _augmented_functional(F: Functional, ell: int, m: int, nu: int, c: float) -> Functional:
    def _inner(ab):
        return ab.slice_components(0, m) if m else None

    def _eval(t, x2, ab):
        return F.evaluate(t, x2, _inner(ab)) - c - float(ab.value(t)[m + ell])

    def _horizontal(t, x2, ab):
        out = np.zeros(m + nu + 1)
        out[: m + 1] = F.horizontal(t, x2, _inner(ab))
        out[m + 1 + ell] = -1.0
        return out

    return Functional(
        evaluate=_eval,
        d=F.d,
        m=m + nu,
        vertical=lambda t, x2, ab: F.vertical(t, x2, _inner(ab)),
        vertical2=lambda t, x2, ab: F.vertical2(t, x2, _inner(ab)),
        horizontal=_horizontal,
        x_domain=F.x_domain,
        name=f"{F.name} recentered",
    )


def augment(
    f_vec: Sequence[Functional],
    x: SampledPath,
    a: BVPath | None,
    partition: PartitionSequence,
    level: int,
    threads: int = 1,
) -> AugmentedSystem:
    """Append the compensator components and recenter the functionals.

    The new component for each functional accumulates its horizontal
    Stieltjes terms and half the second-vertical QV terms at the given
    level; subtracting it and the frozen time-zero value leaves exactly
    the integral part, so the recentered functional represents Y.
    """
    f_vec = list(f_vec)
    if not f_vec:
        raise ValueError("need at least one functional")
    m = f_vec[0].m
    if any(F.m != m or F.d != x.d for F in f_vec):
        raise ValueError("functionals must share the path dimension and component count")
    got = 0 if a is None else a.m
    if got != m:
        raise ValueError(f"component path carries {got} columns, functionals want {m}")
    measures = qv_measures(x, partition, level)
    cols = np.empty((x.n_points, len(f_vec)))
    for ell, F in enumerate(f_vec):
        cols[:, ell] = _horizontal_path(F, x, a) + _qv_term_path(
            _sampled_vertical2(F, x, a), measures
        )
    base = a if a is not None else BVPath.empty(x.times)
    a_tilde = concat_components(base, BVPath(x.times, cols))
    constants = np.array([F.evaluate(0.0, x, a) for F in f_vec])
    functionals = tuple(
        _augmented_functional(F, ell, m, len(f_vec), float(constants[ell]))
        for ell, F in enumerate(f_vec)
    )
    constants.setflags(write=False)
    return AugmentedSystem(
        functionals=functionals,
        bv=a_tilde,
        constants=constants,
        base_m=m,
        level=int(level),
    )


# ---------------------------------------------------------------------------
# Associativity


def _shared_component_path(xis: Sequence[AdmissibleIntegrand]) -> BVPath | None:
    a = xis[0].bv
    for xi in xis[1:]:
        same = (xi.bv is a) or (
            xi.bv is not None
            and a is not None
            and np.array_equal(xi.bv.times, a.times)
            and np.array_equal(xi.bv.values, a.values)
        )
        if not same:
            raise ValueError("all integrands must share one component path")
    return a


@dataclass(frozen=True, eq=False)
class AssocReport:
    """Both sides of the associativity identity per level.

    ``ratios[k]`` is residual[k] / residual[k+1] at T (> 1 means decay);
    ``max_residuals`` takes the worst gap over all base grid times, where
    both sides are interpolated between their partition points.
    """

    levels: tuple[int, ...]
    lhs_at_T: np.ndarray
    rhs_at_T: np.ndarray
    residuals_at_T: np.ndarray
    max_residuals: np.ndarray
    ratios: np.ndarray
    qv_report: QvIdentityReport
    lhs: IntegralResult
    rhs: IntegralResult


def _residual_ratios(residuals: np.ndarray) -> np.ndarray:
    prev, cur = residuals[:-1], residuals[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(cur > 0.0, prev / np.where(cur > 0.0, cur, 1.0), np.inf)
    return out


def associativity_check(
    eta: AdmissibleIntegrand,
    xis: Sequence[AdmissibleIntegrand],
    x: SampledPath,
    partition: PartitionSequence,
    levels: Sequence[int] | int | None = None,
    tol: float = 1e-3,
    qv_gate_tol: float = 5e-2,
    threads: int = 1,
) -> AssocReport:
    """Integrating eta against Y versus the composed integrand against X.

    Y is built at the finest requested level; so are the extended data and
    the recentered functionals that express Y as a functional of X.  The
    check first verifies the quadratic-variation identity for Y and stops
    with HypothesisError when its relative residual exceeds the gate: the
    identity under test presupposes it.
    """
    xis = list(xis)
    lv = _level_list(partition, levels)
    finest = lv[-1]
    if eta.functional.d != len(xis):
        raise ValueError("eta must drive exactly one component per integrand")
    a = _shared_component_path(xis)
    gate = qv_of_Y_check(xis, x, partition, finest, threads=threads)
    if gate.relative > qv_gate_tol:
        raise HypothesisError(
            "quadratic-variation identity for Y fails its gate: "
            f"relative residual {gate.relative:.3e} > {qv_gate_tol:.3e}; "
            "the associativity identity presupposes it",
            residual=gate.relative,
            tol=qv_gate_tol,
        )
    aug = augment([xi.functional for xi in xis], x, a, partition, finest, threads=threads)
    y = build_Y(xis, x, partition, finest, threads=threads)
    H = compose(eta.functional, aug.functionals)
    zeta = AdmissibleIntegrand(H, concat_components(aug.bv, eta.bv))
    lhs = ito_integral(eta, y, partition, lv, tol, threads)
    rhs = ito_integral(zeta, x, partition, lv, tol, threads)
    lhs_T = lhs.values[:, -1].copy()
    rhs_T = rhs.values[:, -1].copy()
    residuals = np.abs(lhs_T - rhs_T)
    max_res = np.max(np.abs(lhs.values - rhs.values), axis=1)
    ratios = _residual_ratios(residuals)
    for arr in (lhs_T, rhs_T, residuals, max_res, ratios):
        arr.setflags(write=False)
    return AssocReport(
        levels=lv,
        lhs_at_T=lhs_T,
        rhs_at_T=rhs_T,
        residuals_at_T=residuals,
        max_residuals=max_res,
        ratios=ratios,
        qv_report=gate,
        lhs=lhs,
        rhs=rhs,
    )


# ---------------------------------------------------------------------------
# The corollary: integrating against Y(t) = F(t, X, A) directly


@dataclass(frozen=True, eq=False)
class CorollaryReport:
    """The three-term decomposition of an integral against Y = F(., X, A).

    residuals[k] = lhs_at_T[k] - (ito_at_T[k] + horizontal_at_T + qv_at_T[k]).
    """

    levels: tuple[int, ...]
    lhs_at_T: np.ndarray
    ito_at_T: np.ndarray
    horizontal_at_T: float
    qv_at_T: np.ndarray
    residuals: np.ndarray
    ratios: np.ndarray
    qv_relative: float


def corollary_decomposition(
    eta: AdmissibleIntegrand,
    f_vec: Sequence[Functional],
    x: SampledPath,
    a: BVPath | None,
    partition: PartitionSequence,
    levels: Sequence[int] | int | None = None,
    tol: float = 1e-3,
    qv_gate_tol: float = 5e-2,
    threads: int = 1,
) -> CorollaryReport:
    """Integral of eta against Y(t) = F(t, X, A) via terms in X.

    The right-hand side integrates the composed integrand against X and
    adds eta-weighted horizontal and second-vertical QV corrections, the
    latter with the level's own measures.  The same quadratic-variation
    hypothesis as in the associativity check gates the comparison, with Y
    evaluated directly rather than built from integrals.
    """
    f_vec = list(f_vec)
    lv = _level_list(partition, levels)
    finest = lv[-1]
    if eta.functional.d != len(f_vec):
        raise ValueError("eta must drive exactly one component per functional")
    yv = np.empty((x.n_points, len(f_vec)))
    for k, t in enumerate(x.times):
        for ell, F in enumerate(f_vec):
            yv[k, ell] = F.evaluate(float(t), x, a)
    y = SampledPath(x.times, yv, LINEAR)
    sam = np.empty((len(f_vec), x.n_points, x.d))
    for ell, F in enumerate(f_vec):
        sam[ell] = _sampled_vertical(F, x, a)
    direct = qv_matrix(y, partition, finest)
    weighted = _weighted_qv_paths(sam, x, partition, finest)
    scale = max(float(np.max(np.abs(direct.final()))), _TINY)
    qv_relative = float(np.max(np.abs(direct.matrices - weighted)) / scale)
    if qv_relative > qv_gate_tol:
        raise HypothesisError(
            "quadratic-variation hypothesis for Y = F(., X, A) fails its gate: "
            f"relative residual {qv_relative:.3e} > {qv_gate_tol:.3e}",
            residual=qv_relative,
            tol=qv_gate_tol,
        )
    eta_samples = _sampled_vertical(eta.functional, y, eta.bv)
    horiz = np.zeros(x.n_points)
    for ell, F in enumerate(f_vec):
        horiz += _horizontal_path(F, x, a, weights=eta_samples[:, ell])
    H = compose(eta.functional, f_vec, b=eta.bv)
    zeta = AdmissibleIntegrand(
        H, concat_components(a if a is not None else BVPath.empty(x.times), eta.bv)
    )
    lhs_T = ito_integral(eta, y, partition, lv, tol, threads).values[:, -1].copy()
    ito_T = ito_integral(zeta, x, partition, lv, tol, threads).values[:, -1].copy()
    qv_T = np.empty(len(lv))
    v2 = [_sampled_vertical2(F, x, a) for F in f_vec]
    for row, n in enumerate(lv):
        measures = qv_measures(x, partition, n)
        total = 0.0
        for ell in range(len(f_vec)):
            total += _qv_term_path(v2[ell], measures, weights=eta_samples[:, ell])[-1]
        qv_T[row] = total
    residuals = np.abs(lhs_T - (ito_T + horiz[-1] + qv_T))
    ratios = _residual_ratios(residuals)
    for arr in (lhs_T, ito_T, qv_T, residuals, ratios):
        arr.setflags(write=False)
    return CorollaryReport(
        levels=lv,
        lhs_at_T=lhs_T,
        ito_at_T=ito_T,
        horizontal_at_T=float(horiz[-1]),
        qv_at_T=qv_T,
        residuals=residuals,
        ratios=ratios,
        qv_relative=qv_relative,
    )


__all__ = [
    "AdmissibleIntegrand",
    "AssocReport",
    "AugmentedSystem",
    "CorollaryReport",
    "FormulaReport",
    "HypothesisError",
    "IntegralResult",
    "QvIdentityReport",
    "associativity_check",
    "augment",
    "build_Y",
    "corollary_decomposition",
    "ito_formula_report",
    "ito_integral",
    "qv_of_Y_check",
]
