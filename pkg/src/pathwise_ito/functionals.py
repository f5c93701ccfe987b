"""Non-anticipative functionals of a path and their pathwise derivatives.

A functional F(t, X, A) sees the time t, a sampled path X and an optional
piecewise-linear component path A; non-anticipativity (F reads nothing past
t) is a contract on the supplied callables, testable via
``stop``-invariance, not something this module can enforce.

Three derivative notions are exposed, each either analytic (supplied at
construction) or approximated by finite differences:

* vertical: bump the path by h e_i at all grid times >= t and difference;
* second vertical: iterated central differences, symmetric by construction;
* horizontal: move the evaluation time forward with the path frozen at t.
  The zeroth component is the plain forward quotient in t.  The k-th
  component differences F against a path whose k-th extra component keeps
  running to t + h while everything else stays frozen, divided by
  A_k(t+h) - A_k(t); on stretches where A_k does not move the quotient is
  vacuous and the component is reported as 0 with an "underdetermined"
  flag (any value integrates identically against the flat dA_k there).

The product and compose combinators push all three notions through the
standard rules, delegating to whatever the parts provide, so analytic and
finite-difference functionals mix freely.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .paths import (
    BVPath,
    Domain,
    DomainError,
    GridError,
    LINEAR,
    SampledPath,
    _check_domain,
    stop,
)
from .qv import qv_matrix
from .paths import PartitionSequence

_DERIV_GUARD = 1e-14


def _default_vertical_h(x) -> float:
    return 1e-4 * (1.0 + float(np.max(np.abs(x.values))))


def _default_horizontal_h(x) -> float:
    return 1e-3 * float(x.times[-1])


def _ensure_sampled(x):
    """Materialise lazy composed paths; pass real ones through."""
    if isinstance(x, SampledPath):
        return x
    return x.materialize()


class Functional:
    """A scalar functional with evaluation and derivative callables.

    ``evaluate`` is mandatory; the three derivative slots are optional and
    fall back to finite differences on the functional itself.  ``x_domain``
    restricts the path values the functional accepts; vertical bumps are
    validated against it so boundary proximity surfaces as DomainError.
    """

    __slots__ = (
        "d",
        "m",
        "name",
        "x_domain",
        "_evaluate",
        "_vertical",
        "_vertical2",
        "_horizontal",
        "_alt_m",
    )

    def __init__(
        self,
        evaluate: Callable,
        d: int,
        m: int = 0,
        vertical: Callable | None = None,
        vertical2: Callable | None = None,
        horizontal: Callable | None = None,
        x_domain: Domain | None = None,
        name: str = "functional",
    ) -> None:
        if d < 1 or m < 0:
            raise ValueError("need d >= 1 path components and m >= 0 extra components")
        self.d = int(d)
        self.m = int(m)
        self.name = name
        self.x_domain = x_domain
        self._evaluate = evaluate
        self._vertical = vertical
        self._vertical2 = vertical2
        self._horizontal = horizontal
        # A composed functional with a bound outer component path also
        # accepts just the inner components and appends the bound ones.
        self._alt_m: int | None = None

    def _check_args(self, x, a) -> None:
        if x.d != self.d:
            raise ValueError(f"{self.name}: path has {x.d} components, functional wants {self.d}")
        got = 0 if a is None else a.m
        if got != self.m and got != self._alt_m:
            raise ValueError(f"{self.name}: got {got} extra components, wants {self.m}")

    def evaluate(self, t: float, x, a=None) -> float:
        self._check_args(x, a)
        return float(self._evaluate(t, x, a))

    def vertical(self, t: float, x, a=None) -> np.ndarray:
        self._check_args(x, a)
        if self._vertical is not None:
            return _as_vector(self._vertical(t, x, a), self.d, self.name)
        return fd_vertical(self, t, x, a)

    def vertical2(self, t: float, x, a=None) -> np.ndarray:
        self._check_args(x, a)
        if self._vertical2 is not None:
            out = np.asarray(self._vertical2(t, x, a), dtype=np.float64)
            if out.shape != (self.d, self.d):
                raise ValueError(f"{self.name}: second vertical must be ({self.d}, {self.d})")
            return out
        return fd_vertical2(self, t, x, a)

    def horizontal(self, t: float, x, a=None) -> np.ndarray:
        self._check_args(x, a)
        if self._horizontal is not None:
            return _as_vector(self._horizontal(t, x, a), self.m + 1, self.name)
        return fd_horizontal(self, t, x, a)

    @property
    def analytic(self) -> tuple[bool, bool, bool]:
        """Which of (vertical, vertical2, horizontal) avoid finite differences."""
        return (
            self._vertical is not None,
            self._vertical2 is not None,
            self._horizontal is not None,
        )

    def __repr__(self) -> str:  # pragma: no cover
        return f"Functional({self.name!r}, d={self.d}, m={self.m})"


def _as_vector(v, n: int, name: str) -> np.ndarray:
    out = np.asarray(v, dtype=np.float64).reshape(-1)
    if out.shape != (n,):
        raise ValueError(f"{name}: derivative must have {n} entries")
    return out


# ---------------------------------------------------------------------------
# Finite differences


def _bumped(x: SampledPath, j: int, i: int, h: float, domain) -> SampledPath:
    vals = x.values.copy()
    vals[j:, i] += h
    _check_domain(vals, domain)
    return type(x)._trusted(x.times, vals, x.interpolation, x.domain)


def fd_vertical(F: Functional, t: float, x, a=None, h: float | None = None) -> np.ndarray:
    """Central difference of F under bumps h e_i 1_[t,T], per component.

    ``t`` must be a grid time: a sampled path cannot hold a jump between
    grid points, so an off-grid bump would be silently smoothed.  Falls
    back to a one-sided quotient when one of the two bumps leaves the
    domain; both sides failing is a genuine boundary hit and raises.
    """
    x = _ensure_sampled(x)
    if h is None:
        h = _default_vertical_h(x)
    j = x.grid_index(t)
    dom = F.x_domain if F.x_domain is not None else x.domain
    out = np.empty(F.d)
    for i in range(F.d):
        up = down = None
        try:
            up = F.evaluate(t, _bumped(x, j, i, +h, dom), a)
        except DomainError:
            pass
        try:
            down = F.evaluate(t, _bumped(x, j, i, -h, dom), a)
        except DomainError:
            pass
        if up is not None and down is not None:
            out[i] = (up - down) / (2.0 * h)
        elif up is not None:
            out[i] = (up - F.evaluate(t, x, a)) / h
        elif down is not None:
            out[i] = (F.evaluate(t, x, a) - down) / h
        else:
            raise DomainError(
                f"{F.name}: vertical bumps at t={t} leave the domain on both sides"
            )
    return out


def fd_vertical2(F: Functional, t: float, x, a=None, h: float | None = None) -> np.ndarray:
    """Symmetric second differences; shrinks h near a domain boundary."""
    x = _ensure_sampled(x)
    if h is None:
        h = _default_vertical_h(x)
    j = x.grid_index(t)
    dom = F.x_domain if F.x_domain is not None else x.domain
    last_exc = None
    for _ in range(7):
        try:
            return _fd_vertical2_at(F, t, x, a, j, h, dom)
        except DomainError as exc:
            last_exc = exc
            h *= 0.5
    raise DomainError(f"{F.name}: second vertical bumps keep leaving the domain: {last_exc}")


def _fd_vertical2_at(F, t, x, a, j, h, dom) -> np.ndarray:
    d = F.d
    out = np.empty((d, d))
    mid = F.evaluate(t, x, a)
    for i in range(d):
        up = F.evaluate(t, _bumped(x, j, i, +h, dom), a)
        down = F.evaluate(t, _bumped(x, j, i, -h, dom), a)
        out[i, i] = (up - 2.0 * mid + down) / (h * h)
    for i in range(d):
        for k in range(i + 1, d):
            pp = F.evaluate(t, _bumped(_bumped(x, j, i, +h, dom), j, k, +h, dom), a)
            pm = F.evaluate(t, _bumped(_bumped(x, j, i, +h, dom), j, k, -h, dom), a)
            mp = F.evaluate(t, _bumped(_bumped(x, j, i, -h, dom), j, k, +h, dom), a)
            mm = F.evaluate(t, _bumped(_bumped(x, j, i, -h, dom), j, k, -h, dom), a)
            val = (pp - pm - mp + mm) / (4.0 * h * h)
            out[i, k] = val
            out[k, i] = val
    return out


def fd_horizontal(
    F: Functional,
    t: float,
    x,
    a=None,
    h: float | None = None,
    return_flags: bool = False,
):
    """Difference quotients for (D_0, D_1, ..., D_m) at time t.

    All quotients freeze the path data at t and move only the evaluation
    time (and, for k >= 1, the k-th extra component) forward by at most h,
    clamped so t + h never passes T.  At t = T the window vanishes and
    every component is 0 and flagged.  For k >= 1 the trial steps h/4,
    h/2, h are snapped to grid times of A, because the mixed path can hold
    its kink exactly only at a grid point; an off-grid kink would be
    smoothed by interpolation and bias the quotient by the interpolation
    fraction.  The smallest snapped step with |A_k(t+h) - A_k(t)| above a
    tiny guard wins; a flat component is 0 and flagged as underdetermined.
    """
    x = _ensure_sampled(x)
    if h is None:
        h = _default_horizontal_h(x)
    T = x.horizon
    m = F.m
    out = np.zeros(m + 1)
    flags = np.zeros(m + 1, dtype=bool)
    x_t = stop(x, t)
    a_t = stop(a, t) if a is not None else None
    h0 = min(h, T - t)
    if h0 <= _DERIV_GUARD * max(1.0, T):
        flags[:] = True
        return (out, flags) if return_flags else out
    base = F.evaluate(t, x_t, a_t)
    out[0] = (F.evaluate(t + h0, x_t, a_t) - base) / h0
    if m:
        guard = _DERIV_GUARD * max(1.0, float(np.max(np.abs(a.values))))
        tol = 1e-12 * max(1.0, T)
        first_after = int(np.searchsorted(a.times, t + tol))
        steps = []
        for hk in (h0 / 4.0, h0 / 2.0, h0):
            j = int(np.searchsorted(a.times, t + hk - tol))
            j = min(max(j, first_after), a.times.shape[0] - 1)
            th = float(a.times[j])
            if th > t and th not in steps:
                steps.append(th)
        for k in range(m):
            for th in steps:
                da = float(a.value(th)[k] - a.value(t)[k])
                if abs(da) > guard:
                    mixed = a_t.values.copy()
                    mixed[:, k] = stop(a, th).values[:, k]
                    a_mix = BVPath._trusted(a.times, mixed, LINEAR, a.domain)
                    out[k + 1] = (F.evaluate(th, x_t, a_mix) - F.evaluate(th, x_t, a_t)) / da
                    break
            else:
                flags[k + 1] = True
    return (out, flags) if return_flags else out


# ---------------------------------------------------------------------------
# Built-in library


def coordinate(i: int = 0, d: int = 1, m: int = 0, x_domain: Domain | None = None) -> Functional:
    """F(t, X, A) = X_i(t)."""
    if not 0 <= i < d:
        raise ValueError("coordinate index out of range")
    e_i = np.zeros(d)
    e_i[i] = 1.0
    zero_d2 = np.zeros((d, d))
    zero_h = np.zeros(m + 1)
    return Functional(
        evaluate=lambda t, x, a: x.value(t)[i],
        d=d,
        m=m,
        vertical=lambda t, x, a: e_i,
        vertical2=lambda t, x, a: zero_d2,
        horizontal=lambda t, x, a: zero_h,
        x_domain=x_domain,
        name=f"x{i + 1}",
    )


def bv_coordinate(k: int = 0, m: int = 1, d: int = 1) -> Functional:
    """F(t, X, A) = A_k(t); horizontal derivative (0, ..., 1, ..., 0)."""
    if not 0 <= k < m:
        raise ValueError("component index out of range")
    zero_d = np.zeros(d)
    zero_d2 = np.zeros((d, d))
    h_vec = np.zeros(m + 1)
    h_vec[k + 1] = 1.0
    return Functional(
        evaluate=lambda t, x, a: a.value(t)[k],
        d=d,
        m=m,
        vertical=lambda t, x, a: zero_d,
        vertical2=lambda t, x, a: zero_d2,
        horizontal=lambda t, x, a: h_vec,
        name=f"a{k + 1}",
    )


def cylinder(
    f: Callable,
    d: int = 1,
    m: int = 0,
    grad: Callable | None = None,
    hess: Callable | None = None,
    dt: Callable | None = None,
    da: Callable | None = None,
    x_domain: Domain | None = None,
    name: str = "cylinder",
) -> Functional:
    """F(t, X, A) = f(t, X(t), A(t)) for a smooth instantaneous f.

    ``f`` and each supplied partial take (t, x_vec, a_vec) with array
    arguments of length d and m.  For such functionals the pathwise
    derivatives collapse to the classical partials of f: vertical is the
    x-gradient, second vertical the x-Hessian, D_0 the t-partial and D_k
    the a_k-partial (the frozen path contributes nothing else).  ``da`` is
    required together with ``dt`` to form an analytic horizontal.
    """

    def _state(t, x, a):
        xv = np.atleast_1d(np.asarray(x.value(t), dtype=np.float64))
        av = (
            np.atleast_1d(np.asarray(a.value(t), dtype=np.float64))
            if a is not None
            else np.zeros(0)
        )
        return xv, av

    def _eval(t, x, a):
        xv, av = _state(t, x, a)
        return f(t, xv, av)

    vertical = None
    if grad is not None:
        vertical = lambda t, x, a: grad(t, *_state(t, x, a))
    vertical2 = None
    if hess is not None:
        vertical2 = lambda t, x, a: hess(t, *_state(t, x, a))
    horizontal = None
    if dt is not None and (m == 0 or da is not None):
        def horizontal(t, x, a):
            xv, av = _state(t, x, a)
            head = [dt(t, xv, av)]
            tail = np.atleast_1d(da(t, xv, av)) if m else np.zeros(0)
            return np.concatenate([head, tail])
    return Functional(
        evaluate=_eval,
        d=d,
        m=m,
        vertical=vertical,
        vertical2=vertical2,
        horizontal=horizontal,
        x_domain=x_domain,
        name=name,
    )


def constant_functional(c: float, d: int = 1, m: int = 0) -> Functional:
    zero_d = np.zeros(d)
    zero_d2 = np.zeros((d, d))
    zero_h = np.zeros(m + 1)
    return Functional(
        evaluate=lambda t, x, a: c,
        d=d,
        m=m,
        vertical=lambda t, x, a: zero_d,
        vertical2=lambda t, x, a: zero_d2,
        horizontal=lambda t, x, a: zero_h,
        name=f"{c:g}",
    )


# ---------------------------------------------------------------------------
# Extra-component factories


def time_average_path(x: SampledPath, i: int = 0) -> BVPath:
    """A(t) = (1/t) * integral of X_i over [0, t], trapezoidal, A(0) = X_i(0)."""
    v = x.values[:, i]
    dt = np.diff(x.times)
    cells = 0.5 * (v[:-1] + v[1:]) * dt
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    out = np.empty_like(v)
    out[0] = v[0]
    out[1:] = cum[1:] / x.times[1:]
    return BVPath(x.times, out)


def running_max_path(x: SampledPath, i: int = 0) -> BVPath:
    """A(t) = max of X_i over [0, t] along the grid."""
    return BVPath(x.times, np.maximum.accumulate(x.values[:, i]))


def quadratic_variation_path(
    x: SampledPath, partition: PartitionSequence, level: int, i: int = 0
) -> BVPath:
    """A(t) = level-n quadratic variation path of X_i as an extra component."""
    return BVPath(x.times, qv_matrix(x, partition, level).entry_path(i, i))


# ---------------------------------------------------------------------------
# Combinators


def _merge_domains(a: Domain | None, b: Domain | None) -> Domain | None:
    if a is None or a is b:
        return b if a is None else a
    if b is None:
        return a
    def both(values):
        return np.logical_and(
            _domain_mask(values, a), _domain_mask(values, b)
        )
    return both


def _domain_mask(values, domain):
    from .paths import Box

    if isinstance(domain, Box):
        return domain.contains(values)
    return np.asarray(domain(values), dtype=bool)


def product(F: Functional, G: Functional) -> Functional:
    """Pointwise product with derivatives pushed through the Leibniz rules."""
    if (F.d, F.m) != (G.d, G.m):
        raise ValueError("product needs matching (d, m)")

    def _eval(t, x, a):
        return F.evaluate(t, x, a) * G.evaluate(t, x, a)

    def _vertical(t, x, a):
        return G.evaluate(t, x, a) * F.vertical(t, x, a) + F.evaluate(t, x, a) * G.vertical(t, x, a)

    def _vertical2(t, x, a):
        fv, gv = F.vertical(t, x, a), G.vertical(t, x, a)
        return (
            G.evaluate(t, x, a) * F.vertical2(t, x, a)
            + F.evaluate(t, x, a) * G.vertical2(t, x, a)
            + np.outer(fv, gv)
            + np.outer(gv, fv)
        )

    def _horizontal(t, x, a):
        return G.evaluate(t, x, a) * F.horizontal(t, x, a) + F.evaluate(t, x, a) * G.horizontal(t, x, a)

    return Functional(
        evaluate=_eval,
        d=F.d,
        m=F.m,
        vertical=_vertical,
        vertical2=_vertical2,
        horizontal=_horizontal,
        x_domain=_merge_domains(F.x_domain, G.x_domain),
        name=f"({F.name})*({G.name})",
    )


class _ComposedPath:
    """Lazy view of t -> (F_1, ..., F_p)(t, X, A), evaluated on demand.

    Composed functionals probe this path at a handful of times per call
    (one, for cylinder outers), so values are computed and memoised per
    requested time instead of materialising the whole grid.  Each evaluate
    call builds its own instance, so the cache is never shared across
    threads or across different (X, A) pairs.
    """

    __slots__ = ("times", "interpolation", "_x", "_a", "_inners", "_domain", "_cache", "_full")

    def __init__(self, x, a, inners, domain):
        self.times = x.times
        self.interpolation = LINEAR
        self._x = x
        self._a = a
        self._inners = inners
        self._domain = domain
        self._cache: dict[float, np.ndarray] = {}
        self._full = None

    @property
    def d(self) -> int:
        return len(self._inners)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_points(self) -> int:
        return self.times.shape[0]

    def value(self, t: float) -> np.ndarray:
        key = float(t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        vec = np.array([f.evaluate(key, self._x, self._a) for f in self._inners])
        _check_domain(vec[None, :], self._domain)
        vec.setflags(write=False)
        self._cache[key] = vec
        return vec

    def materialize(self) -> SampledPath:
        """The whole inner path on the base grid, computed once and kept."""
        if self._full is None:
            rows = np.empty((self.n_points, self.d))
            for k, t in enumerate(self.times):
                rows[k] = self.value(float(t))
            self._full = SampledPath._trusted(self.times, rows, LINEAR, self._domain)
        return self._full

    @property
    def values(self) -> np.ndarray:
        return self.materialize().values


def compose(outer: Functional, inners: Sequence[Functional], b: BVPath | None = None) -> Functional:
    """H(t, X, (A, B)) = outer(t, (inners)(., X, A), B), with the chain rules.

    The returned functional drives d path components and m + q extra
    components, where m is shared by the inner functionals and q belongs
    to the outer one; the extra components are split positionally.  If
    ``b`` is given it is appended automatically whenever a caller passes
    only the inner m components, binding the outer data at compose time.
    """
    inners = list(inners)
    if not inners:
        raise ValueError("compose needs at least one inner functional")
    if outer.d != len(inners):
        raise ValueError(
            f"outer functional drives {outer.d} components, got {len(inners)} inners"
        )
    if b is not None and b.m != outer.m:
        raise ValueError("bound B must carry exactly the outer functional's components")
    d = inners[0].d
    m = inners[0].m
    if any((f.d, f.m) != (d, m) for f in inners):
        raise ValueError("inner functionals must share (d, m)")
    q = outer.m
    dom = None
    for f in inners:
        dom = _merge_domains(dom, f.x_domain)

    def _split(x, ab):
        got = 0 if ab is None else ab.m
        if got == m and b is not None and q:
            # Caller supplied only the inner components; append the bound B.
            from .paths import concat_components

            ab = concat_components(ab if got else BVPath.empty(x.times), b)
            got = ab.m
        if got != m + q:
            raise ValueError(f"composed functional wants {m}+{q} extra components, got {got}")
        a = ab.slice_components(0, m) if m else None
        bb = ab.slice_components(m, m + q) if q else None
        return a, bb

    def _inner_path(x, a):
        return _ComposedPath(x, a, inners, outer.x_domain)

    def _eval(t, x, ab):
        a, bb = _split(x, ab)
        return outer.evaluate(t, _inner_path(x, a), bb)

    def _vertical(t, x, ab):
        a, bb = _split(x, ab)
        y = _inner_path(x, a)
        gout = outer.vertical(t, y, bb)
        jac = np.stack([f.vertical(t, x, a) for f in inners])
        return jac.T @ gout

    def _vertical2(t, x, ab):
        a, bb = _split(x, ab)
        y = _inner_path(x, a)
        gout = outer.vertical(t, y, bb)
        g2 = outer.vertical2(t, y, bb)
        jac = np.stack([f.vertical(t, x, a) for f in inners])
        out = jac.T @ g2 @ jac
        for weight, f in zip(gout, inners):
            out = out + weight * f.vertical2(t, x, a)
        return 0.5 * (out + out.T)

    def _horizontal(t, x, ab):
        a, bb = _split(x, ab)
        y = _inner_path(x, a)
        gout = outer.vertical(t, y, bb)
        gh = outer.horizontal(t, y, bb)
        out = np.zeros(m + q + 1)
        out[0] = gh[0]
        for weight, f in zip(gout, inners):
            fh = f.horizontal(t, x, a)
            out[0] += weight * fh[0]
            out[1 : m + 1] += weight * fh[1:]
        out[m + 1 :] = gh[1:]
        return out

    inner_names = ", ".join(f.name for f in inners)
    H = Functional(
        evaluate=_eval,
        d=d,
        m=m + q,
        vertical=_vertical,
        vertical2=_vertical2,
        horizontal=_horizontal,
        x_domain=dom,
        name=f"{outer.name}({inner_names})",
    )
    if b is not None:
        H._alt_m = m
    return H


# ---------------------------------------------------------------------------
# Regularity probes


@dataclass(frozen=True)
class ProbeSchedule:
    """Deterministic sampling plan for the regularity probes.

    ``h_values`` are decreasing fractions of the horizon: the left probe at
    scale h compares times t and t - h*T and perturbs the path by shifts of
    size h*tube_radius.  ``times`` defaults to a spread of grid times that
    keep t - h*T inside the domain for every scale.
    """

    times: tuple[float, ...] | None = None
    h_values: tuple[float, ...] = (0.1, 0.05, 0.02, 0.01, 0.005)
    tube_radius: float = 0.5
    n_perturbations: int = 8
    seed: int = 0
    abs_tol: float = 1e-8


@dataclass(frozen=True, eq=False)
class RegularityReport:
    """Sampled moduli; a probe can falsify regularity, never certify it."""

    h_values: np.ndarray
    left_moduli: np.ndarray
    fixed_time_moduli: np.ndarray
    bound_constant: float
    left_continuity_ok: bool
    continuity_ok: bool

    @property
    def ok(self) -> bool:
        return self.left_continuity_ok and self.continuity_ok


def _decayed(moduli: np.ndarray, abs_tol: float) -> bool:
    # Moduli are sampled at decreasing scales; regularity predicts decay.
    # Pass iff the finest modulus is small absolutely or clearly below the
    # coarsest one; a jump functional stays flat and fails.
    return bool(moduli[-1] <= max(abs_tol, 0.5 * moduli[0]))


def probe_regularity(
    F: Functional, x: SampledPath, a: BVPath | None = None, schedule: ProbeSchedule | None = None
) -> RegularityReport:
    """Sample left-continuity, fixed-time continuity and boundedness moduli.

    Left-continuity compares F(t, X, A) against F(t - h, Y, A) for paths Y
    that stay sup-close to X; fixed-time continuity perturbs the path and
    keeps t; boundedness records the largest |F| seen on a tube of radius
    ``tube_radius`` around X.  Evaluation failures inside the tube (for
    instance a domain violation) count as an infinite modulus rather than
    an exception.
    """
    sched = schedule or ProbeSchedule()
    hs = np.asarray(sched.h_values, dtype=np.float64)
    if hs.ndim != 1 or hs.shape[0] < 2 or not np.all(np.diff(hs) < 0):
        raise ValueError("h_values must be a decreasing sequence of at least two scales")
    T = x.horizon
    if sched.times is None:
        lo = float(hs[0]) * T
        candidates = x.times[(x.times >= lo) & (x.times > 0.0)]
        if candidates.shape[0] == 0:
            raise ValueError("no grid times clear the coarsest probe scale")
        idx = np.unique(np.linspace(0, candidates.shape[0] - 1, 12).astype(int))
        times = candidates[idx]
    else:
        times = np.asarray(sched.times, dtype=np.float64)
    rng = np.random.default_rng(sched.seed)
    shifts = rng.uniform(-1.0, 1.0, size=(sched.n_perturbations, x.d))

    def _shifted(delta_row):
        vals = x.values + delta_row[None, :]
        return SampledPath._trusted(x.times, vals, x.interpolation, x.domain)

    def _safe(f, *args):
        try:
            return f(*args)
        except (DomainError, GridError, ValueError, FloatingPointError, ZeroDivisionError):
            return np.inf

    left = np.zeros_like(hs)
    fixed = np.zeros_like(hs)
    bound = 0.0
    for t in times:
        base = _safe(F.evaluate, float(t), x, a)
        for k, h in enumerate(hs):
            t_prev = max(float(t) - h * T, 0.0)
            for row in shifts:
                y = _shifted(row * (h * sched.tube_radius))
                left[k] = max(left[k], abs(base - _safe(F.evaluate, t_prev, y, a)))
                fixed[k] = max(fixed[k], abs(base - _safe(F.evaluate, float(t), y, a)))
        for row in shifts:
            y = _shifted(row * sched.tube_radius)
            bound = max(bound, abs(_safe(F.evaluate, float(t), y, a)))
    return RegularityReport(
        h_values=hs,
        left_moduli=left,
        fixed_time_moduli=fixed,
        bound_constant=float(bound),
        left_continuity_ok=_decayed(left, sched.abs_tol),
        continuity_ok=_decayed(fixed, sched.abs_tol),
    )


__all__ = [
    "Functional",
    "ProbeSchedule",
    "RegularityReport",
    "bv_coordinate",
    "compose",
    "constant_functional",
    "coordinate",
    "cylinder",
    "fd_horizontal",
    "fd_vertical",
    "fd_vertical2",
    "probe_regularity",
    "product",
    "quadratic_variation_path",
    "running_max_path",
    "time_average_path",
]
