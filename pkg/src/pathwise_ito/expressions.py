"""Small symbolic expression helper used by generators and config files.

Expressions are parsed once with sympy against a fixed set of variable
names, checked for stray symbols, and compiled to numpy-vectorised
callables.  Symbolic differentiation is exposed so config files can supply
one formula and get consistent partials from it.

sympy is imported lazily; nothing here runs unless an expression is
actually used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _sympy():
    import sympy

    return sympy


@dataclass(frozen=True, eq=False)
class CompiledExpression:
    """One scalar formula over named variables, compiled for numpy arrays."""

    text: str
    variables: tuple[str, ...]
    _expr: object = field(repr=False)
    _fn: Callable = field(repr=False)

    def __call__(self, *args) -> np.ndarray:
        if len(args) != len(self.variables):
            raise TypeError(
                f"expression over {self.variables} called with {len(args)} arguments"
            )
        args = [np.asarray(a, dtype=np.float64) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in args))
        out = np.asarray(self._fn(*args), dtype=np.float64)
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        return out

    def diff(self, variable: str) -> "CompiledExpression":
        sympy = _sympy()
        if variable not in self.variables:
            raise ValueError(f"unknown variable {variable!r}")
        d = sympy.diff(self._expr, sympy.Symbol(variable, real=True))
        return _from_sympy(str(d), d, self.variables)


def _from_sympy(text, expr, variables) -> CompiledExpression:
    sympy = _sympy()
    syms = [sympy.Symbol(v, real=True) for v in variables]
    fn = sympy.lambdify(syms, expr, modules="numpy")
    return CompiledExpression(text=text, variables=tuple(variables), _expr=expr, _fn=fn)


def compile_expression(text: str, variables: tuple[str, ...]) -> CompiledExpression:
    """Parse ``text`` over exactly the given variable names.

    Any free symbol outside ``variables`` is rejected, so a typo in a config
    file fails at parse time instead of at evaluation time.
    """
    sympy = _sympy()
    from sympy.parsing.sympy_parser import parse_expr

    local = {v: sympy.Symbol(v, real=True) for v in variables}
    try:
        expr = parse_expr(text, local_dict=local)
    except Exception as exc:  # sympy's tokenizer raises a mixed bag
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from None
    allowed = set(local.values())
    stray = [str(s) for s in expr.free_symbols if s not in allowed]
    if stray:
        raise ValueError(
            f"expression {text!r} uses unknown names {sorted(stray)}; "
            f"allowed: {list(variables)}"
        )
    return _from_sympy(text, expr, variables)


def state_variables(d: int, m: int) -> tuple[str, ...]:
    """Names (t, x1..xd, a1..am) for instantaneous-state formulas."""
    return ("t",) + tuple(f"x{i + 1}" for i in range(d)) + tuple(
        f"a{k + 1}" for k in range(m)
    )


__all__ = ["CompiledExpression", "compile_expression", "state_variables"]
