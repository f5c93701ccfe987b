"""Change-of-variables demo on a strictly positive rough path.

Takes X = exp(W) for a Brownian-like base path, applies F(x) = log x,
and prints the decomposition per refinement level:

    log X(T) - log X(0)  =  integral of (1/X) dX  -  1/2 integral of (1/X^2) d[X]

The left side is exact path data; the two right-hand terms are computed
from cell sums alone, so the residual column is an honest measure of how
fast the pathwise formula closes as the partition refines.

Run: python scripts/log_change_of_variables.py [--exponent 14] [--seed 7]
"""

import argparse
import math

import numpy as np

from pathwise_ito import (
    GeneratorSpec,
    PartitionSequence,
    SampledPath,
    cylinder,
    generate,
    ito_formula_report,
    positive_orthant,
)


def build_path(exponent: int, seed: int) -> SampledPath:
    w = generate(GeneratorSpec(kind="brownian", base_points=2**exponent, seed=seed))
    return SampledPath(w.times, np.exp(w.values), domain=positive_orthant(1))


def log_functional():
    return cylinder(
        lambda t, xv, av: math.log(xv[0]),
        d=1,
        grad=lambda t, xv, av: np.array([1.0 / xv[0]]),
        hess=lambda t, xv, av: np.array([[-1.0 / xv[0] ** 2]]),
        dt=lambda t, xv, av: 0.0,
        x_domain=positive_orthant(1),
        name="log x",
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--exponent", type=int, default=14,
                    help="base grid has 2**exponent points")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    x = build_path(args.exponent, args.seed)
    part = PartitionSequence(x.times, num_levels=max(1, args.exponent - 1))
    rep = ito_formula_report(log_functional(), x, None, part)

    print(f"X = exp(W), {x.n_points} points, seed {args.seed}")
    print(f"lhs = log X(T) - log X(0) = {rep.lhs:+.12f}")
    print()
    print(f"{'level':>5} {'ito term':>16} {'qv term':>16} {'residual':>12} {'rel':>10}")
    for row, level in enumerate(rep.levels):
        res = rep.residuals[row]
        print(
            f"{level:>5} {rep.ito_at_T[row]:>16.12f} {rep.qv_at_T[row]:>16.12f}"
            f" {res:>12.2e} {abs(res / rep.lhs):>10.2e}"
        )
    print()
    verdict = "yes" if rep.qv_ok else "no"
    print(f"qv term settled across the last levels: {verdict}")
    print("the horizontal term is identically zero for a clock-free functional:"
          f" {rep.horizontal_at_T:+.1e}")


if __name__ == "__main__":
    main()
