"""Command line front end.

Five subcommands tie the library into reproducible experiments:

* ``gen``          write a synthetic path as CSV
* ``qv``           quadratic variation table of a path file
* ``integrate``    pathwise integral of a configured integrand
* ``ito-check``    change-of-variables decomposition per level
* ``assoc-check``  both sides of the associativity identity per level

Data goes to ``-o`` (file) or stdout; human-readable summaries go to
stderr.  Relative output paths resolve against $PATHWISE_ITO_OUT_DIR.
Exit codes: 0 success, 1 domain or convergence-gate failure, 2 bad
input (I/O, CSV, JSON, config).  All numbers print with 17 significant
digits so outputs are bit-stable across runs.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys

from .config import (
    ExperimentConfig,
    build_components,
    build_functional,
    default_num_levels,
    load_config,
    partition_for,
    resolve_path,
)
from .ito import (
    AdmissibleIntegrand,
    HypothesisError,
    associativity_check,
    ito_formula_report,
    ito_integral,
)
from .pathgen import GeneratorSpec, generate
from .paths import (
    DomainError,
    PartitionSequence,
    PathFormatError,
    default_output_dir,
    load_sampled_path,
    write_path_csv,
)
from .qv import qv_converged, qv_matrix


def _format(x: float) -> str:
    return f"{float(x):.17g}"


def _say(message: str) -> None:
    print(message, file=sys.stderr)


@contextlib.contextmanager
def _open_output(dest: str | None):
    """Yield a writable text stream: a resolved file, or stdout."""
    if dest is None or dest == "-":
        yield sys.stdout
        return
    if not os.path.isabs(dest):
        dest = os.path.join(default_output_dir(), dest)
    parent = os.path.dirname(dest)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        yield fh


def _resolve_dest(args, config: ExperimentConfig | None) -> str | None:
    if args.output is not None:
        return args.output
    if config is not None and config.output is not None:
        return config.output
    return None


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_gen(args) -> int:
    spec = GeneratorSpec(
        kind=args.kind,
        base_points=args.n,
        horizon=args.T,
        d=args.d,
        seed=args.seed,
        drift=args.drift,
        scale=args.scale,
        expression=args.expression,
        slope=args.slope,
        value=args.value,
        depth=args.depth,
    )
    path = generate(spec)
    with _open_output(args.output) as fh:
        write_path_csv(path, fh)
    _say(f"wrote {path.n_points} samples, {path.d} component(s), T={_format(path.horizon)}")
    return 0


def _triangle(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i, d)]


def _cmd_qv(args) -> int:
    x = load_sampled_path(args.input)
    levels = args.levels if args.levels is not None else default_num_levels(x.n_points)
    part = PartitionSequence(x.times, num_levels=levels)
    finest = qv_matrix(x, part, levels)
    pairs = _triangle(x.d)
    cols = [finest.entry_path(i, j) for i, j in pairs]
    if levels >= 2:
        prev = qv_matrix(x, part, levels - 1)
        diffs = [abs(c - prev.entry_path(i, j)) for (i, j), c in zip(pairs, cols)]
        level_diff = [max(d[k] for d in diffs) for k in range(x.n_points)]
    else:
        level_diff = [0.0] * x.n_points
    with _open_output(_resolve_dest(args, None)) as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t"] + [f"qv_{i + 1}{j + 1}" for i, j in pairs] + ["level_diff"]
        )
        for k in range(x.n_points):
            writer.writerow(
                [_format(x.times[k])]
                + [_format(c[k]) for c in cols]
                + [_format(level_diff[k])]
            )
    if levels >= 3:
        rep = qv_converged(x, part)
        _say(f"converged: {'yes' if rep.converged else 'no'}")
    else:
        _say("converged: n/a (need at least 3 levels)")
    return 0


def _experiment_objects(args):
    config = load_config(args.config)
    x = resolve_path(config)
    part = partition_for(config, x)
    a = build_components(config, x, part)
    return config, x, part, a


def _cmd_integrate(args) -> int:
    config, x, part, a = _experiment_objects(args)
    if config.functional is None:
        raise ValueError("integrate needs a 'functional' entry in the config")
    m = 0 if a is None else a.m
    xi = AdmissibleIntegrand(build_functional(config.functional, x.d, m), a)
    result = ito_integral(
        xi, x, part, levels=config.levels, tol=config.tolerance, threads=config.threads
    )
    with _open_output(_resolve_dest(args, config)) as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "t", "I"])
        for row, level in enumerate(result.levels):
            for k in part.indices(level):
                writer.writerow(
                    [str(level), _format(x.times[k]), _format(result.values[row, k])]
                )
    if result.converged is None:
        _say("converged: n/a (single level)")
    else:
        _say(f"converged: {'yes' if result.converged else 'no'}")
    return 0


def _cmd_ito_check(args) -> int:
    config, x, part, a = _experiment_objects(args)
    if config.functional is None:
        raise ValueError("ito-check needs a 'functional' entry in the config")
    m = 0 if a is None else a.m
    F = build_functional(config.functional, x.d, m)
    rep = ito_formula_report(
        F, x, a, part, levels=config.levels, tol=config.tolerance, threads=config.threads
    )
    with _open_output(_resolve_dest(args, config)) as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["level", "term_lhs", "term_ito", "term_horiz", "term_qv", "residual"]
        )
        for row, level in enumerate(rep.levels):
            writer.writerow(
                [
                    str(level),
                    _format(rep.lhs),
                    _format(rep.ito_at_T[row]),
                    _format(rep.horizontal_at_T),
                    _format(rep.qv_at_T[row]),
                    _format(rep.residuals[row]),
                ]
            )
    worst = max(abs(float(r)) for r in rep.residuals)
    _say(f"worst residual: {_format(worst)}")
    return 0


def _cmd_assoc_check(args) -> int:
    config, x, part, a = _experiment_objects(args)
    if config.outer is None or not config.integrands:
        raise ValueError("assoc-check needs 'outer' and 'integrands' in the config")
    m = 0 if a is None else a.m
    xis = [
        AdmissibleIntegrand(build_functional(spec, x.d, m), a)
        for spec in config.integrands
    ]
    eta = AdmissibleIntegrand(build_functional(config.outer, len(xis), 0))
    rep = associativity_check(
        eta,
        xis,
        x,
        part,
        levels=config.levels,
        tol=config.tolerance,
        qv_gate_tol=config.qv_gate_tol,
        threads=config.threads,
    )
    with _open_output(_resolve_dest(args, config)) as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "lhs", "rhs", "abs_residual", "ratio"])
        for row, level in enumerate(rep.levels):
            ratio = "" if row == 0 else _format(rep.ratios[row - 1])
            writer.writerow(
                [
                    str(level),
                    _format(rep.lhs_at_T[row]),
                    _format(rep.rhs_at_T[row]),
                    _format(abs(rep.residuals_at_T[row])),
                    ratio,
                ]
            )
    _say(f"gate residual (relative): {_format(rep.qv_report.relative)}")
    return 0


# ---------------------------------------------------------------------------
# Entry points


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathwise-ito",
        description="pathwise quadratic variation, integrals, and identity checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic path as CSV")
    gen.add_argument("--kind", required=True)
    gen.add_argument("--n", type=int, required=True, help="base points (power of two)")
    gen.add_argument("--T", type=float, default=1.0, help="horizon")
    gen.add_argument("--d", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--drift", type=float, default=0.0)
    gen.add_argument("--scale", type=float, default=1.0)
    gen.add_argument("--expression", default=None, help="formula in t (smooth kind)")
    gen.add_argument("--slope", default=None, help="slope formula in t (monotone-bv)")
    gen.add_argument("--value", type=float, default=0.0, help="constant kind value")
    gen.add_argument("--depth", type=int, default=24, help="takagi-like tent depth")
    gen.add_argument("-o", "--output", default=None)
    gen.set_defaults(run=_cmd_gen)

    qv = sub.add_parser("qv", help="quadratic variation table of a path file")
    qv.add_argument("-i", "--input", required=True)
    qv.add_argument("--levels", type=int, default=None)
    qv.add_argument("-o", "--output", default=None)
    qv.set_defaults(run=_cmd_qv)

    for name, runner, text in (
        ("integrate", _cmd_integrate, "pathwise integral of a configured integrand"),
        ("ito-check", _cmd_ito_check, "change-of-variables decomposition per level"),
        ("assoc-check", _cmd_assoc_check, "associativity identity per level"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("-c", "--config", required=True)
        cmd.add_argument("-o", "--output", default=None)
        cmd.set_defaults(run=runner)

    return parser


def cli_main(argv=None) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args)
    except (DomainError, HypothesisError) as exc:
        _say(f"error: {exc}")
        return 1
    except (PathFormatError, ValueError, OSError) as exc:
        _say(f"error: {exc}")
        return 2


def main() -> None:
    raise SystemExit(cli_main())


__all__ = ["cli_main", "main"]


if __name__ == "__main__":
    main()
