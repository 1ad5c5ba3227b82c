"""Command line entry point: ``run``, ``compare`` and ``bench``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import backend_name
from .engines import ALGORITHMS, ConfigError, RunAborted, RunConfig, run
from .evaluator import (
    BENCHMARK_DIMS,
    EvaluatorTimeout,
    make_problem,
    reference_front,
)
from .genome import DEFAULT_OFFSET_LIMIT, DEFAULT_SCALE, GENE_NAMES, InfeasibleBoundsError, ParameterBounds
from .io import RunDirError, fmt, load_run, parse_config_text, write_run
from .metrics import SIZE_REDUCTION_DEFINITION, gd, igd, pooled_front

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3
EXIT_BOUNDS = 4

PRESETS = {"paper-n10g10": {"population": "10", "generations": "10", "evaluator": "surrogate"}}

# config key -> converter; keys match the long flag names with "-" -> "_"
_CONVERTERS = {
    "algorithm": str,
    "population": int,
    "generations": int,
    "seed": int,
    "evaluator": str,
    "weights": lambda s: tuple(float(w) for w in s.split(",")),
    "sigma_share": float,
    "alpha": float,
    "ref_divisions": int,
    "archive_size": int,
    "jobs": int,
    "crossover_rate": float,
    "crossover_eta": float,
    "mutation_rate": float,
    "mutation_eta": float,
    "nsga1_selection": str,
    "external_timeout": float,
    "bounds_scale": lambda s: tuple(float(v) for v in s.split(",")),
    "offset_limit": float,
    "out": str,
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    # every default is None so that "not given" can be told apart from a value
    p.add_argument("--algorithm", help=f"one of {', '.join(ALGORITHMS)}")
    p.add_argument("--population", help="population size N")
    p.add_argument("--generations", help="generation count G")
    p.add_argument("--seed", help="RNG seed (required)")
    p.add_argument("--evaluator", help="surrogate | zdt1 | dtlz2 | external:<dir>")
    p.add_argument("--weights", help="comma separated objective weights, e.g. 1,1,1")
    p.add_argument("--sigma-share", help="sharing radius (normalised objective space)")
    p.add_argument("--alpha", help="sharing exponent")
    p.add_argument("--ref-divisions", help="NSGA-III lattice divisions p")
    p.add_argument("--archive-size", help="SPEA external archive capacity (default N)")
    p.add_argument("--jobs", help="parallel evaluations (results do not depend on it)")
    p.add_argument("--crossover-rate")
    p.add_argument("--crossover-eta")
    p.add_argument("--mutation-rate", help="per-gene rate (default 1/n)")
    p.add_argument("--mutation-eta")
    p.add_argument("--nsga1-selection", help="tournament | proportionate")
    p.add_argument("--external-timeout", help="seconds to wait for each external result")
    p.add_argument("--bounds-scale", help="low,high multipliers of the nominal design")
    p.add_argument("--offset-limit", help="half-width of the Vr/Ur box in mm")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named base configuration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triband-moga",
                                     description="Tri-band antenna optimisation with six GA engines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one optimisation run")
    _add_run_flags(p_run)
    p_run.add_argument("--out", help="output directory")

    p_cmp = sub.add_parser("compare", help="tabulate finished runs against their pooled front")
    p_cmp.add_argument("run_dirs", nargs="+")
    p_cmp.add_argument("--csv", dest="csv_path", help="also write the table here as CSV")

    p_b = sub.add_parser("bench", help="IGD of an engine on ZDT1 or DTLZ2 over several seeds")
    p_b.add_argument("--problem", required=True, choices=sorted(BENCHMARK_DIMS))
    p_b.add_argument("--algorithm", default=None)
    p_b.add_argument("--population", type=int, default=50)
    p_b.add_argument("--generations", type=int, default=150)
    p_b.add_argument("--seeds", default="0-9", help="e.g. 0-9 or 1,5,7")
    p_b.add_argument("--ref-divisions", type=int, default=None)
    p_b.add_argument("--jobs", type=int, default=1)
    p_b.add_argument("--csv", dest="csv_path")
    return parser


def _err(msg: str) -> None:
    print(f"triband-moga: error: {msg}", file=sys.stderr)


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge preset < config file < flags and convert every value."""
    raw: dict[str, str] = {}
    if getattr(args, "preset", None):
        raw.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        try:
            raw.update(parse_config_text(text))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for key in _CONVERTERS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    unknown = sorted(set(raw) - set(_CONVERTERS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    out = {}
    for key, value in raw.items():
        try:
            out[key] = _CONVERTERS[key](value)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}") from None
    return out


def run_command(args: argparse.Namespace) -> int:
    try:
        s = resolve_settings(args)
        if "seed" not in s:
            raise ConfigError("--seed is required")
        if "out" not in s:
            raise ConfigError("--out is required")
        out = s.pop("out")
        scale = s.pop("bounds_scale", DEFAULT_SCALE)
        offset = s.pop("offset_limit", DEFAULT_OFFSET_LIMIT)
        if len(scale) != 2:
            raise ConfigError("bounds_scale needs two values: low,high")
        config = RunConfig(**s).validate()
        bounds = ParameterBounds.default(scale=scale, offset_limit=offset)
        problem = make_problem(config.evaluator, bounds=bounds, timeout=config.external_timeout)
    except InfeasibleBoundsError as exc:
        _err(f"infeasible bounds: {exc}")
        return EXIT_BOUNDS
    except (ConfigError, ValueError, TypeError) as exc:
        _err(str(exc))
        return EXIT_CONFIG

    try:
        result = run(config, problem)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except RunAborted as exc:
        write_run(out, exc.partial, backend_name(), error=f"{type(exc.cause).__name__}: {exc.cause}")
        _err(f"{exc.cause} (partial trace written to {out})")
        if isinstance(exc.cause, EvaluatorTimeout):
            return EXIT_TIMEOUT
        return EXIT_FAILURE
    write_run(out, result, backend_name())
    b = result.best
    print(f"{config.algorithm} seed={config.seed}: {len(result.trace)} generations, "
          f"{result.evaluations} evaluations, best fitness {fmt(b.fitness)}, "
          f"front size {len(result.front)} -> {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# compare
# --------------------------------------------------------------------------


def compare_rows(runs: list[dict]) -> tuple[list[str], list[list[str]]]:
    """Header and formatted rows for a list of loaded run directories."""
    ref = pooled_front([r["front_F"] for r in runs])
    first = runs[0]["best"]
    var_names = list((first.get("parameters") or {}).keys()) or list(GENE_NAMES)
    obj_names = list(runs[0]["front"]["objectives"])
    header = (["algorithm", "seed"] + var_names + obj_names
              + ["size_reduction_pct", "gd", "igd"])
    rows = []
    for r in runs:
        b = r["best"]
        params = b.get("parameters") or {}
        objs = b.get("objectives") or {}
        F = r["front_F"]
        row = [str(b.get("algorithm")), str(b.get("seed"))]
        row += [fmt(params.get(k)) for k in var_names]
        row += [fmt(objs.get(k)) for k in obj_names]
        row.append(fmt(b.get("size_reduction_pct")))
        row += [fmt(gd(F, ref)), fmt(igd(F, ref))] if len(F) else ["", ""]
        rows.append(row)
    return header, rows


def render_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def compare_command(args: argparse.Namespace) -> int:
    if len(args.run_dirs) < 2:
        _err("compare needs at least two run directories")
        return EXIT_CONFIG
    try:
        runs = [load_run(d) for d in args.run_dirs]
    except RunDirError as exc:
        _err(str(exc))
        return EXIT_FAILURE
    header, rows = compare_rows(runs)
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([header] + rows)
    if args.csv_path:
        Path(args.csv_path).write_text(buf.getvalue())
    print(render_table(header, rows))
    print()
    print(f"size reduction: {SIZE_REDUCTION_DEFINITION}")
    print("gd/igd: final front of each run against the pooled non-dominated front of all runs")
    return EXIT_OK


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------


def parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def bench_command(args: argparse.Namespace) -> int:
    algo = args.algorithm or ("nsga3" if BENCHMARK_DIMS[args.problem][1] > 2 else "nsga2")
    divisions = args.ref_divisions if args.ref_divisions is not None else 12
    try:
        seeds = parse_seeds(args.seeds)
        configs = [RunConfig(algorithm=algo, population=args.population,
                             generations=args.generations, seed=s, evaluator=args.problem,
                             ref_divisions=divisions, jobs=args.jobs).validate()
                   for s in seeds]
    except (ConfigError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    ref = reference_front(args.problem)
    lines = ["seed,igd,gd,duration_s"]
    values = []
    print(f"{algo} on {args.problem}: N={args.population} G={args.generations} "
          f"backend={backend_name()}")
    for cfg in configs:
        res = run(cfg, make_problem(cfg.evaluator), reference=ref)
        F = res.front.F
        v_igd, v_gd = igd(F, ref), gd(F, ref)
        values.append(v_igd)
        lines.append(f"{cfg.seed},{fmt(v_igd)},{fmt(v_gd)},{res.duration_s:.3f}")
        print(f"seed {cfg.seed:>4d}  igd {fmt(v_igd):>10s}  gd {fmt(v_gd):>10s}  "
              f"{res.duration_s:7.2f} s")
    v = np.array(values)
    print(f"igd median {fmt(np.median(v))}  min {fmt(v.min())}  max {fmt(v.max())}")
    if args.csv_path:
        Path(args.csv_path).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_command(args)
    if args.command == "compare":
        return compare_command(args)
    return bench_command(args)


if __name__ == "__main__":
    sys.exit(main())
