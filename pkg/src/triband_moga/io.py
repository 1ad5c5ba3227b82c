"""Run-directory files and the flat ``key=value`` config format.

Numbers in CSV files use 6 significant digits with ``.`` as separator;
JSON floats use Python's shortest round-trip repr.  Both are locale-free,
so a fixed (seed, config) rewrites byte-identical ``trace.csv`` and
``front.json``.  ``run.json`` carries the wall-clock duration and is the
only file expected to change between reruns.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .dominance import is_mutually_nondominated
from .engines.runner import GenerationTrace, RunResult
from .evaluator import AntennaProblem
from .metrics import SIZE_REDUCTION_DEFINITION, size_reduction

TRACE_COLUMNS = ("generation", "best_fitness", "gd", "igd", "diversity", "convergence_speed")


class RunDirError(ValueError):
    """A run directory is missing files or holds unreadable content."""


def fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if not np.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    s = format(v, ".6g")
    return "0" if s == "-0" else s


def trace_csv(trace: list[GenerationTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for t in trace:
        w.writerow([t.generation, fmt(t.best_fitness), fmt(t.gd), fmt(t.igd),
                    fmt(t.diversity), fmt(t.convergence_speed)])
    return buf.getvalue()


def read_trace(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != TRACE_COLUMNS:
        raise RunDirError(f"{path}: unexpected columns {list(rows[0].keys())}")
    return rows


def _floats(a) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=np.float64).ravel()]


def front_document(result: RunResult) -> dict:
    front = result.front
    if not is_mutually_nondominated(front.F):
        raise ValueError("front contains dominated members")
    p = result.problem
    return {
        "problem": p.name,
        "algorithm": result.config.algorithm,
        "seed": result.config.seed,
        "variables": list(p.var_names),
        "objectives": list(p.obj_names),
        "members": [{"x": _floats(x), "f": _floats(f)} for x, f in zip(front.X, front.F)],
    }


def best_document(result: RunResult) -> dict:
    p, b = result.problem, result.best
    doc = {
        "algorithm": result.config.algorithm,
        "seed": result.config.seed,
        "problem": p.name,
        "fitness": None if b.x is None else float(b.fitness),
        "parameters": None if b.x is None else dict(zip(p.var_names, _floats(b.x))),
        "objectives": None if b.f is None else dict(zip(p.obj_names, _floats(b.f))),
    }
    if isinstance(p, AntennaProblem) and b.x is not None:
        doc["size_reduction_pct"] = size_reduction(b.x, p.fixed)
        doc["size_reduction_definition"] = SIZE_REDUCTION_DEFINITION
    return doc


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_run(out_dir, result: RunResult, backend: str, error: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.csv").write_text(trace_csv(result.trace))
    (out / "front.json").write_text(dump_json(front_document(result)))
    (out / "best.json").write_text(dump_json(best_document(result)))
    meta = {
        "config": result.config.as_dict(),
        "complete": error is None,
        "error": error,
        "generations_done": len(result.trace),
        "evaluations": result.evaluations,
        "backend": backend,
        "duration_s": round(result.duration_s, 6),
    }
    (out / "run.json").write_text(dump_json(meta))
    return out


def load_run(run_dir) -> dict:
    d = Path(run_dir)
    if not d.is_dir():
        raise RunDirError(f"{d}: not a directory")
    docs = {}
    for name in ("front.json", "best.json", "run.json"):
        path = d / name
        try:
            docs[name[:-5]] = json.loads(path.read_text())
        except FileNotFoundError:
            raise RunDirError(f"{d}: missing {name}") from None
        except json.JSONDecodeError as exc:
            raise RunDirError(f"{d}: corrupt {name} ({exc})") from None
    if not (d / "trace.csv").exists():
        raise RunDirError(f"{d}: missing trace.csv")
    docs["trace"] = read_trace(d / "trace.csv")
    try:
        docs["front_F"] = np.array([m["f"] for m in docs["front"]["members"]], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise RunDirError(f"{d}: malformed front.json ({exc})") from None
    docs["dir"] = str(d)
    return docs


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------


def parse_config_text(text: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` comments and blank lines ignored; keys use ``_``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lstrip("-").replace("-", "_")
        if not key:
            raise ValueError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out
