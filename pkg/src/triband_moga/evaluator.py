"""Objective evaluation: tri-band surrogate, benchmark problems, file exchange.

Every engine talks to a :class:`Problem`.  Objectives are always minimised;
for the antenna they are S11 in dB at 2.4, 3.6 and 5.2 GHz.

The surrogate replaces a full-wave solver with three Lorentzian dips in dB:

* the patch resonance from the transmission-line model (Hammerstad
  effective permittivity and fringing length extension),
* one quasi-static resonance per slot ring, ``f = kappa * c / (2 pi r sqrt(eps_eff))``
  with ``kappa`` fixed once so the nominal outer ring sits at 2.4 GHz,
* ring dips weakened by a Gaussian in the ring-centre offset.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .genome import (
    GENE_NAMES,
    NOMINAL,
    AntennaGenome,
    FixedDesign,
    ParameterBounds,
    repair,
)

C0 = 299_792_458.0  # m/s
TARGET_GHZ = (2.4, 3.6, 5.2)
OBJECTIVE_NAMES = ("s11_24", "s11_36", "s11_52")


class OutOfRangeError(ValueError):
    """A target frequency lies outside the sampled span."""


class MalformedTableError(ValueError):
    """An S11 result table could not be parsed."""


class EvaluatorTimeout(TimeoutError):
    """The external solver did not produce a result before the deadline."""


# --------------------------------------------------------------------------
# transmission-line patch model
# --------------------------------------------------------------------------


def effective_permittivity(width_mm: float, h_mm: float, eps_r: float) -> float:
    return (eps_r + 1) / 2 + (eps_r - 1) / 2 * (1 + 12 * h_mm / width_mm) ** -0.5


def length_extension(width_mm: float, h_mm: float, eps_eff: float) -> float:
    """Fringing-field extension of each radiating edge, mm."""
    u = width_mm / h_mm
    return 0.412 * h_mm * (eps_eff + 0.3) * (u + 0.264) / ((eps_eff - 0.258) * (u + 0.8))


def _genome_array(genome) -> np.ndarray:
    if isinstance(genome, AntennaGenome):
        return genome.to_array()
    return np.asarray(genome, dtype=np.float64)


def patch_resonance(genome, fixed: FixedDesign = FixedDesign()) -> float:
    """Fundamental TM010 resonance of the rectangular patch, GHz."""
    g = _genome_array(genome)
    wp, lp = g[8], g[9]
    ee = effective_permittivity(wp, fixed.h, fixed.eps_r)
    dl = length_extension(wp, fixed.h, ee)
    return C0 / (2 * (lp + 2 * dl) * 1e-3 * math.sqrt(ee)) / 1e9


def ring_resonance(mean_radius_mm: float, eps_eff: float, kappa: float) -> float:
    if mean_radius_mm <= 0:
        raise ValueError("mean radius must be positive")
    return kappa * C0 / (2 * math.pi * mean_radius_mm * 1e-3 * math.sqrt(eps_eff)) / 1e9


def calibrate_kappa(fixed: FixedDesign = FixedDesign(), target_ghz: float = 2.4) -> float:
    """Ring constant placing the nominal outer ring exactly at ``target_ghz``."""
    ee = effective_permittivity(NOMINAL.Wp, fixed.h, fixed.eps_r)
    mean_r = 0.5 * (NOMINAL.R1 + NOMINAL.R2)
    return target_ghz / ring_resonance(mean_r, ee, 1.0)


@dataclass(frozen=True)
class SurrogateConfig:
    kappa: float = field(default_factory=calibrate_kappa)
    depth_patch: float = 30.0
    depth_outer: float = 25.0
    depth_inner: float = 20.0
    width_patch: float = 0.20
    width_ring: float = 0.12
    sigma_pos: float = 6.0
    baseline: float = -0.5
    f_start: float = 1.0
    f_stop: float = 7.0
    f_step: float = 0.005

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if min(self.depth_patch, self.depth_outer, self.depth_inner) < 0:
            raise ValueError("dip depths must be non-negative")
        if min(self.width_patch, self.width_ring, self.sigma_pos) <= 0:
            raise ValueError("widths and sigma_pos must be positive")
        if not -3.0 <= self.baseline <= 0.0:
            raise ValueError("baseline must lie in [-3, 0] dB")
        if not self.f_stop > self.f_start or self.f_step <= 0:
            raise ValueError("bad frequency grid")

    def grid(self) -> np.ndarray:
        n = int(round((self.f_stop - self.f_start) / self.f_step)) + 1
        return np.round(np.linspace(self.f_start, self.f_stop, n), 12)


@dataclass(frozen=True)
class FrequencyResponse:
    freq_ghz: np.ndarray
    s11_db: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freq_ghz, dtype=np.float64)
        s = np.asarray(self.s11_db, dtype=np.float64)
        if f.ndim != 1 or f.shape != s.shape or f.size == 0:
            raise ValueError("frequency and S11 columns must be equal-length 1-d arrays")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "freq_ghz", f)
        object.__setattr__(self, "s11_db", s)


def resonances(genome, fixed: FixedDesign = FixedDesign(),
               cfg: SurrogateConfig = SurrogateConfig()) -> tuple[float, float, float]:
    """(patch, outer ring, inner ring) resonance frequencies in GHz."""
    g = _genome_array(genome)
    ee = effective_permittivity(g[8], fixed.h, fixed.eps_r)
    f_patch = patch_resonance(g, fixed)
    f_outer = ring_resonance(0.5 * (g[0] + g[1]), ee, cfg.kappa)
    f_inner = ring_resonance(0.5 * (g[2] + g[3]), ee, cfg.kappa)
    return f_patch, f_outer, f_inner


def ring_coupling(vr: float, ur: float, sigma_pos: float) -> float:
    return math.exp(-(vr * vr + ur * ur) / (2 * sigma_pos * sigma_pos))


def surrogate_response(genome, fixed: FixedDesign = FixedDesign(),
                       cfg: SurrogateConfig = SurrogateConfig()) -> FrequencyResponse:
    g = _genome_array(genome)
    f = cfg.grid()
    centers = resonances(g, fixed, cfg)
    k = ring_coupling(g[4], g[5], cfg.sigma_pos)
    depths = (cfg.depth_patch, cfg.depth_outer * k, cfg.depth_inner * k)
    widths = (cfg.width_patch, cfg.width_ring, cfg.width_ring)
    s11 = np.full(f.shape, cfg.baseline)
    for fc, depth, w in zip(centers, depths, widths):
        x = (f - fc) / w
        s11 -= depth / (1.0 + x * x)
    return FrequencyResponse(f, s11)


def objectives_from_response(resp: FrequencyResponse, targets=TARGET_GHZ) -> np.ndarray:
    """Linear interpolation of S11 at each target frequency."""
    t = np.asarray(targets, dtype=np.float64)
    f = resp.freq_ghz
    if np.any(t < f[0]) or np.any(t > f[-1]):
        raise OutOfRangeError(
            f"targets {t.tolist()} not inside sampled span [{f[0]}, {f[-1]}] GHz")
    return np.interp(t, f, resp.s11_db)


def surrogate_objectives(genome, fixed: FixedDesign = FixedDesign(),
                         cfg: SurrogateConfig = SurrogateConfig()) -> np.ndarray:
    return objectives_from_response(surrogate_response(genome, fixed, cfg))


# --------------------------------------------------------------------------
# benchmark problems
# --------------------------------------------------------------------------

BENCHMARK_DIMS = {"zdt1": (30, 2), "dtlz2": (12, 3)}


def zdt1(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    g = 1.0 + 9.0 * np.sum(x[1:]) / (x.size - 1)
    f1 = x[0]
    return np.array([f1, g * (1.0 - math.sqrt(f1 / g))])


def dtlz2(x, n_obj: int = 3) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size < n_obj:
        raise ValueError("DTLZ2 needs at least n_obj variables")
    g = np.sum((x[n_obj - 1:] - 0.5) ** 2)
    theta = x[:n_obj - 1] * (math.pi / 2)
    f = np.full(n_obj, 1.0 + g)
    for i in range(n_obj):
        f[i] *= np.prod(np.cos(theta[:n_obj - 1 - i]))
        if i > 0:
            f[i] *= math.sin(theta[n_obj - 1 - i])
    return f


def benchmark_evaluate(problem_id: str, x) -> np.ndarray:
    try:
        n_var, n_obj = BENCHMARK_DIMS[problem_id]
    except KeyError:
        raise ValueError(f"unknown benchmark {problem_id!r}") from None
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n_var,):
        raise ValueError(f"{problem_id} expects {n_var} variables, got shape {x.shape}")
    if problem_id == "zdt1":
        return zdt1(x)
    return dtlz2(x, n_obj)


def reference_front(problem_id: str, n_points: int = 1000) -> np.ndarray:
    """``n_points`` samples of the analytic Pareto front."""
    if problem_id == "zdt1":
        f1 = np.linspace(0.0, 1.0, n_points)
        return np.column_stack([f1, 1.0 - np.sqrt(f1)])
    if problem_id == "dtlz2":
        # uniform on the positive unit-sphere octant; fixed stream so the front is stable
        z = np.abs(np.random.default_rng(20240601).standard_normal((n_points, 3)))
        return z / np.linalg.norm(z, axis=1, keepdims=True)
    raise ValueError(f"no analytic front for {problem_id!r}")


# --------------------------------------------------------------------------
# external solver exchange
# --------------------------------------------------------------------------


def format_params(genome) -> str:
    g = _genome_array(genome)
    return "".join(f"{name}={value:.6f}\n" for name, value in zip(GENE_NAMES, g))


def parse_params(text: str) -> AntennaGenome:
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        name, _, value = line.partition("=")
        values[name.strip()] = float(value)
    return AntennaGenome(**{k: values[k] for k in GENE_NAMES})


def parse_s11_table(text: str) -> FrequencyResponse:
    freqs, vals = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedTableError(f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            fv, sv = float(parts[0]), float(parts[1])
        except ValueError:
            raise MalformedTableError(f"line {lineno}: non-numeric field in {raw!r}") from None
        if not (math.isfinite(fv) and math.isfinite(sv)):
            raise MalformedTableError(f"line {lineno}: non-finite value")
        if freqs and fv <= freqs[-1]:
            raise MalformedTableError(f"line {lineno}: frequency {fv} not increasing")
        freqs.append(fv)
        vals.append(sv)
    if not freqs:
        raise MalformedTableError("table has no data rows")
    return FrequencyResponse(np.array(freqs), np.array(vals))


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def external_evaluate(genome, exchange_dir, eval_id: str = "eval",
                      timeout: float = 600.0, poll_interval: float = 0.05) -> np.ndarray:
    """Hand ``genome`` to an external solver through ``exchange_dir``.

    Writes ``<eval_id>.params`` and waits for ``<eval_id>.s11.txt``.  The
    solver side must create the result file atomically (write then rename).
    """
    exchange = Path(exchange_dir)
    exchange.mkdir(parents=True, exist_ok=True)
    _write_atomic(exchange / f"{eval_id}.params", format_params(genome))
    result = exchange / f"{eval_id}.s11.txt"
    deadline = time.monotonic() + timeout
    while not result.exists():
        if time.monotonic() >= deadline:
            raise EvaluatorTimeout(f"no result {result} within {timeout} s")
        time.sleep(poll_interval)
    return objectives_from_response(parse_s11_table(result.read_text()))


# --------------------------------------------------------------------------
# problem interface used by the engines
# --------------------------------------------------------------------------


class Problem:
    """Box-bounded minimisation problem with repair and scalar fitness."""

    name = "problem"
    var_names: tuple[str, ...] = ()
    obj_names: tuple[str, ...] = ()

    def __init__(self, low, high):
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        self._counter = 0

    @property
    def n_var(self) -> int:
        return self.low.shape[0]

    @property
    def n_obj(self) -> int:
        return len(self.obj_names)

    def repair(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=np.float64), self.low, self.high)

    def evaluate(self, x, eval_id: int = 0) -> np.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, X, jobs: int = 1) -> np.ndarray:
        """Objectives for every row of ``X``; row order is kept for any ``jobs``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        ids = list(range(self._counter, self._counter + X.shape[0]))
        self._counter += X.shape[0]
        if jobs <= 1 or X.shape[0] <= 1:
            rows = [self.evaluate(x, i) for x, i in zip(X, ids)]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(self.evaluate, X, ids))
        return np.array(rows, dtype=np.float64).reshape(X.shape[0], self.n_obj)

    def scalar_fitness(self, F, weights) -> np.ndarray:
        """Larger is better.  Minimisation objectives enter negated."""
        return -(np.atleast_2d(F) @ np.asarray(weights, dtype=np.float64))


class AntennaProblem(Problem):
    name = "antenna"
    var_names = GENE_NAMES
    obj_names = OBJECTIVE_NAMES

    def __init__(self, bounds: ParameterBounds | None = None,
                 fixed: FixedDesign = FixedDesign(),
                 surrogate: SurrogateConfig | None = None,
                 exchange_dir=None, timeout: float = 600.0):
        self.bounds = bounds or ParameterBounds.default()
        super().__init__(self.bounds.low, self.bounds.high)
        self.fixed = fixed
        self.surrogate = surrogate or SurrogateConfig()
        self.exchange_dir = exchange_dir
        self.timeout = timeout

    def repair(self, x) -> np.ndarray:
        return repair(x, self.bounds)

    def evaluate(self, x, eval_id: int = 0) -> np.ndarray:
        if self.exchange_dir is not None:
            return external_evaluate(x, self.exchange_dir, f"eval_{eval_id:06d}",
                                     timeout=self.timeout)
        return surrogate_objectives(x, self.fixed, self.surrogate)

    def scalar_fitness(self, F, weights) -> np.ndarray:
        """Weighted sum of S11 magnitudes."""
        return np.abs(np.atleast_2d(F)) @ np.asarray(weights, dtype=np.float64)


class BenchmarkProblem(Problem):
    def __init__(self, problem_id: str):
        if problem_id not in BENCHMARK_DIMS:
            raise ValueError(f"unknown benchmark {problem_id!r}")
        n_var, n_obj = BENCHMARK_DIMS[problem_id]
        super().__init__(np.zeros(n_var), np.ones(n_var))
        self.name = problem_id
        self.var_names = tuple(f"x{i}" for i in range(n_var))
        self.obj_names = tuple(f"f{i + 1}" for i in range(n_obj))

    def evaluate(self, x, eval_id: int = 0) -> np.ndarray:
        return benchmark_evaluate(self.name, x)


def make_problem(spec: str, bounds: ParameterBounds | None = None,
                 surrogate: SurrogateConfig | None = None, timeout: float = 600.0) -> Problem:
    """Build a problem from an evaluator id: ``surrogate``, ``zdt1``, ``dtlz2``
    or ``external:<dir>``."""
    if spec == "surrogate":
        return AntennaProblem(bounds, surrogate=surrogate)
    if spec.startswith("external:"):
        path = spec.split(":", 1)[1]
        if not path:
            raise ValueError("external evaluator needs a directory: external:<dir>")
        return AntennaProblem(bounds, surrogate=surrogate, exchange_dir=path, timeout=timeout)
    if spec in BENCHMARK_DIMS:
        return BenchmarkProblem(spec)
    raise ValueError(f"unknown evaluator {spec!r}")

