import math
import threading
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hand_patch_ghz
from triband_moga.evaluator import (
    AntennaProblem,
    BenchmarkProblem,
    EvaluatorTimeout,
    FrequencyResponse,
    MalformedTableError,
    OutOfRangeError,
    SurrogateConfig,
    benchmark_evaluate,
    calibrate_kappa,
    dtlz2,
    effective_permittivity,
    external_evaluate,
    format_params,
    make_problem,
    objectives_from_response,
    parse_params,
    parse_s11_table,
    patch_resonance,
    reference_front,
    resonances,
    ring_resonance,
    surrogate_objectives,
    surrogate_response,
)
from triband_moga.genome import NOMINAL, FixedDesign, ParameterBounds, random_genome

# frozen from the hand-written oracle in oracles.hand_patch_ghz
PATCH_GHZ_NOMINAL = 5.193365513374238
# inner/outer ratio of mean radii fixes the inner ring: 2.4 * 12.13 / 8.0
INNER_GHZ_NOMINAL = 3.639


def test_patch_resonance_matches_oracle():
    f = patch_resonance(NOMINAL)
    assert f == pytest.approx(hand_patch_ghz(22.8, 18.55, 1.57, 2.2), rel=1e-12)
    assert f == pytest.approx(PATCH_GHZ_NOMINAL, rel=1e-12)
    assert abs(f - 5.2) / 5.2 < 0.01


def test_patch_resonance_monotone_in_length():
    v = NOMINAL.to_array()
    freqs = []
    for lp in np.linspace(10, 40, 61):
        v[9] = lp
        freqs.append(patch_resonance(v))
    assert np.all(np.diff(freqs) < 0)
    v[9] = 2 * 18.55
    assert patch_resonance(v) < PATCH_GHZ_NOMINAL


def test_permittivity_thin_substrate_limit():
    assert effective_permittivity(22.8, 1e-12, 2.2) == pytest.approx(2.2, abs=1e-6)


def test_ring_calibration_anchors():
    fixed = FixedDesign()
    f_patch, f_outer, f_inner = resonances(NOMINAL)
    assert f_outer == pytest.approx(2.4, abs=1e-12)
    assert f_inner == pytest.approx(INNER_GHZ_NOMINAL, rel=1e-12)
    assert abs(f_inner - 3.6) / 3.6 < 0.02
    ee = effective_permittivity(22.8, fixed.h, fixed.eps_r)
    k = calibrate_kappa()
    assert ring_resonance(6.0, ee, k) == pytest.approx(2 * ring_resonance(12.0, ee, k), rel=1e-14)
    radii = np.linspace(3, 15, 50)
    assert np.all(np.diff([ring_resonance(r, ee, k) for r in radii]) < 0)
    with pytest.raises(ValueError):
        ring_resonance(0.0, ee, k)


def test_nominal_response_has_three_dips_near_targets():
    resp = surrogate_response(NOMINAL)
    s = resp.s11_db
    assert resp.freq_ghz[0] == 1.0 and resp.freq_ghz[-1] == 7.0
    minima = [i for i in range(1, s.size - 1) if s[i] < s[i - 1] and s[i] < s[i + 1]]
    found = resp.freq_ghz[minima]
    assert len(found) == 3
    for target, f in zip((2.4, 3.6, 5.2), np.sort(found)):
        assert abs(f - target) / target < 0.02


def test_zero_depths_flat_baseline():
    cfg = SurrogateConfig(depth_patch=0, depth_outer=0, depth_inner=0, baseline=-1.25)
    assert np.all(surrogate_response(NOMINAL, cfg=cfg).s11_db == -1.25)


def test_displaced_rings_give_shallower_dips():
    v = NOMINAL.to_array()
    centred = surrogate_objectives(v)
    v[4], v[5] = 6.0, 5.0
    moved = surrogate_objectives(v)
    assert moved[0] > centred[0] and moved[1] > centred[1]


def test_surrogate_config_validation():
    with pytest.raises(ValueError):
        SurrogateConfig(kappa=0.0)
    with pytest.raises(ValueError):
        SurrogateConfig(width_ring=0.0)
    with pytest.raises(ValueError):
        SurrogateConfig(baseline=1.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_surrogate_bounded_and_deterministic(seed):
    cfg = SurrogateConfig()
    g = random_genome(ParameterBounds.default(), seed)
    r1, r2 = surrogate_response(g), surrogate_response(g)
    assert np.array_equal(r1.s11_db, r2.s11_db)
    total = cfg.depth_patch + cfg.depth_outer + cfg.depth_inner
    assert np.all(r1.s11_db <= cfg.baseline)
    assert np.all(r1.s11_db >= cfg.baseline - total)
    assert np.all(np.isfinite(surrogate_objectives(g)))


def test_interpolation_examples():
    resp = FrequencyResponse(np.array([1.0, 2.4, 3.6, 5.2, 6.0]),
                             np.array([0.0, -21.56, -16.60, -27.69, 0.0]))
    assert objectives_from_response(resp).tolist() == [-21.56, -16.60, -27.69]
    flat = FrequencyResponse(np.array([2.0, 2.8]), np.array([-10.0, -10.0]))
    assert objectives_from_response(flat, targets=(2.4,))[0] == pytest.approx(-10.0, abs=1e-12)
    slope = FrequencyResponse(np.array([2.0, 2.8]), np.array([0.0, -8.0]))
    assert objectives_from_response(slope, targets=(2.4,))[0] == pytest.approx(-4.0, abs=1e-12)


def test_interpolation_returns_grid_samples():
    resp = surrogate_response(NOMINAL)
    idx = [int(np.argmin(np.abs(resp.freq_ghz - t))) for t in (2.4, 3.6, 5.2)]
    assert np.array_equal(surrogate_objectives(NOMINAL), resp.s11_db[idx])


def test_out_of_range_target():
    resp = FrequencyResponse(np.array([2.0, 3.0]), np.array([-1.0, -2.0]))
    with pytest.raises(OutOfRangeError):
        objectives_from_response(resp)


def test_frequency_response_validation():
    with pytest.raises(ValueError):
        FrequencyResponse(np.array([1.0, 1.0]), np.array([0.0, 0.0]))


def test_benchmark_values():
    assert benchmark_evaluate("zdt1", np.zeros(30)).tolist() == [0.0, 1.0]
    x = np.zeros(30)
    x[0] = 1.0
    assert benchmark_evaluate("zdt1", x).tolist() == [1.0, 0.0]
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.random(12)
        x[2:] = 0.5
        assert np.sum(dtlz2(x) ** 2) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        benchmark_evaluate("zdt1", np.zeros(5))
    with pytest.raises(ValueError):
        benchmark_evaluate("zdt9", np.zeros(30))


def test_reference_fronts():
    z = reference_front("zdt1")
    assert z.shape == (1000, 2)
    assert np.allclose(z[:, 1], 1 - np.sqrt(z[:, 0]))
    d = reference_front("dtlz2")
    assert d.shape == (1000, 3) and np.all(d >= 0)
    assert np.allclose(np.sum(d ** 2, axis=1), 1.0)
    assert np.array_equal(d, reference_front("dtlz2"))


# ------------------------------------------------------------------ exchange


def test_params_roundtrip():
    text = format_params(NOMINAL)
    assert text.splitlines()[0] == "R1=12.380000"
    assert parse_params(text) == NOMINAL


def test_parse_table_with_header():
    text = "# Frequency / GHz  S11 / dB\n#\n2.4 -21.56\n3.6\t-16.60\n5.2  -27.69\n"
    resp = parse_s11_table(text)
    assert objectives_from_response(resp).tolist() == [-21.56, -16.60, -27.69]


@pytest.mark.parametrize("text", [
    "2.4 -1\n2.0 -2\n",
    "2.4 -1\n2.4 -2\n",
    "2.4 -1 7\n",
    "2.4 abc\n",
    "# only header\n",
    "2.4 nan\n",
])
def test_parse_table_malformed(text):
    with pytest.raises(MalformedTableError):
        parse_s11_table(text)


def test_external_evaluate_times_out(tmp_path):
    t = time.monotonic()
    with pytest.raises(EvaluatorTimeout):
        external_evaluate(NOMINAL, tmp_path, "e1", timeout=0.1, poll_interval=0.01)
    assert time.monotonic() - t < 5
    assert (tmp_path / "e1.params").read_text() == format_params(NOMINAL)


def _fake_solver(exchange, stop):
    """Answer every .params file with the surrogate response, written atomically."""
    while not stop.is_set():
        for p in exchange.glob("*.params"):
            out = exchange / (p.name[:-len(".params")] + ".s11.txt")
            if out.exists():
                continue
            g = parse_params(p.read_text())
            resp = surrogate_response(g)
            rows = "".join(f"{f:.6f} {s:.10f}\n" for f, s in zip(resp.freq_ghz, resp.s11_db))
            tmp = out.with_suffix(".part")
            tmp.write_text("# Frequency / GHz\tS11 / dB\n" + rows)
            tmp.replace(out)
        time.sleep(0.005)


def test_external_problem_roundtrip(tmp_path):
    stop = threading.Event()
    th = threading.Thread(target=_fake_solver, args=(tmp_path, stop), daemon=True)
    th.start()
    try:
        prob = make_problem(f"external:{tmp_path}", timeout=10)
        X = np.array([random_genome(prob.bounds, s).to_array() for s in range(4)])
        F = prob.evaluate_batch(X, jobs=2)
    finally:
        stop.set()
        th.join()
    expect = np.array([surrogate_objectives(x) for x in X])
    assert np.allclose(F, expect, atol=1e-8)
    assert sorted(p.name for p in tmp_path.glob("*.params")) == [
        f"eval_{i:06d}.params" for i in range(4)]


def test_make_problem():
    assert isinstance(make_problem("surrogate"), AntennaProblem)
    assert isinstance(make_problem("dtlz2"), BenchmarkProblem)
    for bad in ("nope", "external:"):
        with pytest.raises(ValueError):
            make_problem(bad)


def test_batch_order_independent_of_jobs():
    prob = make_problem("surrogate")
    X = np.array([random_genome(prob.bounds, s).to_array() for s in range(12)])
    assert np.array_equal(prob.evaluate_batch(X, 1), prob.evaluate_batch(X, 4))


def test_scalar_fitness_magnitudes():
    prob = AntennaProblem()
    F = np.array([[-21.56, -16.60, -27.69], [0.0, 0.0, 0.0]])
    fit = prob.scalar_fitness(F, np.ones(3))
    assert fit[0] == pytest.approx(65.85, abs=1e-12)
    assert fit[1] == 0.0
    assert prob.scalar_fitness(F, np.array([1.0, 0, 0]))[0] == pytest.approx(21.56)
    assert math.isclose(BenchmarkProblem("zdt1").scalar_fitness(np.array([[1.0, 2.0]]),
                                                                np.ones(2))[0], -3.0)
