import numpy as np
import pytest

from oracles import naive_crowding, naive_peel_sort
from triband_moga.dominance import dominates, is_mutually_nondominated
from triband_moga.engines import (
    ALGORITHMS,
    Best,
    ConfigError,
    Population,
    RunAborted,
    RunConfig,
    RunContext,
    binary_tournament,
    initial_population,
    nsga1_generation,
    nsga2_survivors,
    pga_generation,
    run,
    scalar_generation,
    scalarize,
    spea_fitness,
    update_archive,
    update_best,
)
from triband_moga.evaluator import AntennaProblem, make_problem
from triband_moga.genome import is_feasible


def test_config_validation():
    RunConfig().validate()
    bad = [
        dict(algorithm="ga"), dict(population=1), dict(generations=0),
        dict(weights=(0, 0, 0)), dict(weights=(1, -1, 1)), dict(archive_size=0),
        dict(ref_divisions=0), dict(crossover_rate=1.5), dict(mutation_rate=-0.1),
        dict(sigma_share=0), dict(nsga1_selection="roulette"), dict(jobs=0),
    ]
    for kw in bad:
        with pytest.raises(ConfigError):
            RunConfig(**kw).validate()


def test_weights_length_checked():
    with pytest.raises(ConfigError):
        RunContext.create(AntennaProblem(), RunConfig(weights=(1.0, 1.0)))


def test_scalarize_examples():
    F = np.array([[-21.56, -16.60, -27.69], [0.0, 0.0, 0.0], [-3.0, -40.0, -2.0]])
    assert scalarize(F, np.ones(3))[0] == pytest.approx(65.85, abs=1e-12)
    assert scalarize(F, np.ones(3))[1] == 0.0
    assert scalarize(F, np.array([1.0, 0.0, 0.0]))[2] == 3.0


def test_update_best_strict():
    pop = Population(np.arange(6.0).reshape(3, 2), np.zeros((3, 3)))
    b = update_best(pop, np.array([1.0, 5.0, 2.0]), Best())
    assert b.fitness == 5.0 and b.x.tolist() == [2.0, 3.0]
    tied = update_best(pop, np.array([5.0, 1.0, 1.0]), b)
    assert tied is b


# ------------------------------------------------------------- tournament


def test_tournament_examples():
    rng = np.random.default_rng(0)
    assert binary_tournament([3.0], rng) == 0
    keys = np.array([1.0, 2.0])
    for _ in range(200):
        w = binary_tournament(keys, rng)
        assert w in (0, 1)
    # whenever both are drawn the better one wins: winner 0 only if both draws were 0
    rng1, rng2 = np.random.default_rng(5), np.random.default_rng(5)
    for _ in range(500):
        i, j = int(rng2.integers(2)), int(rng2.integers(2))
        w = binary_tournament(keys, rng1)
        assert w == (1 if 1 in (i, j) else 0)


def test_tournament_uniform_keys_uniform_choice():
    rng = np.random.default_rng(42)
    n, draws = 10, 10_000
    counts = np.bincount([binary_tournament(np.zeros(n), rng) for _ in range(draws)], minlength=n)
    p = 1.0 / n
    sd = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) <= 3 * sd)


def test_tournament_lexicographic_keys():
    keys = np.array([[0.0, 1.0], [0.0, 5.0], [-1.0, 100.0]])
    rng1, rng2 = np.random.default_rng(1), np.random.default_rng(1)
    for _ in range(300):
        i, j = int(rng2.integers(3)), int(rng2.integers(3))
        w = binary_tournament(keys, rng1)
        # first key decides; crowding only breaks rank ties; a self-pairing returns itself
        expect = min((i, j), key=lambda k: (-keys[k][0], -keys[k][1], (i, j).index(k)))
        assert w == expect


# ------------------------------------------------------------- NSGA-II survival


def _survivor_oracle(F, n):
    order = []
    for front in naive_peel_sort(F):
        idx = sorted(front)
        cd = naive_crowding(F[idx]) if len(idx) > 2 else [np.inf] * len(idx)
        # stable on index order for equal crowding
        order += [i for _, _, i in sorted(zip([-c for c in cd], range(len(idx)), idx))]
    return order[:n]


def test_nsga2_survivors_vs_oracle():
    rng = np.random.default_rng(8)
    for _ in range(200):
        m = int(rng.integers(2, 4))
        N = int(rng.integers(4, 30))
        F = rng.random((N, m))
        n = int(rng.integers(1, N + 1))
        got = nsga2_survivors(F, n)
        assert sorted(got.tolist()) == sorted(_survivor_oracle(F, n))


def test_nsga2_survivors_keep_parents_that_dominate():
    parents = np.array([[0, 1], [0.5, 0.5], [1, 0]], dtype=float)
    kids = parents + 0.1
    F = np.vstack([parents, kids])
    assert sorted(nsga2_survivors(F, 3).tolist()) == [0, 1, 2]
    front = np.array([[0, 3], [1, 2], [2, 1], [3, 0]], dtype=float)
    assert sorted(nsga2_survivors(np.vstack([front, front + 5]), 4).tolist()) == [0, 1, 2, 3]


# ------------------------------------------------------------- SPEA


def test_spea_fitness_hand_example():
    F = np.array([[1, 1], [2, 2], [3, 3], [0, 4]], dtype=float)
    strength, fit = spea_fitness(F)
    # (1,1) dominates (2,2),(3,3); (2,2) dominates (3,3); pool size 4 -> /5
    assert strength.tolist() == pytest.approx([2 / 5, 1 / 5, 0, 0])
    assert fit.tolist() == pytest.approx([1, 1 + 2 / 5, 1 + 3 / 5, 1])


def test_spea_first_archive_is_nondominated_set():
    rng = np.random.default_rng(2)
    F = rng.random((12, 3))
    pop = Population(rng.random((12, 4)), F)
    arch, _, _ = update_archive(pop, None, 100)
    nd = [i for i in range(12) if not any(dominates(F[j], F[i]) for j in range(12))]
    assert sorted(map(tuple, arch.F)) == sorted(map(tuple, F[nd]))


def test_spea_archive_unchanged_by_dominated_offspring():
    A = Population(np.arange(6.0).reshape(3, 2), np.array([[0, 1], [0.5, 0.5], [1, 0]], float))
    kids = Population(np.ones((3, 2)) * 9, A.F + 1.0)
    new, _, _ = update_archive(kids, A, 3)
    assert np.array_equal(new.F, A.F) and np.array_equal(new.X, A.X)


def test_spea_truncation_respects_capacity():
    rng = np.random.default_rng(3)
    t = np.sort(rng.random(40))
    F = np.column_stack([t, 1 - t])
    arch, _, _ = update_archive(Population(rng.random((40, 2)), F), None, 7)
    assert len(arch) == 7 and is_mutually_nondominated(arch.F)
    assert arch.F[:, 0].min() == t.min() and arch.F[:, 0].max() == t.max()


# ------------------------------------------------------------- generation steps


def _ctx(algorithm, n=10, seed=0, evaluator="surrogate"):
    prob = make_problem(evaluator)
    ctx = RunContext.create(prob, RunConfig(algorithm=algorithm, population=n, seed=seed,
                                            evaluator=evaluator))
    return ctx, ctx.evaluate(initial_population(ctx))


def test_pga_elite_survives_and_size():
    for seed in range(10):
        ctx, pop = _ctx("pga", seed=seed)
        nxt = pga_generation(pop, ctx)
        assert len(nxt) == len(pop)
        assert any(np.array_equal(nxt.X[0], x) for x in pop.X)
        assert all(is_feasible(x, ctx.problem.bounds) for x in nxt.X)


def test_pga_chain_keeps_rank_one():
    ctx, pop = _ctx("pga")
    pop.F = np.arange(10.0)[:, None].repeat(3, axis=1) - 30.0
    nxt = pga_generation(pop, ctx)
    assert np.array_equal(nxt.X[0], pop.X[0])


def test_nsga1_output_size_feasible():
    for sel in ("tournament", "proportionate"):
        ctx, pop = _ctx("nsga1")
        ctx.config.nsga1_selection = sel
        nxt = nsga1_generation(pop, ctx)
        assert len(nxt) == len(pop) and np.all(np.isnan(nxt.F))
        assert all(is_feasible(x, ctx.problem.bounds) for x in nxt.X)


def test_scalar_generation_keeps_elite():
    ctx, pop = _ctx("scalar")
    nxt, best = scalar_generation(pop, ctx, Best())
    fit = ctx.fitness(pop.F)
    assert best.fitness == fit.max()
    assert np.array_equal(nxt.X[0], pop.X[int(np.argmax(fit))])
    assert len(nxt) == len(pop) and not np.isnan(nxt.F[0]).any()


# ------------------------------------------------------------- whole runs


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_run_shapes_and_determinism(algo):
    cfg = RunConfig(algorithm=algo, population=8, generations=4, seed=3)
    a, b = run(cfg), run(cfg)
    assert [t.generation for t in a.trace] == [1, 2, 3, 4]
    assert len(a.population) == 8
    assert np.array_equal(a.population.X, b.population.X)
    assert np.array_equal(a.front.F, b.front.F)
    assert is_mutually_nondominated(a.front.F)
    assert a.trace[0].convergence_speed is None
    assert all(t.gd is not None and t.igd is not None for t in a.trace)
    assert all(is_feasible(x, a.problem.bounds) for x in a.population.X)


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_single_generation(algo):
    res = run(RunConfig(algorithm=algo, population=6, generations=1, seed=0))
    assert len(res.trace) == 1


def test_jobs_do_not_change_results():
    for algo in ("scalar", "nsga2"):
        a = run(RunConfig(algorithm=algo, population=8, generations=3, seed=5, jobs=1))
        b = run(RunConfig(algorithm=algo, population=8, generations=3, seed=5, jobs=3))
        assert np.array_equal(a.population.X, b.population.X)
        assert np.array_equal(a.population.F, b.population.F)


def test_scalar_best_is_trace_maximum():
    for seed in range(5):
        res = run(RunConfig(algorithm="scalar", seed=seed))
        series = [t.best_fitness for t in res.trace]
        assert np.all(np.diff(series) >= 0)
        assert res.best.fitness == max(series)
        assert res.best.fitness == pytest.approx(scalarize(res.best.f, np.ones(3))[0])


def test_benchmark_scalar_fitness_monotone():
    res = run(RunConfig(algorithm="scalar", population=10, generations=10, evaluator="zdt1"))
    assert np.all(np.diff([t.best_fitness for t in res.trace]) >= 0)


def test_aborted_run_carries_partial_trace():
    class Flaky(AntennaProblem):
        calls = 0

        def evaluate(self, x, eval_id=0):
            if eval_id >= 25:
                raise TimeoutError("solver gone")
            return super().evaluate(x, eval_id)

    with pytest.raises(RunAborted) as info:
        run(RunConfig(algorithm="scalar", population=10, generations=10), Flaky())
    part = info.value.partial
    assert 1 <= len(part.trace) < 10
    assert isinstance(info.value.cause, TimeoutError)
