import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from learnevo.exceptions import ContractViolation, InvalidArgumentError
from learnevo.problems import (
    FUNCTION_TABLE,
    TRAINING_FUNCTIONS,
    VALIDATION_FUNCTIONS,
    KnapsackInstance,
    ObjectiveFunction,
    TspInstance,
    continuous_fitness,
    dumps_instance,
    eval_objective,
    generate_knapsack_instance,
    generate_tsp_instance,
    knapsack_fitness,
    load_instance,
    loads_instance,
    make_instance_set,
    repair_knapsack,
    repair_population,
    save_instance,
    tsp_fitness,
)

from .oracles import tsp_bruteforce_max


# ---------------------------------------------------------------- knapsack


def test_knapsack_generation_shape_and_range():
    inst = generate_knapsack_instance(100, 10.0, 3)
    assert inst.n_items == 100 and inst.weight_limit == 10.0
    for arr in (inst.weights, inst.values):
        assert np.all((arr >= 0) & (arr <= 1))


def test_knapsack_single_item():
    inst = generate_knapsack_instance(1, 1.0, 0)
    assert inst.n_items == 1


def test_knapsack_generation_is_seed_deterministic():
    a, b = generate_knapsack_instance(50, 10.0, 99), generate_knapsack_instance(50, 10.0, 99)
    assert dumps_instance(a) == dumps_instance(b)
    assert dumps_instance(a) != dumps_instance(generate_knapsack_instance(50, 10.0, 100))


@pytest.mark.parametrize("n", [0, -3])
def test_knapsack_rejects_empty(n):
    with pytest.raises(InvalidArgumentError):
        generate_knapsack_instance(n, 10.0, 0)


def test_knapsack_rejects_nonpositive_limit():
    with pytest.raises(InvalidArgumentError):
        generate_knapsack_instance(5, 0.0, 0)


def test_knapsack_fitness_examples():
    inst = generate_knapsack_instance(10, 10.0, 1)
    assert knapsack_fitness(np.zeros(10, dtype=int), inst) == 0.0
    for k in range(10):
        g = np.zeros(10, dtype=int)
        g[k] = 1
        assert knapsack_fitness(g, inst) == inst.values[k]


def test_knapsack_fitness_matches_resummation(rng):
    inst = generate_knapsack_instance(10, 3.0, 2)
    for _ in range(200):
        g = repair_knapsack(rng.integers(0, 2, 10), inst, rng)
        expected = 0.0
        for i in range(10):
            if g[i]:
                expected += float(inst.values[i])
        assert knapsack_fitness(g, inst) == pytest.approx(expected, abs=1e-12)


def test_knapsack_fitness_errors():
    inst = KnapsackInstance([0.6, 0.6], [1.0, 1.0], 1.0)
    with pytest.raises(InvalidArgumentError):
        knapsack_fitness([1, 0, 0], inst)
    with pytest.raises(ContractViolation):
        knapsack_fitness([1, 1], inst)


def test_weight_limit_is_strict():
    inst = KnapsackInstance([0.5, 0.5], [1.0, 1.0], 1.0)
    assert not inst.is_feasible(np.array([1, 1]))
    assert inst.is_feasible(np.array([1, 0]))


def test_repair_leaves_feasible_input_alone(rng):
    inst = generate_knapsack_instance(20, 10.0, 5)
    g = np.zeros(20, dtype=np.int8)
    g[:3] = 1
    assert np.array_equal(repair_knapsack(g, inst, rng), g)


def test_repair_all_ones_tiny_limit():
    inst = KnapsackInstance([0.5, 0.6, 0.7], [1.0, 1.0, 1.0], 0.1)
    assert np.array_equal(repair_knapsack([1, 1, 1], inst, 0), [0, 0, 0])


def test_repair_property_10k_cases():
    rng = np.random.default_rng(7)
    inst = generate_knapsack_instance(30, 5.0, 11)
    genomes = rng.integers(0, 2, size=(10_000, 30)).astype(np.int8)
    out = repair_population(genomes, inst, rng)
    assert np.all(inst.is_feasible(out))
    assert np.all(out <= genomes)
    # idempotent on its own output
    assert np.array_equal(repair_population(out, inst, rng), out)


def test_repair_removes_items_uniformly():
    # two items, either alone is feasible but not both: each is dropped half the time
    inst = KnapsackInstance([0.6, 0.6], [1.0, 2.0], 1.0)
    rng = np.random.default_rng(0)
    out = repair_population(np.ones((20_000, 2), dtype=np.int8), inst, rng)
    kept_first = out[:, 0].mean()
    assert abs(kept_first - 0.5) < 3 * np.sqrt(0.25 / 20_000)


@given(st.integers(1, 25), st.integers(0, 2**32 - 1), st.floats(0.05, 12.0))
def test_repair_feasible_subset_property(n, seed, w_max):
    rng = np.random.default_rng(seed)
    inst = generate_knapsack_instance(n, w_max, rng)
    g = rng.integers(0, 2, n)
    r = repair_knapsack(g, inst, rng)
    assert inst.is_feasible(r)
    assert np.all(r <= g)


# ---------------------------------------------------------------- TSP


def test_tsp_generation_structure():
    inst = generate_tsp_instance(3, 4)
    w = inst.weights
    assert np.array_equal(w, w.T) and np.all(np.diag(w) == 0)
    big = generate_tsp_instance(20, 4)
    assert np.all((big.weights >= 0) & (big.weights <= 1))
    assert np.array_equal(generate_tsp_instance(12, 8).weights, generate_tsp_instance(12, 8).weights)


def test_tsp_rejects_small():
    with pytest.raises(InvalidArgumentError):
        generate_tsp_instance(2, 0)


def test_tsp_three_cycle():
    inst = generate_tsp_instance(3, 0)
    w = inst.weights
    for perm in ([0, 1, 2], [2, 0, 1], [1, 0, 2]):
        assert tsp_fitness(perm, inst) == pytest.approx(w[0, 1] + w[1, 2] + w[0, 2], abs=1e-15)


@given(st.integers(3, 15), st.integers(0, 2**32 - 1), st.integers(0, 14))
def test_tsp_rotation_reversal_invariance(n, seed, shift):
    rng = np.random.default_rng(seed)
    inst = generate_tsp_instance(n, rng)
    p = rng.permutation(n)
    f = tsp_fitness(p, inst)
    assert tsp_fitness(np.roll(p, shift % n), inst) == pytest.approx(f, abs=1e-12)
    assert tsp_fitness(p[::-1], inst) == pytest.approx(f, abs=1e-12)


def test_tsp_fitness_rejects_non_permutation():
    inst = generate_tsp_instance(4, 0)
    with pytest.raises(InvalidArgumentError):
        tsp_fitness([0, 1, 1, 2], inst)


def test_tsp_exhaustive_oracle_n8():
    inst = generate_tsp_instance(8, 21)
    import itertools

    best_found = max(tsp_fitness((0,) + rest, inst) for rest in itertools.permutations(range(1, 8)))
    assert best_found == pytest.approx(tsp_bruteforce_max(inst.weights.tolist()), abs=1e-12)


def test_tsp_vectorised_matches_scalar(rng):
    inst = generate_tsp_instance(10, 3)
    perms = np.stack([rng.permutation(10) for _ in range(20)])
    assert np.allclose(inst.evaluate(perms), [tsp_fitness(p, inst) for p in perms], atol=1e-12)


# ---------------------------------------------------------------- continuous


def test_function_table_has_19_entries():
    assert len(FUNCTION_TABLE) == 19
    assert len(TRAINING_FUNCTIONS) == 16 and len(VALIDATION_FUNCTIONS) == 3
    assert set(TRAINING_FUNCTIONS).isdisjoint(VALIDATION_FUNCTIONS)


@pytest.mark.parametrize("name", sorted(FUNCTION_TABLE))
def test_zero_at_normalised_minimiser(name):
    f = ObjectiveFunction(name)
    u = f.minimizer
    assert np.all(np.abs(u) <= 1.0)
    assert abs(eval_objective(f, u)) <= 1e-9


@pytest.mark.parametrize("name", sorted(FUNCTION_TABLE))
def test_non_negative_on_domain(name):
    rng = np.random.default_rng(abs(hash(name)) % 2**32)
    f = ObjectiveFunction(name)
    pts = rng.uniform(-1, 1, size=(1000, 2))
    assert np.all(f(pts) >= -1e-9)
    # a dense grid as well, which reaches the corners
    g = np.linspace(-1, 1, 81)
    grid = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    assert np.all(f(grid) >= -1e-9)


def test_known_minimisers():
    assert eval_objective("sphere", [0.0, 0.0]) == 0.0
    assert abs(eval_objective("ackley", [0.0, 0.0])) <= 1e-12


def test_eval_objective_rejects_outside():
    with pytest.raises(InvalidArgumentError):
        eval_objective("sphere", [1.5, 0.0])
    with pytest.raises(InvalidArgumentError):
        ObjectiveFunction("not-a-function")


def test_continuous_fitness_examples():
    assert continuous_fitness(1.0) == 1.0
    assert continuous_fitness(0.0) == 1e20
    assert continuous_fitness(1e-25) == 1e20
    with pytest.raises(InvalidArgumentError):
        continuous_fitness(float("nan"))


# ---------------------------------------------------------------- files


def test_instance_round_trip(tmp_path):
    k = generate_knapsack_instance(17, 4.5, 123)
    t = generate_tsp_instance(9, 321)
    c = ObjectiveFunction("rosenbrock")
    for inst in (k, t, c):
        path = save_instance(inst, tmp_path / "x.txt")
        back = load_instance(path)
        assert back == inst
    back = loads_instance(dumps_instance(k))
    assert np.array_equal(back.weights, k.weights) and np.array_equal(back.values, k.values)
    assert back.seed == 123


def test_bad_instance_file():
    with pytest.raises(InvalidArgumentError):
        loads_instance("format = other\n")


def test_make_instance_set():
    ks = make_instance_set("knapsack", 3, 5, n=12)
    assert len(ks) == 3 and all(k.n_items == 12 for k in ks)
    assert len({dumps_instance(k) for k in ks}) == 3
    assert [k == j for k, j in zip(ks, make_instance_set("knapsack", 3, 5, n=12))] == [True] * 3
    assert [f.function_id for f in make_instance_set("continuous", 2, 0)] == list(TRAINING_FUNCTIONS[:2])
    with pytest.raises(InvalidArgumentError):
        make_instance_set("continuous", 17, 0)
    with pytest.raises(InvalidArgumentError):
        make_instance_set("sat", 1, 0)
    assert isinstance(make_instance_set("tsp", 1, 0)[0], TspInstance)
