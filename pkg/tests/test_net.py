import numpy as np
import pytest

from learnevo.adaptation import METHODS, init_policy
from learnevo.evo.algorithms import init_population
from learnevo.evo.config import EvolutionConfig
from learnevo.exceptions import ContractViolation, InvalidArgumentError
from learnevo.net import autodiff as ad
from learnevo.net.checkpoint import dumps_params, load_params, loads_params, save_params
from learnevo.net.encoding import CHANNEL_LEGENDS, encode_state, n_channels, time_encoding
from learnevo.net.network import HeadSpec, backward, forward, init_params, pool_replicate_conv
from learnevo.problems import ObjectiveFunction, generate_knapsack_instance, generate_tsp_instance

from .oracles import elu, forward_oracle, prc_loops


def _layer(rng, cin, cout):
    return {f"l.{k}": rng.normal(size=s) for k, s in
            (("local", (cin, cout)), ("pop", (cin, cout)), ("gene", (cin, cout)), ("bias", (cout,)))}


# ---------------------------------------------------------------- pool-replicate-conv


def test_prc_matches_loop_oracle(rng):
    x = rng.normal(size=(3, 4, 2))
    w = _layer(rng, 2, 5)
    out = pool_replicate_conv(x[None], w, "l")[0]
    ref = prc_loops(x, w["l.local"], w["l.pop"], w["l.gene"], w["l.bias"])
    assert np.allclose(out, ref, atol=1e-12)


def test_prc_single_position_is_affine(rng):
    x = rng.normal(size=(1, 1, 1, 3))
    w = _layer(rng, 3, 4)
    out = pool_replicate_conv(x, w, "l", activation=False)
    direct = x @ (w["l.local"] + w["l.pop"] + w["l.gene"]) + w["l.bias"]
    assert np.allclose(out, direct, atol=1e-12)
    assert np.allclose(pool_replicate_conv(x, w, "l"), elu(direct), atol=1e-12)


def test_prc_row_equivariance(rng):
    x = rng.normal(size=(1, 6, 5, 3))
    w = _layer(rng, 3, 4)
    perm = rng.permutation(6)
    assert np.max(np.abs(pool_replicate_conv(x[:, perm], w, "l") - pool_replicate_conv(x, w, "l")[:, perm])) < 1e-12


def test_prc_shape_mismatch(rng):
    with pytest.raises(InvalidArgumentError):
        pool_replicate_conv(rng.normal(size=(1, 2, 2, 3)), _layer(rng, 4, 2), "l")


def test_prc_input_gradient(rng):
    x = rng.normal(size=(1, 3, 4, 2))
    w = _layer(rng, 2, 3)
    seed = rng.normal(size=(1, 3, 4, 3))
    tape = ad.Tape()
    xv = tape.leaf(x, "x")
    wv = {k: tape.leaf(v, k) for k, v in w.items()}
    g = tape.backward(pool_replicate_conv(xv, wv, "l"), seed)
    h = 1e-6

    def f(xx, ww):
        return float(np.sum(seed * pool_replicate_conv(xx, ww, "l")))

    for name in ["x", *w]:
        base = x if name == "x" else w[name]
        num = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            up, dn = base.copy(), base.copy()
            up[idx] += h
            dn[idx] -= h
            if name == "x":
                num[idx] = (f(up, w) - f(dn, w)) / (2 * h)
            else:
                num[idx] = (f(x, {**w, name: up}) - f(x, {**w, name: dn})) / (2 * h)
        assert np.allclose(g[name], num, atol=1e-6), name


# ---------------------------------------------------------------- autodiff details


def test_max_gradient_goes_to_first_argmax():
    tape = ad.Tape()
    x = tape.leaf(np.array([[1.0, 3.0, 3.0, 2.0]]), "x")
    g = tape.backward(ad.max(x, axis=1))["x"]
    assert g.tolist() == [[0.0, 1.0, 0.0, 0.0]]


def test_first_argmax_lowest_index():
    x = np.array([[2.0, 5.0, 5.0], [7.0, 7.0, 7.0]])
    assert ad.first_argmax(x, 1)[:, 0].tolist() == [1, 0]


def test_zero_seed_gives_zero_gradients():
    params = init_params(3, HeadSpec("t", "beta", 2, "population"), 4, 2, 0)
    out = forward(np.random.default_rng(0).normal(size=(3, 4, 3)), params)
    g = backward(out.tape, out.value, 0.0)
    assert all(np.all(v == 0) for v in g.values())


def test_linear_layer_gradient_is_input():
    tape = ad.Tape()
    x = np.random.default_rng(2).normal(size=(4, 3))
    w = tape.leaf(np.ones((3, 1)), "w")
    g = tape.backward(ad.sum(ad.matmul(x, w)))["w"]
    assert np.allclose(g[:, 0], x.sum(axis=0))


def test_stale_tape_rejected():
    params = init_params(3, HeadSpec("t", "beta", 2, "population"), 4, 1, 0)
    out = forward(np.zeros((2, 2, 3)), params)
    params.update({"critic.bias": np.ones(1)})
    with pytest.raises(ContractViolation):
        backward(out.tape, out.value)


def test_tape_replay_bit_exact(rng):
    params = init_params(4, HeadSpec("t", "normal", 2, "gene"), 6, 2, 1)
    out = forward(rng.normal(size=(2, 3, 5, 4)), params)
    replayed = out.tape.replay()
    assert all(np.array_equal(a, n.value) for a, n in zip(replayed, out.tape.nodes))


# ---------------------------------------------------------------- forward


@pytest.mark.parametrize("reduction,shape", [("gene", (4, 5, 1)), ("individual", (4, 2)), ("population", (2,))])
def test_forward_matches_oracle(reduction, shape):
    rng = np.random.default_rng(5)
    head = HeadSpec("t", "beta" if shape[-1] == 2 else "bernoulli", shape[-1], reduction)
    params = init_params(3, head, 6, 3, rng)
    state = rng.normal(size=(4, 5, 3))
    out = forward(state, params, record=False)
    a_ref, v_ref = forward_oracle(state, params.arrays, 3, reduction)
    assert out.actor[0].shape == shape
    assert np.allclose(out.actor[0], a_ref, atol=1e-10)
    assert float(out.value[0]) == pytest.approx(v_ref, abs=1e-10)


def test_actor_output_shapes_per_method():
    prob = generate_knapsack_instance(5, 2.0, 0)
    state = np.zeros((4, 5, 6))
    shapes = {"component-binary-mutation": (4, 5, 1), "ind-mutation-rate": (4, 2), "pop-mutation-rate": (2,)}
    for mid, shape in shapes.items():
        out = forward(state, init_policy(mid, prob, 8, 3, 0), record=False)
        assert out.actor[0].shape == shape


def test_duplicating_individuals_doubles_critic(rng):
    # the critic sums one term per individual, so duplicating every row doubles it
    params = init_params(3, HeadSpec("t", "beta", 2, "individual"), 8, 3, rng)
    x = rng.normal(size=(4, 5, 3))
    v1 = float(forward(x, params, record=False).value[0])
    v2 = float(forward(np.concatenate([x, x]), params, record=False).value[0])
    assert v2 == pytest.approx(2 * v1, abs=1e-6)
    # while the per-individual trunk features are unchanged
    a1 = forward(x, params, record=False).actor[0]
    a2 = forward(np.concatenate([x, x]), params, record=False).actor[0]
    assert np.max(np.abs(a2[:4] - a1)) < 1e-12 and np.max(np.abs(a2[4:] - a1)) < 1e-12


def test_forward_deterministic_and_batched(rng):
    params = init_params(4, HeadSpec("t", "normal", 2, "individual"), 8, 3, rng)
    xs = rng.normal(size=(3, 5, 2, 4))
    batch = forward(xs, params, record=False)
    for b in range(3):
        single = forward(xs[b], params, record=False)
        assert np.allclose(single.actor[0], batch.actor[b], atol=1e-12)
    again = forward(xs, params, record=False)
    assert np.array_equal(batch.actor, again.actor) and np.array_equal(batch.value, again.value)


def test_forward_head_mismatch(rng):
    params = init_params(4, HeadSpec("t", "normal", 2, "individual"), 4, 1, rng)
    with pytest.raises(InvalidArgumentError):
        forward(np.zeros((2, 2, 4)), params, HeadSpec("u", "beta", 2, "population"))
    with pytest.raises(InvalidArgumentError):
        forward(np.zeros((2, 2, 3)), params)


def test_params_update_bumps_version():
    params = init_params(2, HeadSpec("t", "normal", 2, "individual"), 4, 1, 0)
    v = params.version
    params.update({"actor.bias": np.ones(2)})
    assert params.version == v + 1


def test_init_is_seeded():
    h = HeadSpec("t", "normal", 2, "individual")
    assert init_params(3, h, 8, 3, 9).equals(init_params(3, h, 8, 3, 9))
    assert not init_params(3, h, 8, 3, 9).equals(init_params(3, h, 8, 3, 10))


# ---------------------------------------------------------------- encoding


def test_time_encoding():
    assert time_encoding(0, 50) == 1.0
    assert time_encoding(49, 50) == 1 / 50
    with pytest.raises(InvalidArgumentError):
        time_encoding(50, 50)


def test_channel_counts():
    assert n_channels(generate_knapsack_instance(5, 1.0, 0)) == 6
    assert n_channels(ObjectiveFunction("sphere")) == 4
    assert n_channels(generate_tsp_instance(7, 0)) == 5 + 14
    assert len(CHANNEL_LEGENDS["knapsack"]) == 6 and len(CHANNEL_LEGENDS["continuous"]) == 4


def test_knapsack_encoding_layout():
    prob = generate_knapsack_instance(7, 2.0, 1)
    pop = init_population(prob, EvolutionConfig.defaults("knapsack"), 0)
    s = encode_state(pop, prob, 3, 10)
    assert s.shape == (10, 7, 6)
    assert np.array_equal(s[..., 0], pop.genomes)
    assert np.all(s[..., 1] == pop.fitness[:, None])
    assert np.all(s[..., 2] == 0.7) and np.all(s[..., 3] == 2.0)
    assert np.all(s[..., 4] == s[0, :, 4]) and np.array_equal(s[0, :, 4], prob.weights)
    assert np.array_equal(s[0, :, 5], prob.values)


def test_continuous_encoding_layout():
    prob = ObjectiveFunction("booth")
    pop = init_population(prob, EvolutionConfig.defaults("continuous"), 0)
    s = encode_state(pop, prob, 0, 5)
    assert np.array_equal(s[..., 0], pop.genomes)
    assert np.allclose(s[..., 1], np.log(pop.fitness)[:, None])
    assert np.all(s[..., 2] == 1.0) and np.all(s[..., 3] == 0.1)


def test_tsp_encoding_layout():
    prob = generate_tsp_instance(6, 2)
    pop = init_population(prob, EvolutionConfig.defaults("tsp"), 0)
    pairs = np.array([[0, 1], [2, 3], [4, 0]])
    s = encode_state(pop, prob, 1, 4, pairs=pairs)
    assert s.shape == (3, 6, 17)
    i, j, k = 1, 4, 3
    node = pop.genomes[pairs[i, 0], j]
    assert s[i, j, 5 + k] == prob.weights[node, k]
    node2 = pop.genomes[pairs[i, 1], j]
    assert s[i, j, 5 + 6 + k] == prob.weights[node2, k]
    assert np.all(s[i, :, 2] == pop.fitness[2]) and np.all(s[i, :, 3] == pop.fitness[3])
    with pytest.raises(InvalidArgumentError):
        encode_state(pop, prob, 1, 4)


# ---------------------------------------------------------------- checkpoints


@pytest.mark.parametrize("mid", sorted(METHODS))
def test_checkpoint_round_trip(mid, tmp_path):
    m = METHODS[mid]
    prob = {"knapsack": generate_knapsack_instance(4, 1.0, 0), "continuous": ObjectiveFunction("sphere"),
            "tsp": generate_tsp_instance(4, 0)}[m.problem_classes[0]]
    p = init_policy(m, prob, 5, 2, 3, dtype=np.float32)
    p.version = 17
    back = load_params(save_params(p, tmp_path / "c.bin"))
    assert back.equals(p) and back.version == 17 and back.head == p.head
    assert dumps_params(back) == dumps_params(p)


def test_checkpoint_corruption(tmp_path):
    p = init_params(3, HeadSpec("pop-mutation-rate", "beta", 2, "population"), 4, 1, 0, np.float32)
    blob = dumps_params(p)
    with pytest.raises(InvalidArgumentError):
        loads_params(b"X" + blob[1:])
    with pytest.raises(InvalidArgumentError):
        loads_params(blob[:-3])
    with pytest.raises(InvalidArgumentError):
        loads_params(blob + b"\0")
    with pytest.raises(InvalidArgumentError):
        load_params(tmp_path / "missing.bin")
    assert blob[:8] == b"LEVOCKPT"
