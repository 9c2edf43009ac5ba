import itertools

import numpy as np
import pytest

from multignn import gallery
from multignn.generator import GeneratorParams, random_circulant
from multignn.graph import degrees
from multignn.harness.train import full_batch, prepare
from multignn.nn import (
    Adam,
    AdamState,
    GraphBatch,
    ModelConfig,
    MultiGNN,
    NonFiniteGradient,
    backward,
    grad_check,
    load_checkpoint,
    parameter,
    save_checkpoint,
    sgd_adam_step,
    weighted_bce_loss,
)
from multignn.nn.checkpoint import from_dict, to_dict
from multignn.nn.layers import Module
from multignn.nn.tensor import Tensor
from multignn.oracles import label_all

from _constructions import fan_in_layer, fan_out_layer, out_degree_layer, run
from _graphs import random_multigraph


def test_out_degree_construction_on_pair():
    g = gallery.out_degree_pair()
    assert run(out_degree_layer(), g).tolist() == [2.0, 1.0, 0.0, 0.0]


def test_fan_constructions_on_port_examples():
    a, b = gallery.fan_in_parallel(), gallery.fan_in_distinct()
    assert run(fan_in_layer(), a)[a.node_index("t")] == 2.0
    assert run(fan_in_layer(), b)[b.node_index("t")] == 3.0
    g = gallery.degree_out_example()
    assert run(fan_out_layer(), g)[g.node_index("s")] == 2.0


@pytest.mark.parametrize("seed", range(10))
def test_constructions_count_exactly(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 64))
    g = random_multigraph(rng, n, int(rng.integers(0, 4 * n)), loops=bool(seed % 2))
    d = degrees(g)
    assert np.array_equal(run(out_degree_layer(), g), d["deg_out"])
    assert np.array_equal(run(fan_in_layer(), g), d["fan_in"])
    assert np.array_equal(run(fan_out_layer(), g), d["fan_out"])


def _small_case(seed, **kw):
    g = random_circulant(GeneratorParams(12, 3, 2.0, seed))
    cfg = ModelConfig(num_layers=2, hidden_dim=4, **kw)
    labels = label_all(g).values
    data = prepare(g, labels, cfg, 2)
    return MultiGNN(cfg, seed), full_batch(data, cfg), labels


@pytest.mark.parametrize("agg, rev, ports", list(itertools.product(["sum", "max"], [False, True], [False, True])))
def test_grad_check_all_layer_variants(agg, rev, ports):
    model, batch, labels = _small_case(1, aggregation=agg, reverse_mp=rev, ports=ports)
    report = grad_check(model, batch, labels, minority_class_weight=2.0)
    assert report.max_rel_error < 1e-4, str(report)
    assert report.checked > 0


def test_grad_check_edge_readout():
    g = random_circulant(GeneratorParams(10, 3, 2.0, 0))
    cfg = ModelConfig(num_layers=2, hidden_dim=3, reverse_mp=True, ports=True, readout="edge", num_outputs=2)
    data = prepare(g, np.zeros((g.n, 1)), cfg, 2)
    model = MultiGNN(cfg, 0)
    labels = np.random.default_rng(0).integers(0, 2, size=(g.m, 2))
    assert grad_check(model, full_batch(data, cfg), labels).max_rel_error < 1e-4


def test_output_width_and_shapes():
    model, batch, _ = _small_case(0, reverse_mp=True)
    assert model(batch).shape == (12, 11)
    batch.targets = np.array([3, 5])
    assert model(batch).shape == (2, 11)


def test_ego_and_port_input_widths():
    cfg = ModelConfig(ports=True, ego_ids=True, edge_in_dim=1)
    assert cfg.node_input_width == 2 and cfg.edge_input_width == 3


@pytest.mark.parametrize("kw", [dict(readout="graph"), dict(num_layers=0), dict(minority_class_weight=0)])
def test_model_config_validation(kw):
    with pytest.raises(ValueError):
        ModelConfig(**kw)


def test_layer_rejects_wrong_edge_width():
    model, batch, _ = _small_case(0, ports=True)
    batch.edge_features = np.zeros((batch.num_edges, 1))
    with pytest.raises(ValueError, match="edge features"):
        model(batch)


def test_seeded_init_is_reproducible():
    a = MultiGNN(ModelConfig(hidden_dim=8), 3).state_dict()
    b = MultiGNN(ModelConfig(hidden_dim=8), 3).state_dict()
    c = MultiGNN(ModelConfig(hidden_dim=8), 4).state_dict()
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert any(not np.array_equal(a[k], c[k]) for k in a)


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    model, batch, _ = _small_case(2, reverse_mp=True, ports=True, aggregation="max")
    for p in model.parameters():
        p.data = p.data + np.random.default_rng(0).normal(size=p.shape) * 1e-3
    save_checkpoint(model, tmp_path / "ck.json", {"note": "x"})
    loaded, extra = load_checkpoint(tmp_path / "ck.json")
    assert extra == {"note": "x"}
    assert loaded.cfg == model.cfg
    for (k, p), (k2, q) in zip(model.named_parameters(), loaded.named_parameters()):
        assert k == k2 and np.array_equal(p.data, q.data)
    assert np.array_equal(model(batch).data, loaded(batch).data)


def test_checkpoint_version_checked():
    doc = to_dict(MultiGNN(ModelConfig(num_layers=1, hidden_dim=2)))
    doc["version"] = 99
    with pytest.raises(ValueError, match="version"):
        from_dict(doc)


def test_load_state_dict_mismatch():
    model = MultiGNN(ModelConfig(num_layers=1, hidden_dim=2))
    state = model.state_dict()
    state.pop(next(iter(state)))
    with pytest.raises(KeyError):
        model.load_state_dict(state)


def test_adam_first_step_moves_by_lr():
    p = parameter(np.array([1.0, -2.0]))
    state = AdamState()
    sgd_adam_step([p], [np.array([0.5, -3.0])], state, lr=0.1)
    # bias-corrected first step is lr * g / |g|
    assert np.allclose(p.data, [0.9, -1.9], atol=1e-6)
    assert state.step == 1


def test_adam_minimises_quadratic():
    p = parameter(np.array([5.0, -3.0]))
    opt = Adam([p], lr=0.1)
    for _ in range(500):
        opt.zero_grad()
        ((p - 1.0) * (p - 1.0)).sum().backward()
        opt.step()
    assert np.allclose(p.data, 1.0, atol=1e-3)


def test_nonfinite_gradient_is_named():
    class Tiny(Module):
        def __init__(self):
            self.w = parameter(np.ones(2))

    model = Tiny()
    loss = (model.w * Tensor(np.array([1.0, np.inf]))).sum()
    with pytest.raises(NonFiniteGradient, match="w"):
        backward(loss, model)

