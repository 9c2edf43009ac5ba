import warnings
from dataclasses import replace

import numpy as np
import pytest

from multignn import gallery
from multignn.generator import GeneratorParams, random_circulant
from multignn.graph import assign_ports, from_arrays
from multignn.harness import (
    ExperimentConfig,
    MetricsReport,
    ablation_configs,
    build_datasets,
    build_ego_index,
    evaluate,
    export_metrics,
    f1_score,
    load_config,
    load_metrics,
    minority_f1,
    minority_label,
    sample_ego,
    save_config,
    temporal_split,
    train,
)
from multignn.harness.train import ego_batch, prepare
from multignn.nn import ModelConfig, MultiGNN
from multignn.oracles import label_all

from _graphs import random_multigraph


def test_f1_hand_values():
    y = np.array([1, 1, 1, 0, 0])
    p = np.array([1, 1, 0, 1, 0])  # tp 2, fp 1, fn 1
    assert f1_score(y, p) == pytest.approx(2 / 3)
    assert f1_score(y, y) == 1.0
    assert f1_score(np.zeros(4), np.zeros(4)) == 0.0


def test_minority_f1_uses_rarer_class():
    y = np.array([0, 0, 0, 1])
    assert minority_label(y) == 1 and minority_label(1 - y) == 0
    logits = np.array([-1.0, -1.0, 2.0, 3.0])
    assert minority_f1(y, logits, 1) == pytest.approx(2 / 3)
    # when 0 is the minority, predicted negatives count as positives
    assert minority_f1(1 - y, -logits, 0) == pytest.approx(2 / 3)


def test_metrics_export_round_trip(tmp_path):
    rep = MetricsReport("m", ["c2", "sg"], [{"c2": 0.5, "sg": 0.25}, {"c2": 0.7, "sg": 0.75}])
    assert rep.mean["c2"] == pytest.approx(0.6) and rep.std["sg"] == pytest.approx(0.25)
    export_metrics([rep], tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines() == ["model,c2,sg", "m,0.6000,0.5000"]
    export_metrics([rep], tmp_path / "m.json", "json")
    back = load_metrics(tmp_path / "m.json")[0]
    assert back.per_seed == rep.per_seed and back.mean == rep.mean
    export_metrics([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == "model\n"
    with pytest.raises(ValueError):
        export_metrics([rep], tmp_path / "x", "xml")


def test_sample_ego_two_hops_both_directions():
    g = from_arrays(6, [0, 2, 2, 3, 5], [1, 1, 3, 4, 5])
    ports = assign_ports(g)
    sub = sample_ego(g, 1, 2, ports)
    assert sub.nodes[0] == 1 and sorted(sub.nodes.tolist()) == [0, 1, 2, 3]
    assert sub.edges.tolist() == [0, 1, 2]
    assert sub.ego_flag.tolist() == [1, 0, 0, 0]
    assert np.array_equal(sub.in_port, ports.in_port[sub.edges])
    iso = sample_ego(g, 5, 3, ports)
    assert iso.nodes.tolist() == [5] and iso.edges.tolist() == [4]  # self-loop kept


def test_sample_ego_cap_and_errors():
    g = from_arrays(8, [0] * 7, list(range(1, 8)))
    capped = sample_ego(g, 0, 1, assign_ports(g), neighbor_cap=3, seed=4)
    assert len(capped.nodes) == 4
    again = sample_ego(g, 0, 1, assign_ports(g), neighbor_cap=3, seed=4)
    assert np.array_equal(capped.nodes, again.nodes)
    with pytest.raises(ValueError):
        sample_ego(g, 0, 0, assign_ports(g))


@pytest.mark.parametrize("seed", range(5))
def test_ego_index_matches_sampler(seed):
    rng = np.random.default_rng(seed)
    g = random_multigraph(rng, 30, 50, loops=True)
    ports = assign_ports(g)
    ix = build_ego_index(g, 2)
    for c in range(g.n):
        sub = sample_ego(g, c, 2, ports)
        nodes = ix.nodes[ix.node_ptr[c]:ix.node_ptr[c + 1]]
        assert nodes[0] == c and set(nodes.tolist()) == set(sub.nodes.tolist())
        lo, hi = ix.edge_ptr[c], ix.edge_ptr[c + 1]
        assert ix.edges[lo:hi].tolist() == sub.edges.tolist()
        assert np.array_equal(nodes[ix.local_src[lo:hi]], g.src[ix.edges[lo:hi]])
        assert np.array_equal(nodes[ix.local_dst[lo:hi]], g.dst[ix.edges[lo:hi]])


def test_ego_batch_is_disjoint_union():
    g = random_circulant(GeneratorParams(40, 4, 2.0, 0))
    cfg = ModelConfig(num_layers=2, hidden_dim=4, ports=True, ego_ids=True)
    data = prepare(g, label_all(g).values, cfg, 2)
    batch = ego_batch(data, cfg, np.array([3, 7]), 2)
    first = data.ego.node_ptr[4] - data.ego.node_ptr[3]
    assert batch.targets.tolist() == [0, first]
    assert batch.node_features[:, -1].sum() == 2
    assert np.all((batch.src < first) == (batch.dst < first))
    # ego readout equals the full-graph readout when the ego graph covers the receptive field
    model = MultiGNN(cfg, 0)
    capped = ego_batch(data, cfg, np.array([3]), 2, neighbor_cap=100)
    assert np.allclose(model(capped).data, model(ego_batch(data, cfg, np.array([3]), 2)).data)


def test_temporal_edge_split():
    g = from_arrays(5, [0, 1, 2, 3, 4, 0, 1, 2, 3, 4], [1, 2, 3, 4, 0, 2, 3, 4, 0, 1], [5, 1, 1, 2, 3, 4, 6, 7, 8, 9])
    s = temporal_split(g)
    assert [len(m) for m in s.masks] == [6, 2, 2]
    assert s.masks[0].tolist() == [1, 2, 3, 4, 5, 0]  # ties by edge id
    assert s.snapshots[0].m == 6 and s.snapshots[1].m == 8 and s.snapshots[2] is g
    assert s.spec.t1 == 5 and s.spec.t2 == 7


def test_temporal_node_split():
    g = from_arrays(20, np.arange(19), np.arange(1, 20), np.arange(19))
    s = temporal_split(g, (0.65, 0.15, 0.20), mode="temporal_nodes")
    assert [len(m) for m in s.masks] == [13, 3, 4]
    assert s.spec.t1 == 11 and all(s.snapshots[0].timestamp <= 11)
    with pytest.raises(ValueError):
        temporal_split(g, (0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        temporal_split(g, mode="independent_graphs")


def _tiny(tasks=("deg_in",), **kw):
    model = ModelConfig(num_layers=2, hidden_dim=16, **kw.pop("model", {}))
    base = dict(generator=GeneratorParams(32, 6, 3.0, 0), tasks=list(tasks), model=model,
                epochs=200, batch_size=32, lr=1e-2, patience=200, hops=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_overfits_small_degree_task():
    exp = _tiny(model={"reverse_mp": True})
    data = build_datasets(exp)[0]
    res = train(exp, (data, data, data))  # validate on the training graph
    model = res.best_model()
    train_report = evaluate(model, data, data.labels, np.ones(32, bool), exp.tasks, hops=2)
    assert train_report.mean["deg_in"] == 1.0


def test_training_is_deterministic():
    exp = _tiny(("c2", "fan_out"), epochs=5, seeds=[3], model={"reverse_mp": True, "ports": True})
    a, b = train(exp), train(exp)
    assert a.report.loss_curves == b.report.loss_curves
    assert a.report.per_seed == b.report.per_seed


def test_seeds_fill_std_and_ego_model_trains():
    exp = _tiny(("c2",), epochs=2, seeds=[0, 1, 2, 3, 4], model={"ego_ids": True}, batch_size=8)
    res = train(exp)
    assert len(res.report.per_seed) == 5 and np.isfinite(res.report.std["c2"])
    assert res.report.config_hash == exp.hash()


def test_evaluate_checks_mask():
    g = gallery.out_degree_pair()
    model = MultiGNN(ModelConfig(num_layers=1, hidden_dim=2, num_outputs=11), 0)
    lab = label_all(g)
    with pytest.raises(ValueError, match="empty"):
        evaluate(model, g, lab, np.zeros(g.n, bool))
    rep = evaluate(model, g, lab, np.array([0, 1]))
    assert set(rep.mean) == set(rep.tasks) and len(rep.tasks) == 11


def test_ablation_rows():
    base = _tiny()
    rows = ablation_configs(base, ["reverse_mp", "ports", "ego_ids"])
    assert [r.name for r in rows] == ["baseline", "+reverse", "+reverse+ports", "+reverse+ports+ego"]
    assert not rows[0].model.reverse_mp and rows[2].model.ports and not rows[2].model.ego_ids
    assert rows[3].model.ego_ids and rows[3].model.reverse_mp
    assert len(ablation_configs(replace(base, model=replace(base.model, ports=True)), [])) == 1
    with pytest.raises(ValueError):
        ablation_configs(base, ["ports", "ports"])


def test_config_round_trip_and_hash(tmp_path):
    exp = _tiny(("sg", "C4"), neighbor_cap=5)
    save_config(exp, tmp_path / "c.json")
    back = load_config(tmp_path / "c.json")
    assert back == exp and back.hash() == exp.hash()
    assert back.tasks == ["sg", "c4"] and back.model.num_outputs == 2
    assert replace(exp, lr=0.5).hash() != exp.hash()


def test_config_validation():
    with pytest.raises(ValueError):
        _tiny(tasks=())
    with pytest.raises(ValueError):
        _tiny(epochs=0)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"version": 7})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _tiny(hops=3, model={"ego_ids": True})
    assert any("hops" in str(w.message) for w in caught)
