"""Single layers with hand-set weights whose output is an exact count."""
import numpy as np

from multignn.graph import assign_ports
from multignn.nn import GnnLayerConfig, GraphBatch, MPLayer, mp_forward


def _zeroed(cfg, edge_dim):
    layer = MPLayer(cfg, 1, edge_dim, np.random.default_rng(0))
    for p in layer.parameters():
        p.data = np.zeros_like(p.data)
    return layer


def _select(layer, column):
    """Make the update MLP output input column ``column`` (a non-negative count)."""
    first, second = layer.update.layers
    first.weight.data[column, 0] = 1.0
    second.weight.data[0, 0] = 1.0


def out_degree_layer():
    layer = _zeroed(GnnLayerConfig(1, "sum", False, True), 0)
    layer.msg_out.node_weight.data[0, 0] = 1.0  # every outgoing edge sends relu(h) = 1
    _select(layer, 2)  # concat(h, a_in, a_out)
    return layer


def fan_in_layer():
    layer = _zeroed(GnnLayerConfig(1, "max", True, False), 2)
    layer.msg_in.edge_weight.data[0, 0] = 1.0  # message = in-port
    _select(layer, 1)
    return layer


def fan_out_layer():
    layer = _zeroed(GnnLayerConfig(1, "max", True, True), 2)
    layer.msg_out.edge_weight.data[1, 0] = 1.0  # message = out-port
    _select(layer, 2)
    return layer


def run(layer, g):
    p = assign_ports(g)
    feats = np.stack([p.in_port, p.out_port], axis=1).astype(float)
    edge = feats if layer.edge_dim else np.zeros((g.m, 0))
    batch = GraphBatch(g.n, g.src, g.dst, np.ones((g.n, 1)), edge)
    return mp_forward(layer, np.ones((g.n, 1)), edge, batch).data[:, 0]
