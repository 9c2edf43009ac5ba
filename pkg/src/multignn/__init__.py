"""Message passing on directed multigraphs with reverse edges, port numbers and ego IDs."""
from .generator import GeneratorParams, generate_split_graphs, random_circulant
from .graph import (
    DirectedMultigraph,
    EdgeRecord,
    GraphError,
    PortAssignment,
    assign_ports,
    build_graph,
    degree_in,
    degree_out,
    fan_in,
    fan_out,
    from_arrays,
    read_edge_csv,
    relabel_graph,
    write_edge_csv,
)
from .nodeid import assign_unique_ids, wl_refine
from .oracles import ALL_TASKS, LabelMatrix, TaskId, label_all

__version__ = "0.1.0"
