# %% [markdown]
# Directed multigraphs and port numbers.
# Parallel edges from the same neighbour share a port; ports are ranked by
# the earliest edge from (or to) each neighbour.

# %%
import numpy as np

from multignn import gallery
from multignn.graph import assign_ports, degrees, from_arrays

g = gallery.fan_in_parallel()
print(f"{g.n} nodes, {g.m} edges")
for e, (a, b) in enumerate(assign_ports(g).pairs()):
    print(f"edge {e}: {g.node_label(g.src[e])} -> {g.node_label(g.dst[e])}  in_port={a} out_port={b}")

# %%
# degree counts edges, fan counts distinct neighbours
t = g.node_index("t")
d = degrees(g)
print("deg_in(t) =", d["deg_in"][t], " fan_in(t) =", d["fan_in"][t])

# %%
# timestamps decide the order, not edge ids
h = from_arrays(3, [1, 2, 1], [0, 0, 0], [5, 2, 9])
print("in ports at node 0:", assign_ports(h).in_port.tolist())  # node 2 sent first
