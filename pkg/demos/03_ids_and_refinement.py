# %% [markdown]
# Unique node IDs from a port-numbered BFS, and colour refinement with and
# without the multigraph adaptations.

# %%
from multignn import gallery
from multignn.graph import assign_ports
from multignn.nodeid import assign_unique_ids, format_label, wl_refine

g = gallery.bfs_id_example()
res = assign_unique_ids(g, root=g.node_index("A"))
for v, lab in sorted(res.labels.items(), key=lambda kv: (len(kv[1]), kv[1])):
    declined = [format_label(p, res.base) for p in res.declined(v)]
    print(f"{g.node_label(v):3s} {format_label(lab, res.base):>4s}  declined {declined}")

# %%
left, right = gallery.two_triangles_with_hub(), gallery.hexagon_with_hub()


def root_colour(graph, **kw):
    ports = assign_ports(graph) if kw.pop("ports", False) else None
    return wl_refine(graph, 8, ego_root=0, ports=ports, **kw).final()[0]


print("ego mark only:      same =", root_colour(left) == root_colour(right))
print("+ reverse:          same =", root_colour(left, reverse=True) == root_colour(right, reverse=True))
print("+ reverse + ports:  same =",
      root_colour(left, reverse=True, ports=True) == root_colour(right, reverse=True, ports=True))
