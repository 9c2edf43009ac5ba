# %% [markdown]
# Ground-truth labels for the eleven detection tasks on a random circulant graph.

# %%
from multignn import gallery
from multignn.generator import GeneratorParams, random_circulant, ring_distance
from multignn.oracles import TaskId, label_all, label_cycles

g = random_circulant(GeneratorParams(n=8192, d=6, r=11.1, seed=0))
print(f"{g.n} nodes, {g.m} edges, mean ring distance {ring_distance(g).mean():.2f}")

labels = label_all(g)
for task, ratio in labels.ratios.items():
    print(f"{task:8s} {ratio:.3f}")

# %%
# a node is on a 5-cycle of the hexagon-plus-hub graph but not of the two-triangle one
left, right = gallery.two_triangles_with_hub(), gallery.hexagon_with_hub()
print("hub on a 5-cycle:", label_cycles(left, 5)[0], label_cycles(right, 5)[0])

# %%
sg = gallery.scatter_gather_example()
print("scatter-gather sinks:", [sg.node_label(v) for v in label_all(sg, [TaskId.ScatterGather]).values[:, 0].nonzero()[0]])
