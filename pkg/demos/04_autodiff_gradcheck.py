# %% [markdown]
# The reverse-mode engine and a finite-difference check of a full model.

# %%
import numpy as np

from multignn.generator import GeneratorParams, random_circulant
from multignn.harness.train import full_batch, prepare
from multignn.nn import ModelConfig, MultiGNN, grad_check, parameter
from multignn.oracles import label_all

x = parameter(np.array([0.5, -1.5, 2.0]))
y = (x * x).relu().sum() + x.sigmoid().mean()
y.backward()
print("d/dx:", x.grad)

# %%
g = random_circulant(GeneratorParams(24, 4, 3.0, 1))
labels = label_all(g).values
for agg in ("sum", "max"):
    cfg = ModelConfig(num_layers=2, hidden_dim=6, aggregation=agg, reverse_mp=True, ports=True)
    batch = full_batch(prepare(g, labels, cfg, 2), cfg)
    print(agg, grad_check(MultiGNN(cfg, 0), batch, labels, eps=1e-3, minority_class_weight=2.0))
