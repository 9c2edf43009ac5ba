# %% [markdown]
# Training on a small synthetic graph: the plain model against the model
# with reverse message passing, ports and ego IDs.

# %%
from dataclasses import replace

from multignn.generator import GeneratorParams
from multignn.harness import ExperimentConfig, train
from multignn.nn import ModelConfig

base = ExperimentConfig(
    generator=GeneratorParams(512, 6, 11.1, 0),
    tasks=["deg_out", "fan_out", "c2", "sg"],
    model=ModelConfig(num_layers=4, hidden_dim=24),
    epochs=30, batch_size=64, hops=3, eval_every=5, seeds=[0],
)
plain = replace(base, name="plain", epochs=150, batch_size=512)
full = replace(base, name="multi", model=replace(base.model, reverse_mp=True, ports=True, ego_ids=True))

for exp in (plain, full):
    report = train(exp, progress=print).report
    print(exp.name, {t: round(v, 3) for t, v in report.mean.items()})
