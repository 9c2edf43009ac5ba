"""Cumulative adaptation ablations and dataset-size sweeps."""
from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .metrics import MetricsReport, export_metrics
from .train import ExperimentConfig, train

ADAPTATIONS = ("reverse_mp", "ports", "ego_ids")
ROW_NAMES = {"reverse_mp": "+reverse", "ports": "+ports", "ego_ids": "+ego"}


def ablation_configs(base: ExperimentConfig, sequence: Sequence[str]) -> list[ExperimentConfig]:
    """One config per cumulative prefix of ``sequence``, baseline first.

    The baseline has every adaptation switched off regardless of ``base``.
    """
    for a in sequence:
        if a not in ADAPTATIONS:
            raise ValueError(f"unknown adaptation {a!r}; choose from {ADAPTATIONS}")
    if len(set(sequence)) != len(sequence):
        raise ValueError("adaptations may appear only once")
    flags = {a: False for a in ADAPTATIONS}
    names = ["baseline"]
    configs = [replace(base, name="baseline", model=replace(base.model, **flags))]
    for a in sequence:
        flags[a] = True
        names.append(names[-1] + ROW_NAMES[a] if names[-1] != "baseline" else ROW_NAMES[a])
        configs.append(replace(base, name=names[-1], model=replace(base.model, **flags)))
    return configs


def run_ablation(
    base: ExperimentConfig,
    sequence: Sequence[str] = ADAPTATIONS,
    out: str | Path | None = None,
    progress=None,
) -> list[MetricsReport]:
    """Train every cumulative variant; optionally write the variant-by-task CSV."""
    reports = []
    for cfg in ablation_configs(base, sequence):
        if progress:
            progress(f"== {cfg.name}")
        reports.append(train(cfg, progress=progress).report)
    if out is not None:
        export_metrics(reports, out, "csv")
    return reports


def size_sweep(
    base: ExperimentConfig,
    sizes: Sequence[int],
    out: str | Path | None = None,
    progress=None,
) -> list[MetricsReport]:
    """Same model on graphs of different sizes; degree and radius are kept."""
    reports = []
    for n in sizes:
        cfg = replace(base, name=f"n={n}", generator=replace(base.generator, n=n))
        if progress:
            progress(f"== {cfg.name}")
        reports.append(train(cfg, progress=progress).report)
    if out is not None:
        export_metrics(reports, out, "csv")
    return reports
