from .ablation import ADAPTATIONS, ablation_configs, run_ablation, size_sweep
from .metrics import (
    MetricsReport,
    confusion,
    export_metrics,
    f1_score,
    load_metrics,
    minority_f1,
    minority_label,
)
from .sampling import EgoIndex, EgoSubgraph, build_ego_index, khop_membership, sample_ego
from .splits import SplitSpec, TemporalSplit, temporal_split
from .train import (
    ExperimentConfig,
    SplitData,
    TrainingDiverged,
    TrainResult,
    build_datasets,
    evaluate,
    load_config,
    prepare,
    save_config,
    train,
)

__all__ = [
    "ADAPTATIONS", "EgoIndex", "EgoSubgraph", "ExperimentConfig", "MetricsReport", "SplitData",
    "SplitSpec", "TemporalSplit", "TrainResult", "TrainingDiverged", "ablation_configs",
    "build_datasets", "build_ego_index", "confusion", "evaluate", "export_metrics", "f1_score",
    "khop_membership", "load_config", "load_metrics", "minority_f1", "minority_label", "prepare",
    "run_ablation", "sample_ego", "save_config", "size_sweep", "temporal_split", "train",
]
