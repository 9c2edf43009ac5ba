from .checkpoint import load as load_checkpoint, save as save_checkpoint
from .gradcheck import GradCheckReport, NonFiniteGradient, backward, grad_check
from .layers import (
    GnnLayerConfig,
    GraphBatch,
    Linear,
    MLP,
    ModelConfig,
    MPLayer,
    MultiGNN,
    mp_forward,
    readout_edge,
    readout_node,
)
from .optim import Adam, AdamState, sgd_adam_step
from .tensor import Segments, Tensor, concat, no_grad, gather_rows, parameter, segment_max, segment_sum, weighted_bce_loss

__all__ = [
    "Adam", "AdamState", "GnnLayerConfig", "GradCheckReport", "GraphBatch", "Linear", "MLP",
    "ModelConfig", "MPLayer", "MultiGNN", "NonFiniteGradient", "Segments", "Tensor", "backward",
    "concat", "gather_rows", "grad_check", "load_checkpoint", "mp_forward", "no_grad", "parameter",
    "readout_edge", "readout_node", "save_checkpoint", "segment_max", "segment_sum",
    "sgd_adam_step", "weighted_bce_loss",
]
