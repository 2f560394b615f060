"""Actor-critic network, its differentiation tape, state encoding and checkpoints."""
from . import autodiff
from .autodiff import Tape, Var
from .checkpoint import dumps_params, load_params, loads_params, save_params
from .encoding import CHANNEL_LEGENDS, encode_state, n_channels, time_encoding
from .network import ForwardResult, HeadSpec, NetworkParams, backward, forward, init_params, pool_replicate_conv

__all__ = [
    "CHANNEL_LEGENDS",
    "ForwardResult",
    "HeadSpec",
    "NetworkParams",
    "Tape",
    "Var",
    "autodiff",
    "backward",
    "dumps_params",
    "encode_state",
    "forward",
    "init_params",
    "load_params",
    "loads_params",
    "n_channels",
    "pool_replicate_conv",
    "save_params",
    "time_encoding",
]
