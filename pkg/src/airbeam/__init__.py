"""Active-RIS over-the-air beamforming and receive index modulation."""
from .beamforming import (
    max_min_sinr,
    optimize_reflection_mu,
    sinr_mu,
    sum_rate,
    zf_precoder,
    zf_sinr,
)
from .channels import ChannelSet, ReflectionVector, generate_channels, substream
from .config import Bisection, ConfigError, SystemConfig
from .kernels import BACKEND
from .receive_im import (
    ber_experiment,
    build_im_codebook,
    greedy_detect,
    im_spectral_efficiency,
    map_bits,
    ml_detect,
    received_signal_im,
    unmap_frame,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Bisection", "ChannelSet", "ConfigError", "ReflectionVector", "SystemConfig",
    "ber_experiment", "build_im_codebook", "generate_channels", "greedy_detect",
    "im_spectral_efficiency", "map_bits", "max_min_sinr", "ml_detect",
    "optimize_reflection_mu", "received_signal_im", "sinr_mu", "substream", "sum_rate",
    "unmap_frame", "zf_precoder", "zf_sinr",
]
