"""Photonic neural network inference simulator.

Replaces ideal multiply/add/activation arithmetic with models of microring
and Mach-Zehnder weight banks, noisy photodetector summation and
electro-optic activations, and estimates the static power of the result.
"""

from .devices import (
    DeviceParams,
    EOMParams,
    MRRParams,
    MZIParams,
    PhotodiodeParams,
    calibrate,
    eom_activation,
    mrr_drop,
    mrr_through,
    mrr_weight,
    mzi_weight,
    photocurrent,
    responsivity,
)
from .engine import (
    AccuracyReport,
    EncodingConfig,
    PhotonicModel,
    TrainConfig,
    evaluate,
    forward_ideal,
    forward_photonic,
    train,
)
from .idx import load_idx
from .lowering import DeviceCensus, census, census_from_shape, lower
from .network import NetworkSpec, builtin, mlp
from .noise import NoiseConfig, RngStream, sample_noisy_current, shot_noise_sigma, thermal_noise_sigma
from .power import PowerParams, estimate_power, power_sweep
from .weights import WeightSet, load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "builtin",
    "calibrate",
    "census",
    "census_from_shape",
    "DeviceCensus",
    "DeviceParams",
    "EncodingConfig",
    "eom_activation",
    "EOMParams",
    "estimate_power",
    "evaluate",
    "forward_ideal",
    "forward_photonic",
    "load_idx",
    "load_weights",
    "lower",
    "mlp",
    "mrr_drop",
    "mrr_through",
    "mrr_weight",
    "MRRParams",
    "mzi_weight",
    "MZIParams",
    "NetworkSpec",
    "NoiseConfig",
    "photocurrent",
    "PhotodiodeParams",
    "PhotonicModel",
    "power_sweep",
    "PowerParams",
    "responsivity",
    "RngStream",
    "sample_noisy_current",
    "save_weights",
    "shot_noise_sigma",
    "thermal_noise_sigma",
    "train",
    "TrainConfig",
    "WeightSet",
]
