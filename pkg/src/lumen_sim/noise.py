"""Photodiode shot/thermal noise and reproducible per-event Gaussian sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .devices import K_BOLTZMANN, Q_ELECTRON, PhotodiodeParams

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = True
    delta_f: float = 1e9
    noise_scale: float = 1.0
    photodiode: PhotodiodeParams = field(default_factory=PhotodiodeParams)

    def __post_init__(self):
        if not self.delta_f >= 0:
            raise ValueError(f"delta_f must be >= 0, got {self.delta_f}")
        if not self.noise_scale >= 0:
            raise ValueError(f"noise_scale must be >= 0, got {self.noise_scale}")

    @property
    def active(self) -> bool:
        return self.enabled and self.delta_f > 0 and self.noise_scale > 0

    def with_(self, **kw) -> "NoiseConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class RngStream:
    """Coordinates of a deterministic stream of standard normal draws.

    The stream for ``(global_seed, sample_index, node_id)`` is a Philox
    sequence keyed by seed and sample and offset by node; ``draw_counter``
    is the position of the first draw within it.  The same coordinates
    always give the same numbers, whatever else has been drawn before.
    """

    global_seed: int
    sample_index: int = 0
    node_id: int = 0
    draw_counter: int = 0

    def generator(self) -> np.random.Generator:
        bitgen = np.random.Philox(
            key=[self.global_seed & _MASK64, self.sample_index & _MASK64],
            counter=[0, 0, self.node_id & _MASK64, 0],
        )
        return np.random.Generator(bitgen)

    def normal(self, n: int | tuple = 1) -> np.ndarray:
        size = int(np.prod(n))
        g = self.generator()
        draws = g.standard_normal(self.draw_counter + size)[self.draw_counter:]
        return draws.reshape(n)

    def at(self, **coords) -> "RngStream":
        return replace(self, **coords)


def shot_noise_sigma(I_ph, I_D: float, delta_f: float):
    """RMS shot-noise current ``sqrt(2 q (I_ph + I_D) delta_f)`` in A."""
    return np.sqrt(2.0 * Q_ELECTRON * (np.asarray(I_ph, dtype=np.float64) + I_D) * delta_f)


def thermal_noise_sigma(T_k: float, delta_f: float, R_SH: float):
    """RMS Johnson noise current of the shunt resistance ``sqrt(4 k_B T delta_f / R_SH)``."""
    if not T_k > 0 or not R_SH > 0:
        raise ValueError("temperature and shunt resistance must be positive")
    return math.sqrt(4.0 * K_BOLTZMANN * T_k * delta_f / R_SH)


def total_noise_sigma(I_ph, cfg: NoiseConfig):
    """Quadrature sum of shot and thermal noise; shot noise uses ``|I_ph|``."""
    pd = cfg.photodiode
    shot = shot_noise_sigma(np.abs(I_ph), pd.I_D, cfg.delta_f)
    thermal = thermal_noise_sigma(pd.T_k, cfg.delta_f, pd.R_SH)
    return np.sqrt(shot * shot + thermal * thermal)


def add_noise(I_ph, cfg: NoiseConfig, draws):
    """Perturb currents with pre-drawn standard normals ``draws`` (same shape)."""
    I_ph = np.asarray(I_ph, dtype=np.float64)
    if not cfg.active:
        return I_ph
    return I_ph + cfg.noise_scale * total_noise_sigma(I_ph, cfg) * draws


def sample_noisy_current(I_ph, cfg: NoiseConfig, rng: RngStream):
    """Detector current with shot and thermal noise drawn from ``rng``.

    Array input draws consecutive values of the stream in row-major order.
    """
    I_ph = np.asarray(I_ph, dtype=np.float64)
    if not cfg.active:
        return I_ph if I_ph.ndim else float(I_ph)
    out = add_noise(I_ph, cfg, rng.normal(I_ph.shape or 1).reshape(I_ph.shape))
    return out if out.ndim else float(out)
