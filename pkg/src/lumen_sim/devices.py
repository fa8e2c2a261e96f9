"""Transfer-function models for the photonic primitives.

Multipliers are microring resonators (MRR, read out by balanced detection of
the Through and Drop ports) and Mach-Zehnder interferometers (MZI, used as
push-pull pairs for signed weights).  Summation happens on a photodiode and
the activation function lives on an electro-optic modulator (EOM).

All functions accept scalars or numpy arrays for the phase/voltage argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# CODATA 2018 exact values
Q_ELECTRON = 1.602176634e-19  # C
H_PLANCK = 6.62607015e-34  # J s
C_LIGHT = 2.99792458e8  # m / s
K_BOLTZMANN = 1.380649e-23  # J / K

MRR = "mrr"
MZI = "mzi"
BACKENDS = (MRR, MZI)


def check_backend(backend: str) -> str:
    b = str(backend).lower()
    if b not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return b


@dataclass(frozen=True)
class PhotodiodeParams:
    lambda_: float = 1550e-9
    eta: float = 0.8
    I_D: float = 1e-9
    R_SH: float = 10e3
    T_k: float = 300.0

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ValueError(f"wavelength must be positive, got {self.lambda_}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"quantum efficiency must lie in (0, 1], got {self.eta}")
        if not self.I_D >= 0:
            raise ValueError(f"dark current must be >= 0, got {self.I_D}")
        if not self.R_SH > 0:
            raise ValueError(f"shunt resistance must be positive, got {self.R_SH}")
        if not self.T_k > 0:
            raise ValueError(f"temperature must be positive, got {self.T_k}")


@dataclass(frozen=True)
class MRRParams:
    """Add-drop ring: single-pass amplitude ``a`` and self-coupling ``r1``/``r2``."""

    a: float = 1.0
    r1: float = 0.9
    r2: float = 0.9

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise ValueError(f"attenuation a must lie in (0, 1], got {self.a}")
        for name in ("r1", "r2"):
            r = getattr(self, name)
            if not 0 <= r < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {r}")


@dataclass(frozen=True)
class MZIParams:
    split_imbalance: float = 0.0
    insertion_loss: float = 1.0

    def __post_init__(self):
        if not 0 <= self.split_imbalance < 0.5:
            raise ValueError(f"split_imbalance must lie in [0, 0.5), got {self.split_imbalance}")
        if not 0 < self.insertion_loss <= 1:
            raise ValueError(f"insertion_loss must lie in (0, 1], got {self.insertion_loss}")


@dataclass(frozen=True)
class EOMParams:
    """Modulator with half-wave voltage ``v_pi``; ``v_bias`` defaults to ``v_pi / 2``."""

    v_pi: float = 8.0
    v_bias: float | None = None

    def __post_init__(self):
        if not self.v_pi > 0:
            raise ValueError(f"v_pi must be positive, got {self.v_pi}")
        if self.v_bias is None:
            object.__setattr__(self, "v_bias", self.v_pi / 2)


# -- photodiode ------------------------------------------------------------

def responsivity(p: PhotodiodeParams) -> float:
    """Photodiode responsivity ``lambda * q / (h c) * eta`` in A/W."""
    return p.lambda_ * Q_ELECTRON / (H_PLANCK * C_LIGHT) * p.eta


def photocurrent(P_in, R: float):
    P_in = np.asarray(P_in, dtype=np.float64)
    if np.any(P_in < 0):
        raise ValueError("optical power must be non-negative")
    out = R * P_in
    return float(out) if out.ndim == 0 else out


# -- microring -------------------------------------------------------------

# 1 - cos(phi) is rewritten as 2 sin^2(phi/2) so that on-resonance
# extinction of a critically coupled ring evaluates to exactly zero.

def _ring_denominator(phi, m: MRRParams):
    rra = m.r1 * m.r2 * m.a
    return (1.0 - rra) ** 2 + 4.0 * rra * np.sin(0.5 * np.asarray(phi)) ** 2


def mrr_through(phi, m: MRRParams):
    """Power transmission of the Through port at round-trip phase ``phi``.

    Equal to ``(r2^2 a^2 - 2 r1 r2 a cos(phi) + r1^2) / (1 - 2 r1 r2 a cos(phi) + (r1 r2 a)^2)``.
    """
    rra = m.r1 * m.r2 * m.a
    num = (m.r1 - m.r2 * m.a) ** 2 + 4.0 * rra * np.sin(0.5 * np.asarray(phi)) ** 2
    return num / _ring_denominator(phi, m)


def mrr_drop(phi, m: MRRParams):
    """Power transmission of the Drop port (standard add-drop ring result)."""
    return (1.0 - m.r1**2) * (1.0 - m.r2**2) * m.a / _ring_denominator(phi, m)


def mrr_weight(phi, m: MRRParams):
    """Balanced-detection weight ``T_through - T_drop``, in [-1, 1]."""
    return mrr_through(phi, m) - mrr_drop(phi, m)


# -- Mach-Zehnder ------------------------------------------------------------

def mzi_weight(delta_phi, z: MZIParams):
    """Single-MZI power transmission in ``[2 eps^2, 1 - 2 eps^2] * loss``.

    Reduces to ``loss * cos^2(delta_phi / 2)`` for a 50:50 splitter.
    """
    eps = z.split_imbalance
    plus, minus = 0.5 + eps, 0.5 - eps
    # 2 (1 + cos x) == 4 cos^2(x / 2)
    half = np.cos(0.5 * np.asarray(delta_phi))
    return z.insertion_loss * (plus * minus * 4.0 * half * half + (plus - minus) ** 2 * 0.5)


def mzi_pair_weight(phase_plus, phase_minus, z: MZIParams):
    """Signed weight of a push-pull pair, ``w(phase_plus) - w(phase_minus)``."""
    return mzi_weight(phase_plus, z) - mzi_weight(phase_minus, z)


# -- EOM activation ----------------------------------------------------------

def eom_activation(v, e: EOMParams):
    """Quadrature-biased cos^2 modulator response, monotone in ``v`` and in [0, 1]."""
    u = np.clip((e.v_bias - np.asarray(v, dtype=np.float64)) / e.v_pi, 0.0, 1.0)
    return np.cos(0.5 * math.pi * u) ** 2


def eom_activation_grad(v, e: EOMParams):
    """Derivative of :func:`eom_activation` with respect to ``v`` (zero where clamped)."""
    raw = (e.v_bias - np.asarray(v, dtype=np.float64)) / e.v_pi
    inside = (raw > 0.0) & (raw < 1.0)
    # d/dv cos^2(pi/2 u) = sin(pi u) * pi/2 / v_pi
    return np.where(inside, np.sin(math.pi * raw) * (0.5 * math.pi / e.v_pi), 0.0)


# -- weight calibration ------------------------------------------------------

CALIBRATION_TOL = 1e-9
_BISECT_STEPS = 100


@dataclass(frozen=True)
class Calibration:
    """Realizable signed weight range of one multiplier for a backend."""

    backend: str
    w_min: float
    w_max: float
    tol: float = CALIBRATION_TOL

    @property
    def symmetric_limit(self) -> float:
        """Largest ``L`` with ``[-L, L]`` inside the realizable range."""
        return min(-self.w_min, self.w_max)


@dataclass(frozen=True)
class CalibrationResult:
    phase: np.ndarray  # MRR: detuning phi; MZI: (..., 2) push-pull phases
    achieved: np.ndarray
    clipped: np.ndarray

    def __iter__(self):
        return iter((self.phase, self.achieved, self.clipped))


def _mzi_single_range(z: MZIParams) -> tuple[float, float]:
    return float(mzi_weight(math.pi, z)), float(mzi_weight(0.0, z))


def calibration_range(backend: str, params) -> Calibration:
    backend = check_backend(backend)
    if backend == MRR:
        return Calibration(MRR, float(mrr_weight(0.0, params)), float(mrr_weight(math.pi, params)))
    lo, hi = _mzi_single_range(params)
    return Calibration(MZI, -(hi - lo), hi - lo)


def _bisect(f, target, increasing: bool):
    """Invert ``f`` monotone on [0, pi] elementwise by bisection."""
    lo = np.zeros_like(target)
    hi = np.full_like(target, math.pi)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = f(mid) < target
        go_right = below if increasing else ~below
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def calibrate(target_w, backend: str, params) -> CalibrationResult:
    """Find the phase setting(s) realizing ``target_w`` on the principal branch.

    Targets outside the realizable range are clamped to the nearest endpoint
    and flagged in ``clipped``.  Works elementwise on arrays; scalars in give
    0-d arrays out.
    """
    backend = check_backend(backend)
    target = np.asarray(target_w, dtype=np.float64)
    if not np.all(np.isfinite(target)):
        raise ValueError("calibration target must be finite")
    cal = calibration_range(backend, params)
    clipped = (target < cal.w_min) | (target > cal.w_max)
    t = np.clip(target, cal.w_min, cal.w_max)

    if backend == MRR:
        phase = _bisect(lambda p: mrr_weight(p, params), t, increasing=True)
        phase = np.where(t == cal.w_min, 0.0, np.where(t == cal.w_max, math.pi, phase))
        achieved = mrr_weight(phase, params)
        return CalibrationResult(phase, achieved, clipped)

    lo, _ = _mzi_single_range(params)
    plus = lo + np.maximum(t, 0.0)
    minus = lo + np.maximum(-t, 0.0)
    f = lambda p: mzi_weight(p, params)  # noqa: E731
    ph_plus = _bisect(f, plus, increasing=False)
    ph_minus = _bisect(f, minus, increasing=False)
    # full-scale targets sit where the transfer is flat; set them exactly
    ph_plus = np.where(t <= 0.0, math.pi, np.where(t == cal.w_max, 0.0, ph_plus))
    ph_minus = np.where(t >= 0.0, math.pi, np.where(t == cal.w_min, 0.0, ph_minus))
    phase = np.stack([ph_plus, ph_minus], axis=-1)
    achieved = mzi_pair_weight(ph_plus, ph_minus, params)
    return CalibrationResult(phase, achieved, clipped)


@dataclass(frozen=True)
class DeviceParams:
    """All device parameter records used by one simulation run."""

    mrr: MRRParams = MRRParams()
    mzi: MZIParams = MZIParams()
    photodiode: PhotodiodeParams = PhotodiodeParams()
    eom: EOMParams = EOMParams()

    def multiplier(self, backend: str):
        return self.mrr if check_backend(backend) == MRR else self.mzi
