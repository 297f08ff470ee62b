"""Channel impairments: two-tap fading, complex gain, frequency/phase offset, AWGN.

:func:`run_chain` applies the stages of a :class:`ChannelSpec` in a fixed
order: fading -> gain -> frequency offset -> AWGN -> phase offset. The phase
offset deliberately comes after the noise: a receiver phase rotation then
multiplies the whole observation, which is equivalent in distribution to
rotating the signal alone (the noise is circularly symmetric) and keeps
magnitude-based detection invariant realization by realization, not just on
average.

All operations broadcast over leading axes, so a (N, M) batch of symbols is
processed the same way as a single (M,) vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelSpec:
    """Impairment chain description.

    gain: complex scalar applied to the (possibly faded) signal.
    noise_sigma2: per-sample complex noise variance (sigma2/2 per real axis).
    fading_rho: power split of a two-tap channel sqrt(1-rho), sqrt(rho) at a
        one-sample delay; None disables fading.
    phase_offset: radians.
    freq_offset: cycles per M-sample symbol, i.e. exp(j*2*pi*df*n/M).
    """

    gain: complex = 1.0 + 0.0j
    noise_sigma2: float = 0.0
    fading_rho: float | None = None
    phase_offset: float = 0.0
    freq_offset: float = 0.0

    def __post_init__(self):
        g = complex(self.gain)
        if not (math.isfinite(g.real) and math.isfinite(g.imag)):
            raise ValueError(f"gain must be finite, got {g!r}")
        object.__setattr__(self, "gain", g)
        s2 = float(self.noise_sigma2)
        if not math.isfinite(s2) or s2 < 0:
            raise ValueError(f"noise_sigma2 must be finite and >= 0, got {s2!r}")
        object.__setattr__(self, "noise_sigma2", s2)
        if self.fading_rho is not None:
            rho = float(self.fading_rho)
            if not (0.0 <= rho <= 1.0):
                raise ValueError(f"fading_rho must lie in [0, 1], got {rho!r}")
            object.__setattr__(self, "fading_rho", rho)
        for name in ("phase_offset", "freq_offset"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    def detector_gain(self) -> complex:
        """Gain a coherent detector should assume: scalar gain times the
        first fading tap sqrt(1-rho) (no per-bin equalization)."""
        g = self.gain
        if self.fading_rho is not None:
            g *= math.sqrt(1.0 - self.fading_rho)
        return g

    def to_dict(self) -> dict:
        return {
            "gain": [self.gain.real, self.gain.imag],
            "noise_sigma2": self.noise_sigma2,
            "fading_rho": self.fading_rho,
            "phase_offset": self.phase_offset,
            "freq_offset": self.freq_offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSpec":
        d = dict(d)
        gain = d.pop("gain", 1.0)
        if isinstance(gain, (list, tuple)):
            if len(gain) != 2:
                raise ValueError(f"gain must be a number or [re, im], got {gain!r}")
            gain = complex(float(gain[0]), float(gain[1]))
        else:
            gain = complex(gain)
        known = {"noise_sigma2", "fading_rho", "phase_offset", "freq_offset"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown channel fields: {sorted(unknown)}")
        return cls(gain=gain, **d)


class NoiseSource:
    """Deterministic complex-Gaussian stream; equal seeds give equal samples.

    seed may be an int or a tuple of ints (hashed by numpy's SeedSequence).
    """

    def __init__(self, seed):
        self.seed = seed
        self._rng = np.random.default_rng(np.random.SeedSequence(seed))

    def complex_normal(self, shape) -> np.ndarray:
        """Circularly-symmetric samples with unit per-sample variance."""
        re = self._rng.standard_normal(shape)
        im = self._rng.standard_normal(shape)
        return (re + 1j * im) * math.sqrt(0.5)


def apply_awgn(s: np.ndarray, sigma2: float, noise: NoiseSource) -> np.ndarray:
    """Add circular complex Gaussian noise of per-sample variance sigma2."""
    sigma2 = float(sigma2)
    if not math.isfinite(sigma2) or sigma2 < 0:
        raise ValueError(f"noise variance must be finite and >= 0, got {sigma2!r}")
    s = np.asarray(s)
    if sigma2 == 0.0:
        return s.copy()
    return s + math.sqrt(sigma2) * noise.complex_normal(s.shape)


def apply_fading(s: np.ndarray, rho: float) -> np.ndarray:
    """Two-tap convolution sqrt(1-rho)*s(n) + sqrt(rho)*s(n-1), s(-1) = 0."""
    rho = float(rho)
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"fading_rho must lie in [0, 1], got {rho!r}")
    s = np.asarray(s)
    y = math.sqrt(1.0 - rho) * s
    y[..., 1:] += math.sqrt(rho) * s[..., :-1]
    return y


def apply_phase_offset(s: np.ndarray, psi: float) -> np.ndarray:
    """Rotate every sample by exp(j*psi)."""
    return np.asarray(s) * np.exp(1j * float(psi))


def apply_freq_offset(s: np.ndarray, dfreq: float) -> np.ndarray:
    """Multiply sample n by exp(j*2*pi*dfreq*n/M) along the last axis."""
    s = np.asarray(s)
    m = s.shape[-1]
    n = np.arange(m)
    phase = (float(dfreq) * n) % m  # keeps exp() arguments small and exact at df=M
    return s * np.exp(2j * np.pi * phase / m)


def noiseless_front(s: np.ndarray, spec: ChannelSpec) -> np.ndarray:
    """The deterministic stages before noise: fading -> gain -> freq offset."""
    y = np.asarray(s)
    if spec.fading_rho is not None:
        y = apply_fading(y, spec.fading_rho)
    if spec.gain != 1.0 + 0.0j:
        y = spec.gain * y
    if spec.freq_offset != 0.0:
        y = apply_freq_offset(y, spec.freq_offset)
    return y


def run_chain(s: np.ndarray, spec: ChannelSpec, noise: NoiseSource | None = None) -> np.ndarray:
    """Apply the full impairment chain (see module docstring for the order)."""
    y = noiseless_front(s, spec)
    if spec.noise_sigma2 > 0.0:
        if noise is None:
            raise ValueError("a NoiseSource is required when noise_sigma2 > 0")
        y = apply_awgn(y, spec.noise_sigma2, noise)
    if spec.phase_offset != 0.0:
        y = apply_phase_offset(y, spec.phase_offset)
    return y


def ebn0_db_to_sigma2(ebn0_db: float, symbol_power, m: int, n_bits: int):
    """Per-sample noise variance from Eb/N0 in dB.

    Convention: per-sample SNR = P_s / sigma2 with P_s = (1/M) sum |s(n)|^2
    measured on the transmitted symbol, and Eb/N0 = SNR * M / n_bits.
    symbol_power may be a scalar or an array of per-symbol powers.
    """
    ebn0_db = float(ebn0_db)
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return np.zeros_like(np.asarray(symbol_power, dtype=float)) if np.ndim(symbol_power) else 0.0
    lin = 10.0 ** (ebn0_db / 10.0)
    if lin == 0.0:
        raise ValueError(f"noise calibration is not finite for Eb/N0 = {ebn0_db} dB")
    sigma2 = np.asarray(symbol_power, dtype=float) * m / (n_bits * lin)
    if not np.all(np.isfinite(sigma2)):
        raise ValueError(f"noise calibration is not finite for Eb/N0 = {ebn0_db} dB")
    if np.ndim(symbol_power) == 0:
        return float(sigma2)
    return sigma2
