"""Complex-baseband building blocks: chirps, tones, DFT and inner products.

Everything operates on 1-D complex128 numpy arrays. A chirped symbol holds
M = 2**lam samples with lam in [6, 12]; the DFT helpers accept any
power-of-two length so short hand-checkable vectors work too.

Integer phase arguments are reduced modulo their period before the complex
exponential is evaluated, so every chirp/tone sample is an exact root of
unity up to one rounding of exp().
"""

from __future__ import annotations

import numpy as np

UPCHIRP = 1
DOWNCHIRP = -1

LAMBDA_MIN = 6
LAMBDA_MAX = 12
MIN_SYMBOL_LEN = 1 << LAMBDA_MIN
MAX_SYMBOL_LEN = 1 << LAMBDA_MAX


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def check_symbol_length(m: int) -> int:
    """Validate a chirped-symbol length M = 2**lam with lam in [6, 12]."""
    if not isinstance(m, (int, np.integer)):
        raise ValueError(f"symbol length must be an integer, got {m!r}")
    m = int(m)
    if not is_power_of_two(m) or not (MIN_SYMBOL_LEN <= m <= MAX_SYMBOL_LEN):
        raise ValueError(
            f"symbol length must be 2**lam with lam in "
            f"[{LAMBDA_MIN}, {LAMBDA_MAX}], got {m}"
        )
    return m


def make_chirp(m: int, slope: int) -> np.ndarray:
    """Unit-modulus linear chirp exp(j*pi*slope*n^2/M).

    slope is +1 for the up-chirp, -1 for the down-chirp.
    """
    m = check_symbol_length(m)
    if slope not in (UPCHIRP, DOWNCHIRP):
        raise ValueError(f"slope must be +1 or -1, got {slope!r}")
    n = np.arange(m, dtype=np.int64)
    phase = (slope * n * n) % (2 * m)  # exp(j*pi*x/M) has period 2M in x
    return np.exp(1j * np.pi * phase / m)


def make_tone(m: int, idx: int) -> np.ndarray:
    """Pure tone exp(j*2*pi*idx*n/M) on integer DFT bin idx."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"tone length must be a positive integer, got {m!r}")
    m = int(m)
    if not isinstance(idx, (int, np.integer)) or not (0 <= idx < m):
        raise ValueError(f"tone index must lie in [0, {m - 1}], got {idx!r}")
    n = np.arange(m, dtype=np.int64)
    return np.exp(2j * np.pi * ((int(idx) * n) % m) / m)


def _check_dft_length(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D sample vector, got shape {x.shape}")
    if not is_power_of_two(x.shape[0]):
        raise ValueError(f"length must be a power of two, got {x.shape[0]}")
    return x


def dft(x: np.ndarray) -> np.ndarray:
    """DFT with bin k = sum_n x(n) exp(-j*2*pi*k*n/M); length a power of two."""
    return np.fft.fft(_check_dft_length(x))


def idft(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft` (1/M-normalized)."""
    return np.fft.ifft(_check_dft_length(x))


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """sum_n a(n) * conj(b(n)) for equal-length vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(b, a))  # vdot conjugates its first argument


def symbol_energy(x: np.ndarray) -> float:
    """Per-sample mean power (1/M) * sum_n |x(n)|^2."""
    x = np.asarray(x)
    return float(np.mean(x.real**2 + x.imag**2))
