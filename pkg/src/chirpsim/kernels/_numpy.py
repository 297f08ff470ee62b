"""Vectorized numpy implementation of the batch modem kernels.

Symbols are synthesized by indexing a table of the 2M-th roots of unity:
every chirped-tone sample equals exp(j*pi*t/M) for an integer t, so the
integer phase (2*k*n +/- n^2) mod 2M selects the exact sample value.

Index arrays are int64 and hold the compressed indices each scheme maps its
bits to; detectors return the same compressed form. Decision statistics are
|X(k)|^2 (non-coherent, argmax-equivalent to |X(k)|) or Re(conj(h) * X(k))
(coherent); argmax takes the first maximum, i.e. ties break toward the
smallest bin.
"""

from __future__ import annotations

import numpy as np

_roots: dict[int, np.ndarray] = {}
_chirps: dict[tuple[int, int], np.ndarray] = {}


def roots_table(m: int) -> np.ndarray:
    """w[t] = exp(j*pi*t/M) for t in [0, 2M)."""
    tab = _roots.get(m)
    if tab is None:
        tab = np.exp(1j * np.pi * np.arange(2 * m) / m)
        tab.setflags(write=False)
        _roots[m] = tab
    return tab


def chirp_table(m: int, slope: int) -> np.ndarray:
    tab = _chirps.get((m, slope))
    if tab is None:
        n = np.arange(m, dtype=np.int64)
        tab = roots_table(m)[(slope * n * n) % (2 * m)]
        tab.setflags(write=False)
        _chirps[(m, slope)] = tab
    return tab


def _chirped_tone(bins: np.ndarray, slope: int, m: int) -> np.ndarray:
    """Rows exp(j*pi*(2*k*n + slope*n^2)/M) for each tone bin k."""
    w = roots_table(m)
    n = np.arange(m, dtype=np.int64)
    n2 = slope * n * n
    return w[(2 * bins[:, None] * n + n2) % (2 * m)]


def dmtdm_modulate(idx: np.ndarray, m: int) -> np.ndarray:
    """(N, 4) compressed indices (ke1, ko1, ke2, ko2) -> (N, M) symbols."""
    idx = np.asarray(idx, dtype=np.int64)
    s = _chirped_tone(2 * idx[:, 0], 1, m)
    s += _chirped_tone(2 * idx[:, 1] + 1, 1, m)
    s += _chirped_tone(2 * idx[:, 2], -1, m)
    s += _chirped_tone(2 * idx[:, 3] + 1, -1, m)
    return s


def lora_modulate(k: np.ndarray, m: int) -> np.ndarray:
    """(N,) tone indices -> (N, M) frequency-shifted up-chirps."""
    return _chirped_tone(np.asarray(k, dtype=np.int64), 1, m)


def tdm_modulate(idx: np.ndarray, m: int) -> np.ndarray:
    """(N, 2) indices (k1 on the up-chirp, k2 on the down-chirp) -> (N, M)."""
    idx = np.asarray(idx, dtype=np.int64)
    s = _chirped_tone(idx[:, 0], 1, m)
    s += _chirped_tone(idx[:, 1], -1, m)
    return s


def _stat(spectrum: np.ndarray, h: complex | None) -> np.ndarray:
    if h is None:
        return spectrum.real**2 + spectrum.imag**2
    hc = np.conjugate(complex(h))
    return (hc * spectrum).real


def _branch_stats(y: np.ndarray, m: int, h: complex | None):
    y = np.asarray(y, dtype=np.complex128)
    up = _stat(np.fft.fft(y * chirp_table(m, -1), axis=-1), h)
    down = _stat(np.fft.fft(y * chirp_table(m, 1), axis=-1), h)
    return up, down


def dmtdm_detect(y: np.ndarray, m: int, h: complex | None = None) -> np.ndarray:
    """(N, M) received symbols -> (N, 4) compressed index decisions."""
    up, down = _branch_stats(y, m, h)
    out = np.empty((up.shape[0], 4), dtype=np.int64)
    out[:, 0] = up[:, 0::2].argmax(axis=-1)
    out[:, 1] = up[:, 1::2].argmax(axis=-1)
    out[:, 2] = down[:, 0::2].argmax(axis=-1)
    out[:, 3] = down[:, 1::2].argmax(axis=-1)
    return out


def lora_detect(y: np.ndarray, m: int, h: complex | None = None) -> np.ndarray:
    """(N, M) received symbols -> (N,) tone decisions."""
    y = np.asarray(y, dtype=np.complex128)
    spectrum = np.fft.fft(y * chirp_table(m, -1), axis=-1)
    return _stat(spectrum, h).argmax(axis=-1).astype(np.int64)


def tdm_detect(y: np.ndarray, m: int, h: complex | None = None) -> np.ndarray:
    """(N, M) received symbols -> (N, 2) index decisions."""
    up, down = _branch_stats(y, m, h)
    out = np.empty((up.shape[0], 2), dtype=np.int64)
    out[:, 0] = up.argmax(axis=-1)
    out[:, 1] = down.argmax(axis=-1)
    return out
