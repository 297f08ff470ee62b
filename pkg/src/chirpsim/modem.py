"""Bit mapping, modulation and detection for three chirp-spread-spectrum schemes.

Schemes
-------
- ``lora``: one frequency shift on an up-chirp; lam bits per symbol.
- ``tdm-css``: an up-chirped and a down-chirped shift summed in the time
  domain; 2*lam bits per symbol.
- ``dm-tdm-css``: both chirp slopes again summed in time, but each slope
  carries one even and one odd tone; 4*(lam-1) bits per symbol. The mapped
  index k_e activates tone bin 2*k_e, k_o activates bin 2*k_o + 1, so the
  four tones occupy disjoint parity sets.

Detection multiplies the received symbol by one conjugate chirp per slope,
takes the DFT and picks the strongest bin, restricted to the even or odd
subset where the scheme requires it. Coherent decisions maximize
Re(conj(h) * X(k)) with a known gain h; non-coherent decisions maximize
|X(k)| and need no channel knowledge. Ties break toward the smallest bin.

Bit blocks are consumed in a fixed order, most significant bit first:
(k_e1, k_o1, k_e2, k_o2) for dm-tdm-css and (k1, k2) for tdm-css. Any fixed
convention works for BER; this one is pinned so that independently written
tools interoperate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .signal import make_chirp

SCHEMES = ("lora", "tdm-css", "dm-tdm-css")
DETECTORS = ("coherent", "noncoherent")


@dataclass(frozen=True)
class SpreadingFactor:
    """Bits exponent lam in [6, 12]; the symbol length is M = 2**lam."""

    lam: int

    def __post_init__(self):
        if not isinstance(self.lam, (int, np.integer)) or not (6 <= self.lam <= 12):
            raise ValueError(f"spreading factor must be an integer in [6, 12], got {self.lam!r}")
        object.__setattr__(self, "lam", int(self.lam))

    @property
    def m(self) -> int:
        return 1 << self.lam


def _as_sf(sf) -> SpreadingFactor:
    return sf if isinstance(sf, SpreadingFactor) else SpreadingFactor(sf)


@dataclass(frozen=True)
class DmTdmIndices:
    """Compressed indices, each in [0, M/2 - 1]: even/odd tones per slope."""

    ke1: int
    ko1: int
    ke2: int
    ko2: int

    def expanded(self) -> tuple[int, int, int, int]:
        """Activated tone bins (even = 2*k_e, odd = 2*k_o + 1)."""
        return (2 * self.ke1, 2 * self.ko1 + 1, 2 * self.ke2, 2 * self.ko2 + 1)

    def astuple(self) -> tuple[int, int, int, int]:
        return (self.ke1, self.ko1, self.ke2, self.ko2)


@dataclass(frozen=True)
class LoRaIndex:
    k: int

    def astuple(self) -> tuple[int]:
        return (self.k,)


@dataclass(frozen=True)
class TdmIndices:
    k1: int
    k2: int

    def astuple(self) -> tuple[int, int]:
        return (self.k1, self.k2)


def _check_scheme(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    return scheme


def index_bit_widths(scheme: str, sf) -> tuple[int, ...]:
    """Bit-block width per mapped index, in block order."""
    lam = _as_sf(sf).lam
    _check_scheme(scheme)
    if scheme == "lora":
        return (lam,)
    if scheme == "tdm-css":
        return (lam, lam)
    return (lam - 1,) * 4


def bits_per_symbol(scheme: str, sf) -> int:
    return sum(index_bit_widths(scheme, sf))


def pack_bit_blocks(bits: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    """(N, sum(widths)) 0/1 rows -> (N, len(widths)) MSB-first integers."""
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[1] != sum(widths):
        raise ValueError(f"expected (N, {sum(widths)}) bit rows, got shape {bits.shape}")
    out = np.empty((bits.shape[0], len(widths)), dtype=np.int64)
    pos = 0
    for j, w in enumerate(widths):
        weights = 1 << np.arange(w - 1, -1, -1, dtype=np.int64)
        out[:, j] = bits[:, pos : pos + w].astype(np.int64) @ weights
        pos += w
    return out


def unpack_bit_blocks(values: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    """Inverse of :func:`pack_bit_blocks`."""
    values = np.asarray(values, dtype=np.int64)
    out = np.empty((values.shape[0], sum(widths)), dtype=np.uint8)
    pos = 0
    for j, w in enumerate(widths):
        shifts = np.arange(w - 1, -1, -1, dtype=np.int64)
        out[:, pos : pos + w] = (values[:, j : j + 1] >> shifts) & 1
        pos += w
    return out


def _validate_bits(bits, n_expected: int) -> np.ndarray:
    arr = np.asarray(list(bits) if isinstance(bits, str) else bits, dtype=np.int64)
    if arr.ndim != 1 or arr.size != n_expected:
        raise ValueError(f"expected {n_expected} bits, got {arr.size}")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("bits must be 0 or 1")
    return arr.astype(np.uint8)


def map_bits(scheme: str, bits, sf):
    """Split a bit string into MSB-first blocks and build the scheme's indices."""
    sf = _as_sf(sf)
    widths = index_bit_widths(scheme, sf)
    arr = _validate_bits(bits, sum(widths))
    vals = pack_bit_blocks(arr[None, :], widths)[0]
    if scheme == "lora":
        return LoRaIndex(int(vals[0]))
    if scheme == "tdm-css":
        return TdmIndices(int(vals[0]), int(vals[1]))
    return DmTdmIndices(*(int(v) for v in vals))


def map_bits_dmtdm(bits, sf) -> DmTdmIndices:
    return map_bits("dm-tdm-css", bits, sf)


def map_bits_lora(bits, sf) -> LoRaIndex:
    return map_bits("lora", bits, sf)


def map_bits_tdm(bits, sf) -> TdmIndices:
    return map_bits("tdm-css", bits, sf)


def scheme_of(idx) -> str:
    if isinstance(idx, DmTdmIndices):
        return "dm-tdm-css"
    if isinstance(idx, TdmIndices):
        return "tdm-css"
    if isinstance(idx, LoRaIndex):
        return "lora"
    raise TypeError(f"not an index type: {idx!r}")


def demap_bits(idx, sf) -> np.ndarray:
    """Exact inverse of :func:`map_bits` for any scheme's index object."""
    sf = _as_sf(sf)
    scheme = scheme_of(idx)
    _check_indices(scheme, idx, sf)
    widths = index_bit_widths(scheme, sf)
    vals = np.asarray(idx.astuple(), dtype=np.int64)[None, :]
    return unpack_bit_blocks(vals, widths)[0]


def _check_indices(scheme: str, idx, sf: SpreadingFactor) -> None:
    m = sf.m
    if scheme == "dm-tdm-css":
        if not isinstance(idx, DmTdmIndices):
            raise TypeError(f"expected DmTdmIndices, got {type(idx).__name__}")
        hi = m // 2 - 1
        for name, v in zip(("ke1", "ko1", "ke2", "ko2"), idx.astuple()):
            if not (0 <= v <= hi):
                raise ValueError(f"{name}={v} out of [0, {hi}]")
    elif scheme == "tdm-css":
        if not isinstance(idx, TdmIndices):
            raise TypeError(f"expected TdmIndices, got {type(idx).__name__}")
        for name, v in zip(("k1", "k2"), idx.astuple()):
            if not (0 <= v <= m - 1):
                raise ValueError(f"{name}={v} out of [0, {m - 1}]")
    else:
        if not isinstance(idx, LoRaIndex):
            raise TypeError(f"expected LoRaIndex, got {type(idx).__name__}")
        if not (0 <= idx.k <= m - 1):
            raise ValueError(f"k={idx.k} out of [0, {m - 1}]")


def modulate(scheme: str, idx, sf) -> np.ndarray:
    """Synthesize one M-sample baseband symbol for the given indices."""
    sf = _as_sf(sf)
    _check_scheme(scheme)
    _check_indices(scheme, idx, sf)
    row = np.asarray(idx.astuple(), dtype=np.int64)[None, :]
    if scheme == "lora":
        return kernels.lora_modulate(row[:, 0], sf.m)[0]
    if scheme == "tdm-css":
        return kernels.tdm_modulate(row, sf.m)[0]
    return kernels.dmtdm_modulate(row, sf.m)[0]


def modulate_dmtdm(idx: DmTdmIndices, sf) -> np.ndarray:
    return modulate("dm-tdm-css", idx, sf)


def modulate_lora(idx: LoRaIndex, sf) -> np.ndarray:
    return modulate("lora", idx, sf)


def modulate_tdm(idx: TdmIndices, sf) -> np.ndarray:
    return modulate("tdm-css", idx, sf)


def dechirp(y: np.ndarray, slope: int) -> np.ndarray:
    """Multiply elementwise by the chirp of the given slope.

    slope=-1 exposes the up-chirped tones; slope=+1 the down-chirped ones.
    """
    y = np.asarray(y)
    return y * make_chirp(y.shape[-1], slope)


def _check_received(y, sf: SpreadingFactor) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.shape[0] != sf.m:
        raise ValueError(f"expected {sf.m} received samples, got shape {y.shape}")
    return y


def _check_gain(h) -> complex:
    h = complex(h)
    if h == 0 or not (np.isfinite(h.real) and np.isfinite(h.imag)):
        raise ValueError("coherent detection needs a finite nonzero channel gain")
    return h


def detect_dmtdm_coherent(y, h, sf) -> DmTdmIndices:
    sf = _as_sf(sf)
    row = kernels.dmtdm_detect(_check_received(y, sf)[None, :], sf.m, _check_gain(h))[0]
    return DmTdmIndices(*(int(v) for v in row))


def detect_dmtdm_noncoherent(y, sf) -> DmTdmIndices:
    sf = _as_sf(sf)
    row = kernels.dmtdm_detect(_check_received(y, sf)[None, :], sf.m, None)[0]
    return DmTdmIndices(*(int(v) for v in row))


def detect_lora(y, sf, h=None) -> LoRaIndex:
    """h=None selects the non-coherent |X(k)| statistic."""
    sf = _as_sf(sf)
    h = None if h is None else _check_gain(h)
    k = kernels.lora_detect(_check_received(y, sf)[None, :], sf.m, h)[0]
    return LoRaIndex(int(k))


def detect_tdm(y, sf, h=None) -> TdmIndices:
    sf = _as_sf(sf)
    h = None if h is None else _check_gain(h)
    row = kernels.tdm_detect(_check_received(y, sf)[None, :], sf.m, h)[0]
    return TdmIndices(int(row[0]), int(row[1]))


def detect(scheme: str, y, sf, h=None):
    """Scheme-generic detection; h=None means non-coherent."""
    _check_scheme(scheme)
    if scheme == "lora":
        return detect_lora(y, sf, h)
    if scheme == "tdm-css":
        return detect_tdm(y, sf, h)
    if h is None:
        return detect_dmtdm_noncoherent(y, sf)
    return detect_dmtdm_coherent(y, h, sf)


def _peaks(stat: np.ndarray, bins: np.ndarray) -> dict:
    values = stat[bins]
    pos = int(values.argmax())  # first maximum, matching the detectors
    best = bins[pos]
    if bins.size > 1:
        rest = np.delete(values, pos)
        second = np.delete(bins, pos)[int(rest.argmax())]
    else:
        second = best
    top, runner = float(stat[best]), float(stat[second])
    margin = (top - runner) / abs(top) if top != 0 else 0.0
    return {
        "bin": int(best),
        "stat": top,
        "runner_up_bin": int(second),
        "runner_up_stat": runner,
        "margin": float(margin),
    }


def detection_report(scheme: str, y, sf, h=None) -> dict:
    """Per-decision peak bins, statistics and margins (for inspection tools).

    Reports |X(k)| for non-coherent detection and Re(conj(h) X(k)) otherwise.
    """
    sf = _as_sf(sf)
    _check_scheme(scheme)
    y = _check_received(y, sf)
    m = sf.m

    def stat_of(slope_removed: int) -> np.ndarray:
        spectrum = np.fft.fft(dechirp(y, -slope_removed))
        if h is None:
            return np.abs(spectrum)
        return (np.conjugate(complex(h)) * spectrum).real

    up = stat_of(1)
    even = np.arange(0, m, 2)
    odd = np.arange(1, m, 2)
    full = np.arange(m)
    decisions = []
    if scheme == "lora":
        decisions.append({"branch": "up", "candidates": "all", **_peaks(up, full)})
    else:
        down = stat_of(-1)
        if scheme == "tdm-css":
            decisions.append({"branch": "up", "candidates": "all", **_peaks(up, full)})
            decisions.append({"branch": "down", "candidates": "all", **_peaks(down, full)})
        else:
            decisions.append({"branch": "up", "candidates": "even", **_peaks(up, even)})
            decisions.append({"branch": "up", "candidates": "odd", **_peaks(up, odd)})
            decisions.append({"branch": "down", "candidates": "even", **_peaks(down, even)})
            decisions.append({"branch": "down", "candidates": "odd", **_peaks(down, odd)})
    idx = detect(scheme, y, sf, h)
    return {
        "scheme": scheme,
        "detector": "noncoherent" if h is None else "coherent",
        "lambda": sf.lam,
        "indices": idx.astuple(),
        "bits": "".join(str(b) for b in demap_bits(idx, sf)),
        "decisions": decisions,
    }
