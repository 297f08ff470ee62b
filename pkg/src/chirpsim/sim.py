"""Seeded Monte Carlo BER engine for the chirp schemes.

Work is split into fixed-size symbol chunks. Chunk c of a point draws all of
its randomness from SeedSequence((*seed, c)), and a point stops after the
first chunk, in index order, that pushes the cumulative bit-error count past
the stop rule (or at the symbol budget). Chunk results are pure functions of
the configuration, so reruns and any worker count give identical records.

Noise is calibrated per transmitted symbol: sigma2 = P_s * M / (n_bits *
Eb/N0) with P_s the measured mean sample power of that symbol, so the
non-constant envelope of multi-tone symbols does not bias the operating
point.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import channel as chan
from . import kernels, modem

TARGET_BER = 1e-3
Z_95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class StopRule:
    """Stop a BER point after min_bit_errors errors or max_symbols symbols."""

    min_bit_errors: int = 200
    max_symbols: int = 10_000_000

    def __post_init__(self):
        if self.min_bit_errors <= 0 or self.max_symbols <= 0:
            raise ValueError("stop bounds must be positive")


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    detector: str
    lam: int
    ebn0_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float
    max_symbols_reached: bool
    wall_seconds: float
    seed: tuple

    def to_dict(self) -> dict:
        d = {
            "scheme": self.scheme,
            "detector": self.detector,
            "lambda": self.lam,
            "ebn0_db": self.ebn0_db,
            "bits_sent": self.bits_sent,
            "bit_errors": self.bit_errors,
            "ber": self.ber,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "max_symbols_reached": self.max_symbols_reached,
            "wall_seconds": self.wall_seconds,
            "seed": list(self.seed),
        }
        return d


@dataclass(frozen=True)
class SeEePoint:
    """One spectral-efficiency point: SE and the Eb/N0 reaching the target BER."""

    scheme: str
    detector: str
    lam: int
    se: Fraction
    required_ebn0_db: float | None
    reachable: bool

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "detector": self.detector,
            "lambda": self.lam,
            "se": float(self.se),
            "se_exact": f"{self.se.numerator}/{self.se.denominator}",
            "required_ebn0_db": self.required_ebn0_db,
            "reachable": self.reachable,
        }


def spectral_efficiency(scheme: str, lam: int) -> Fraction:
    """Bits per symbol over symbol length, as an exact rational."""
    return Fraction(modem.bits_per_symbol(scheme, lam), 1 << int(lam))


def wilson_interval(errors: int, trials: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


def chunk_symbol_count(lam: int) -> int:
    """Fixed chunk size per spreading factor (bounded batch memory)."""
    m = 1 << int(lam)
    return max(128, min(8192, (1 << 20) // m))


def _seed_tuple(seed) -> tuple:
    if isinstance(seed, (int, np.integer)):
        seed = (int(seed),)
    seed = tuple(int(s) for s in seed)
    if any(s < 0 for s in seed):
        raise ValueError(f"seed entries must be non-negative, got {seed}")
    return seed


def _check_detector(detector: str, spec: chan.ChannelSpec) -> complex | None:
    if detector not in modem.DETECTORS:
        raise ValueError(f"detector must be one of {modem.DETECTORS}, got {detector!r}")
    if detector == "noncoherent":
        return None
    h = spec.detector_gain()
    if h == 0:
        raise ValueError("coherent detection needs a nonzero channel gain")
    return h


def _modulate_batch(scheme: str, idx: np.ndarray, m: int) -> np.ndarray:
    if scheme == "lora":
        return kernels.lora_modulate(idx[:, 0], m)
    if scheme == "tdm-css":
        return kernels.tdm_modulate(idx, m)
    return kernels.dmtdm_modulate(idx, m)


def _detect_batch(scheme: str, y: np.ndarray, m: int, h: complex | None) -> np.ndarray:
    if scheme == "lora":
        return kernels.lora_detect(y, m, h)[:, None]
    if scheme == "tdm-css":
        return kernels.tdm_detect(y, m, h)
    return kernels.dmtdm_detect(y, m, h)


def _simulate_chunk(
    scheme: str,
    detector: str,
    lam: int,
    ebn0_db: float,
    spec: chan.ChannelSpec,
    seed: tuple,
    chunk_index: int,
    n_symbols: int,
) -> tuple[int, int]:
    """Simulate one chunk; returns (bit_errors, bits_sent)."""
    m = 1 << lam
    widths = modem.index_bit_widths(scheme, lam)
    bps = sum(widths)
    rng = np.random.default_rng(np.random.SeedSequence(seed + (chunk_index,)))

    bits = rng.integers(0, 2, size=(n_symbols, bps), dtype=np.uint8)
    idx = modem.pack_bit_blocks(bits, widths)
    s = _modulate_batch(scheme, idx, m)

    power = np.mean(s.real**2 + s.imag**2, axis=1)
    x = chan.noiseless_front(s, spec)
    sigma2 = chan.ebn0_db_to_sigma2(ebn0_db, power, m, bps)
    if np.any(sigma2 > 0):
        w = (rng.standard_normal((n_symbols, m)) + 1j * rng.standard_normal((n_symbols, m)))
        x = x + np.sqrt(0.5 * sigma2)[:, None] * w
    if spec.phase_offset != 0.0:
        x = chan.apply_phase_offset(x, spec.phase_offset)

    h = spec.detector_gain() if detector == "coherent" else None
    got = _detect_batch(scheme, x, m, h)
    errors = int(np.count_nonzero(bits != modem.unpack_bit_blocks(got, widths)))
    return errors, n_symbols * bps


def run_ber_point(
    scheme: str,
    detector: str,
    lam: int,
    ebn0_db: float,
    channel_spec: chan.ChannelSpec = chan.ChannelSpec(),
    stop: StopRule = StopRule(),
    seed=0,
    workers: int = 1,
) -> BerRecord:
    """Measure one (scheme, detector, lambda, Eb/N0) BER point."""
    modem._check_scheme(scheme)
    sf = modem.SpreadingFactor(int(lam))
    _check_detector(detector, channel_spec)
    seed = _seed_tuple(seed)
    ebn0_db = float(ebn0_db)
    t0 = time.perf_counter()

    chunk = chunk_symbol_count(sf.lam)

    def n_for(c: int) -> int:
        remaining = stop.max_symbols - c * chunk
        return min(chunk, remaining) if remaining > 0 else 0

    args = (scheme, detector, sf.lam, ebn0_db, channel_spec, seed)
    errors = bits = symbols = 0
    stopped = False
    c = 0
    if workers <= 1:
        while not stopped and n_for(c) > 0:
            e, b = _simulate_chunk(*args, c, n_for(c))
            errors += e
            bits += b
            symbols += n_for(c)
            stopped = errors >= stop.min_bit_errors
            c += 1
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            base = 0
            while not stopped and n_for(base) > 0:
                wave = [c for c in range(base, base + workers) if n_for(c) > 0]
                futures = [
                    pool.submit(_simulate_chunk, *args, c, n_for(c)) for c in wave
                ]
                for c, fut in zip(wave, futures):
                    if stopped:
                        fut.cancel()
                        continue
                    e, b = fut.result()
                    errors += e
                    bits += b
                    symbols += n_for(c)
                    stopped = errors >= stop.min_bit_errors
                base += len(wave)

    ci_low, ci_high = wilson_interval(errors, bits)
    return BerRecord(
        scheme=scheme,
        detector=detector,
        lam=sf.lam,
        ebn0_db=ebn0_db,
        bits_sent=bits,
        bit_errors=errors,
        ber=errors / bits,
        ci_low=ci_low,
        ci_high=ci_high,
        max_symbols_reached=not stopped,
        wall_seconds=time.perf_counter() - t0,
        seed=seed,
    )


def _point_seed(seed, lam: int, ebn0_db: float) -> tuple:
    """Stable per-point seed; depends on the grid position, never on the
    impairment values, so paired experiments share noise realizations."""
    cents = int(round(float(ebn0_db) * 100)) if math.isfinite(ebn0_db) else (1 << 31)
    return _seed_tuple(seed) + (int(lam), cents & 0xFFFFFFFF)


def run_grid(
    scheme: str,
    detector: str,
    lam: int,
    ebn0_grid_db,
    channel_spec: chan.ChannelSpec = chan.ChannelSpec(),
    stop: StopRule = StopRule(),
    seed=0,
    workers: int = 1,
) -> list[BerRecord]:
    """BER records over an Eb/N0 grid (one record per grid value)."""
    return [
        run_ber_point(
            scheme,
            detector,
            lam,
            x,
            channel_spec,
            stop,
            seed=_point_seed(seed, lam, x),
            workers=workers,
        )
        for x in ebn0_grid_db
    ]


def run_impairment_suite(
    scheme: str,
    detector: str,
    lam: int,
    impairment: str,
    value: float,
    ebn0_grid_db,
    channel_spec: chan.ChannelSpec = chan.ChannelSpec(),
    stop: StopRule = StopRule(),
    seed=0,
    workers: int = 1,
) -> list[BerRecord]:
    """BER curve with a phase offset ("po", radians) or a carrier frequency
    offset ("fo", cycles per symbol) active on top of the base channel."""
    if impairment == "po":
        spec = replace(channel_spec, phase_offset=float(value))
    elif impairment == "fo":
        spec = replace(channel_spec, freq_offset=float(value))
    else:
        raise ValueError(f"impairment must be 'po' or 'fo', got {impairment!r}")
    return run_grid(scheme, detector, lam, ebn0_grid_db, spec, stop, seed, workers)


def _ber_floor(record: BerRecord) -> float:
    # zero-error points enter the waterfall interpolation at half an error
    return max(record.ber, 0.5 / record.bits_sent)


def required_ebn0_db(records, target_ber: float = TARGET_BER) -> float | None:
    """Eb/N0 where the BER waterfall crosses target_ber.

    log10(BER) is interpolated linearly in dB between the bracketing grid
    points. Returns the first grid value if the curve starts below target,
    None if it never crosses.
    """
    recs = sorted(records, key=lambda r: r.ebn0_db)
    if not recs:
        return None
    if recs[0].ber <= target_ber:
        return float(recs[0].ebn0_db)
    for lo, hi in zip(recs, recs[1:]):
        if lo.ber > target_ber >= hi.ber:
            b_lo, b_hi = _ber_floor(lo), _ber_floor(hi)
            if b_hi >= b_lo:  # degenerate bracket; fall back to the right edge
                return float(hi.ebn0_db)
            t = (math.log10(target_ber) - math.log10(b_lo)) / (
                math.log10(b_hi) - math.log10(b_lo)
            )
            return float(lo.ebn0_db + t * (hi.ebn0_db - lo.ebn0_db))
    return None


def waterfall_records(
    scheme: str,
    detector: str,
    lam: int,
    channel_spec: chan.ChannelSpec = chan.ChannelSpec(),
    stop: StopRule = StopRule(),
    seed=0,
    workers: int = 1,
    target_ber: float = TARGET_BER,
    start_db: float = -2.0,
    coarse_step_db: float = 1.0,
    refine_step_db: float = 0.25,
    max_ebn0_db: float = 30.0,
) -> list[BerRecord]:
    """Scan Eb/N0 upward until the BER waterfall crosses target_ber, then
    refine the bracketing interval on a finer grid. Returns all records."""
    records = []
    x = float(start_db)
    bracket = None
    prev = None
    while x <= max_ebn0_db:
        rec = run_ber_point(
            scheme, detector, lam, x, channel_spec, stop,
            seed=_point_seed(seed, lam, x), workers=workers,
        )
        records.append(rec)
        if prev is not None and prev.ber > target_ber >= rec.ber:
            bracket = (prev.ebn0_db, rec.ebn0_db)
            break
        if prev is None and rec.ber <= target_ber:
            return records  # already below target at the start
        prev = rec
        x += coarse_step_db
    if bracket is None:
        return records
    lo, hi = bracket
    steps = int(round((hi - lo) / refine_step_db))
    for i in range(1, steps):
        xm = lo + i * refine_step_db
        records.append(
            run_ber_point(
                scheme, detector, lam, xm, channel_spec, stop,
                seed=_point_seed(seed, lam, xm), workers=workers,
            )
        )
    records.sort(key=lambda r: r.ebn0_db)
    return records


def run_se_ee_curve(
    scheme: str,
    detector: str,
    lams,
    channel_spec: chan.ChannelSpec = chan.ChannelSpec(),
    seed=0,
    stop: StopRule = StopRule(),
    workers: int = 1,
    target_ber: float = TARGET_BER,
    **scan_kwargs,
) -> list[SeEePoint]:
    """Required Eb/N0 at the target BER for each spreading factor."""
    points = []
    for lam in lams:
        lam = int(lam)
        records = waterfall_records(
            scheme, detector, lam, channel_spec, stop, seed, workers,
            target_ber=target_ber, **scan_kwargs,
        )
        req = required_ebn0_db(records, target_ber)
        points.append(
            SeEePoint(
                scheme=scheme,
                detector=detector,
                lam=lam,
                se=spectral_efficiency(scheme, lam),
                required_ebn0_db=req,
                reachable=req is not None,
            )
        )
    return points


CSV_HEADER = ("scheme", "detector", "lambda", "ebn0_db", "bits", "errors", "ber", "ci_low", "ci_high")


def _csv_num(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def records_to_csv(records) -> str:
    """Render BER records as deterministic CSV text (one record per row)."""
    lines = [",".join(CSV_HEADER)]
    for r in records:
        lines.append(
            ",".join(
                (
                    r.scheme,
                    r.detector,
                    str(r.lam),
                    _csv_num(r.ebn0_db),
                    str(r.bits_sent),
                    str(r.bit_errors),
                    _csv_num(r.ber),
                    _csv_num(r.ci_low),
                    _csv_num(r.ci_high),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(records_to_csv(records))
