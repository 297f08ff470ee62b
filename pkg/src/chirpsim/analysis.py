"""Closed-form spectral analysis of the dual-slope multi-tone symbols.

After dechirping one slope, each tone of the opposite slope collapses into a
quadratic exponential sum instead of a clean bin. For power-of-two symbol
lengths those sums evaluate in closed form: a tone of matching parity leaves
a residual of magnitude sqrt(2M) on every activated bin, while the
opposite-parity tone cancels exactly. This module provides the sums, the
resulting bin decompositions, symbol inner products, and the bin-level
SIR/SINR figures. Brute-force DFT oracles for every closed form live in the
test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .modem import DmTdmIndices, SpreadingFactor, _as_sf

BRANCHES = ("up", "down")
PARITIES = ("even", "odd")


def _check_gauss_args(a: int, b: int, c: int) -> tuple[int, int, int]:
    for name, v in (("a", a), ("b", b), ("c", c)):
        if not isinstance(v, (int, np.integer)):
            raise ValueError(f"{name} must be an integer, got {v!r}")
    a, b, c = int(a), int(b), int(c)
    if a * c == 0:
        raise ValueError(f"require a*c != 0, got a={a}, c={c}")
    return a, b, c


def gauss_sum_direct(a: int, b: int, c: int) -> complex:
    """Sum of exp(j*pi*(b*n + a*n^2)/c) over n in [0, |c|), by summation."""
    a, b, c = _check_gauss_args(a, b, c)
    n = np.arange(abs(c), dtype=np.int64)
    # exp(j*pi*x/c) has period 2|c| in the integer x; reduce before evaluating
    x = (b * n + a * n * n) % (2 * abs(c))
    return complex(np.sum(np.exp(1j * np.pi * x / c)))


def gauss_sum_reciprocal(a: int, b: int, c: int) -> complex:
    """Closed-form value of :func:`gauss_sum_direct` via the reciprocity
    identity; requires a*c != 0 and a*c + b even."""
    a, b, c = _check_gauss_args(a, b, c)
    if (a * c + b) % 2 != 0:
        raise ValueError(f"require a*c + b even, got a={a}, b={b}, c={c}")
    front = math.sqrt(abs(c / a)) * cmath.exp(1j * math.pi * (abs(a * c) - b * b) / (4.0 * a * c))
    n = np.arange(abs(a), dtype=np.int64)
    x = (b * n + c * n * n) % (2 * abs(a))
    tail = complex(np.sum(np.exp(-1j * np.pi * x / a)))
    return front * tail


def crosstalk_amplitude(m: int) -> complex:
    """Complex amplitude sqrt(2M) * exp(j*pi/4) of the residual an
    opposite-slope tone of matching parity leaves on a dechirped bin."""
    return math.sqrt(2 * m) * cmath.exp(0.25j * math.pi)


def _parity_branch_guard(m: int, k_diff: int) -> None:
    """The two-term branch factor 1 + exp(j*pi/2*(M + 2*k_diff)) must equal 2
    for even bin differences once M >= 4; checked numerically, not assumed."""
    if k_diff % 2 != 0:
        raise ValueError(f"expected an even bin difference, got {k_diff}")
    if m < 4 or m % 4 != 0:
        raise ValueError(f"symbol length must be a multiple of 4, got {m}")
    val = cmath.exp(0.5j * math.pi * (m + 2 * k_diff))
    if abs(val - 1.0) > 1e-9:
        raise ArithmeticError(
            f"parity branch factor drifted from 1: m={m}, k_diff={k_diff}, got {val}"
        )


def _quad_phase(diff: int, m: int, sign: int) -> complex:
    """exp(sign * j*pi*diff^2/(2M)) with the integer phase reduced mod 4M."""
    x = (diff * diff) % (4 * m)
    return cmath.exp(sign * 1j * math.pi * x / (2 * m))


def symbol_inner_product_closed(idx_a: DmTdmIndices, idx_b: DmTdmIndices, sf) -> complex:
    """Opposite-slope part of the inner product <s_a, s_b>.

    Four quadratic-sum terms pair each tone of one symbol's up-chirp half
    with the same-parity tone of the other symbol's down-chirp half. Tones
    of the same slope contribute Kronecker deltas on top of this; see
    :func:`symbol_inner_product_full` for the exact total.
    """
    sf = _as_sf(sf)
    m = sf.m
    e1a, o1a, e2a, o2a = idx_a.expanded()
    e1b, o1b, e2b, o2b = idx_b.expanded()
    for diff in (e1a - e2b, o1a - o2b, e2a - e1b, o2a - o1b):
        _parity_branch_guard(m, diff)
    amp = crosstalk_amplitude(m)
    up_vs_down = _quad_phase(e1a - e2b, m, -1) + _quad_phase(o1a - o2b, m, -1)
    down_vs_up = _quad_phase(e2a - e1b, m, +1) + _quad_phase(o2a - o1b, m, +1)
    return amp * up_vs_down + amp.conjugate() * down_vs_up


def symbol_inner_product_full(idx_a: DmTdmIndices, idx_b: DmTdmIndices, sf) -> complex:
    """Exact <s_a, s_b>: the closed cross terms plus M for every same-slope
    tone the two symbols share (same-slope tones of unequal bins integrate
    to zero, and opposite-parity cross terms cancel exactly)."""
    sf = _as_sf(sf)
    matches = sum(
        int(x == y) for x, y in zip(idx_a.astuple(), idx_b.astuple())
    )
    return symbol_inner_product_closed(idx_a, idx_b, sf) + sf.m * matches


@dataclass(frozen=True)
class InterferenceReport:
    """Noiseless decomposition of one activated dechirped-DFT bin."""

    bin_index: int
    signal_mag: float
    interference: complex
    interference_mag: float
    sir_linear: float
    sinr_linear: float


def interference_at_bin(
    idx: DmTdmIndices, branch: str, parity: str, sf, noise_sigma2: float = 0.0
) -> InterferenceReport:
    """Closed-form value of the activated bin on one detection branch.

    branch "up" is the spectrum after multiplying by the down-chirp (the
    up-chirped tones land on their bins); branch "down" is the opposite.
    The bin value is M plus the reported interference term.
    """
    sf = _as_sf(sf)
    m = sf.m
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}, got {branch!r}")
    if parity not in PARITIES:
        raise ValueError(f"parity must be one of {PARITIES}, got {parity!r}")
    e1, o1, e2, o2 = idx.expanded()
    amp = crosstalk_amplitude(m)
    if branch == "up" and parity == "even":
        bin_index, diff, term = e1, e2 - e1, amp.conjugate()
        sign = +1
    elif branch == "up":
        bin_index, diff, term = o1, o2 - o1, amp.conjugate()
        sign = +1
    elif parity == "even":
        bin_index, diff, term = e2, e1 - e2, amp
        sign = -1
    else:
        bin_index, diff, term = o2, o1 - o2, amp
        sign = -1
    _parity_branch_guard(m, diff)
    interference = term * _quad_phase(diff, m, sign)
    return InterferenceReport(
        bin_index=bin_index,
        signal_mag=float(m),
        interference=interference,
        interference_mag=abs(interference),
        sir_linear=sir_linear(sf),
        sinr_linear=sinr_linear(sf, noise_sigma2),
    )


def sir_linear(sf) -> float:
    """Signal-to-interference ratio M^2 / |sqrt(2M)|^2 = M/2 of an activated bin."""
    return _as_sf(sf).m / 2.0


def sir_db(sf) -> float:
    return 10.0 * math.log10(sir_linear(sf))


def sinr_linear(sf, noise_sigma2: float) -> float:
    """Signal-to-interference-plus-noise ratio M / (2 + sigma2/M)."""
    noise_sigma2 = float(noise_sigma2)
    if not math.isfinite(noise_sigma2) or noise_sigma2 < 0:
        raise ValueError(f"noise variance must be finite and >= 0, got {noise_sigma2!r}")
    m = _as_sf(sf).m
    return m / (2.0 + noise_sigma2 / m)


def _random_gauss_triples(rng: np.random.Generator, count: int, limit: int = 64):
    out = []
    while len(out) < count:
        a = int(rng.integers(-limit, limit + 1))
        c = int(rng.integers(-limit, limit + 1))
        if a == 0 or c == 0:
            continue
        b = int(rng.integers(-2 * limit, 2 * limit + 1))
        if (a * c + b) % 2 != 0:
            b += 1
        out.append((a, b, c))
    return out


def oracle_residuals(lams, seed: int = 0, trials: int = 200, gauss_trials: int = 1000) -> dict:
    """Cross-check every closed form against its brute-force route.

    Returns maxima of |closed - direct|, scaled by |c| for the quadratic
    sums and by M for the symbol-level quantities.
    """
    from .modem import modulate_dmtdm
    from .signal import dft as _dft
    from .signal import make_chirp

    rng = np.random.default_rng(seed)
    gauss_max = 0.0
    for a, b, c in _random_gauss_triples(rng, gauss_trials):
        res = abs(gauss_sum_reciprocal(a, b, c) - gauss_sum_direct(a, b, c)) / abs(c)
        gauss_max = max(gauss_max, res)

    inner_max = 0.0
    interference_max = 0.0
    per_lambda = {}
    for lam in lams:
        sf = SpreadingFactor(int(lam))
        m = sf.m
        half = m // 2
        lam_inner = 0.0
        lam_interference = 0.0
        for _ in range(trials):
            ia = DmTdmIndices(*(int(v) for v in rng.integers(0, half, 4)))
            ib = DmTdmIndices(*(int(v) for v in rng.integers(0, half, 4)))
            sa = modulate_dmtdm(ia, sf)
            sb = modulate_dmtdm(ib, sf)
            brute = complex(np.vdot(sb, sa))
            closed = symbol_inner_product_full(ia, ib, sf)
            lam_inner = max(lam_inner, abs(closed - brute) / m)

            up = _dft(sa * make_chirp(m, -1))
            down = _dft(sa * make_chirp(m, 1))
            spectra = {"up": up, "down": down}
            for branch in BRANCHES:
                for parity in PARITIES:
                    rep = interference_at_bin(ia, branch, parity, sf)
                    measured = spectra[branch][rep.bin_index]
                    closed_bin = rep.signal_mag + rep.interference
                    lam_interference = max(
                        lam_interference, abs(measured - closed_bin) / m
                    )
        per_lambda[int(lam)] = {
            "inner_product_rel_m": lam_inner,
            "interference_rel_m": lam_interference,
        }
        inner_max = max(inner_max, lam_inner)
        interference_max = max(interference_max, lam_interference)

    return {
        "gauss_reciprocity_rel_c": gauss_max,
        "inner_product_rel_m": inner_max,
        "interference_rel_m": interference_max,
        "per_lambda": per_lambda,
        "trials": trials,
        "gauss_trials": gauss_trials,
        "seed": seed,
    }
