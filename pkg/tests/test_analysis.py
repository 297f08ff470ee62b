import math

import numpy as np
import pytest

from chirpsim import analysis, modem, signal
from oracles import inner_product_direct, quadratic_sum_reference

SF6 = modem.SpreadingFactor(6)


def random_dmtdm(rng, sf):
    return modem.DmTdmIndices(*(int(v) for v in rng.integers(0, sf.m // 2, 4)))


# ---------------------------------------------------------------- gauss sums

def test_direct_hand_example():
    # 1 + j + 1 + j
    assert abs(analysis.gauss_sum_direct(2, 0, 4) - (2 + 2j)) < 1e-12


def test_direct_matches_term_by_term_reference():
    rng = np.random.default_rng(0)
    for a, b, c in analysis._random_gauss_triples(rng, 50, limit=16):
        ref = quadratic_sum_reference(a, b, c)
        assert abs(analysis.gauss_sum_direct(a, b, c) - ref) < 1e-9 * abs(c)


def test_gauss_rejects_zero_a_or_c():
    with pytest.raises(ValueError):
        analysis.gauss_sum_direct(0, 2, 4)
    with pytest.raises(ValueError):
        analysis.gauss_sum_direct(2, 2, 0)
    with pytest.raises(ValueError):
        analysis.gauss_sum_reciprocal(0, 2, 4)


def test_reciprocal_rejects_odd_parity():
    with pytest.raises(ValueError):
        analysis.gauss_sum_reciprocal(2, 1, 4)  # ac + b odd


def test_reciprocal_hand_example():
    assert abs(analysis.gauss_sum_reciprocal(2, 0, 4) - (2 + 2j)) < 1e-12


@pytest.mark.parametrize("m", [64, 256, 1024, 4096])
def test_pure_quadratic_sum_equals_crosstalk_amplitude(m):
    want = analysis.crosstalk_amplitude(m)
    assert abs(analysis.gauss_sum_direct(2, 0, m) - want) < 1e-9 * m
    assert abs(analysis.gauss_sum_reciprocal(2, 0, m) - want) < 1e-9 * m


def test_even_shift_quadratic_sum_closed_form():
    # sum exp(j*pi*(2*k*n + 2*n^2)/M) = amp * exp(-j*pi*k^2/(2M)) for even k
    m = 64
    amp = analysis.crosstalk_amplitude(m)
    for k in range(-m, m + 1, 2):
        want = amp * np.exp(-1j * np.pi * k * k / (2 * m))
        assert abs(analysis.gauss_sum_direct(2, 2 * k, m) - want) < 1e-9 * m
        assert abs(analysis.gauss_sum_reciprocal(2, 2 * k, m) - want) < 1e-9 * m


def test_reciprocity_randomized():
    rng = np.random.default_rng(1)
    for a, b, c in analysis._random_gauss_triples(rng, 1000):
        direct = analysis.gauss_sum_direct(a, b, c)
        closed = analysis.gauss_sum_reciprocal(a, b, c)
        assert abs(closed - direct) < 1e-9 * abs(c), (a, b, c)


# ---------------------------------------------------------------- inner products

@pytest.mark.parametrize("lam", [6, 7, 8])
def test_closed_inner_product_on_cross_distinct_tuples(lam):
    sf = modem.SpreadingFactor(lam)
    rng = np.random.default_rng(lam)
    checked = 0
    while checked < 100:
        ia, ib = random_dmtdm(rng, sf), random_dmtdm(rng, sf)
        if any(x == y for x, y in zip(ia.astuple(), ib.astuple())):
            continue
        brute = inner_product_direct(
            modem.modulate_dmtdm(ia, sf), modem.modulate_dmtdm(ib, sf)
        )
        closed = analysis.symbol_inner_product_closed(ia, ib, sf)
        assert abs(closed - brute) < 1e-6 * sf.m
        checked += 1


@pytest.mark.parametrize("lam", [6, 7, 8])
def test_full_inner_product_on_arbitrary_tuples(lam):
    sf = modem.SpreadingFactor(lam)
    rng = np.random.default_rng(100 + lam)
    for _ in range(100):
        ia, ib = random_dmtdm(rng, sf), random_dmtdm(rng, sf)
        brute = inner_product_direct(
            modem.modulate_dmtdm(ia, sf), modem.modulate_dmtdm(ib, sf)
        )
        full = analysis.symbol_inner_product_full(ia, ib, sf)
        assert abs(full - brute) < 1e-6 * sf.m


def test_inner_product_identical_zero_tuple():
    idx = modem.DmTdmIndices(0, 0, 0, 0)
    m = SF6.m
    s = modem.modulate_dmtdm(idx, SF6)
    brute = signal.inner_product(s, s)
    # all four cross phases are 1: closed part is 2*amp + 2*conj(amp) = 4*sqrt(M)
    closed = analysis.symbol_inner_product_closed(idx, idx, SF6)
    assert abs(closed - 4 * math.sqrt(m)) < 1e-9 * m
    full = analysis.symbol_inner_product_full(idx, idx, SF6)
    assert abs(full - (4 * m + 4 * math.sqrt(m))) < 1e-9 * m
    assert abs(full - brute) < 1e-6 * m


def test_inner_product_magnitude_bound():
    rng = np.random.default_rng(2)
    bound = 4 * math.sqrt(2 * SF6.m)
    for _ in range(500):
        ia, ib = random_dmtdm(rng, SF6), random_dmtdm(rng, SF6)
        val = analysis.symbol_inner_product_closed(ia, ib, SF6)
        assert abs(val) <= bound + 1e-9


# ---------------------------------------------------------------- interference

def test_interference_closed_forms_match_dft():
    rng = np.random.default_rng(3)
    m = SF6.m
    for _ in range(200):
        idx = random_dmtdm(rng, SF6)
        s = modem.modulate_dmtdm(idx, SF6)
        spectra = {
            "up": signal.dft(modem.dechirp(s, signal.DOWNCHIRP)),
            "down": signal.dft(modem.dechirp(s, signal.UPCHIRP)),
        }
        for branch in analysis.BRANCHES:
            for parity in analysis.PARITIES:
                rep = analysis.interference_at_bin(idx, branch, parity, SF6)
                got = spectra[branch][rep.bin_index]
                assert abs(got - (rep.signal_mag + rep.interference)) < 1e-6 * m


def test_interference_magnitude_is_index_independent():
    rng = np.random.default_rng(4)
    m = SF6.m
    want = math.sqrt(2 * m)
    for _ in range(100):
        idx = random_dmtdm(rng, SF6)
        for branch in analysis.BRANCHES:
            for parity in analysis.PARITIES:
                rep = analysis.interference_at_bin(idx, branch, parity, SF6)
                assert abs(rep.interference_mag - want) < 1e-9 * m
                assert abs(rep.sir_linear - rep.signal_mag**2 / rep.interference_mag**2) < 1e-9 * m


def test_interference_bin_indices():
    idx = modem.DmTdmIndices(3, 5, 7, 9)
    assert analysis.interference_at_bin(idx, "up", "even", SF6).bin_index == 6
    assert analysis.interference_at_bin(idx, "up", "odd", SF6).bin_index == 11
    assert analysis.interference_at_bin(idx, "down", "even", SF6).bin_index == 14
    assert analysis.interference_at_bin(idx, "down", "odd", SF6).bin_index == 19


def test_interference_rejects_bad_arguments():
    idx = modem.DmTdmIndices(0, 0, 0, 0)
    with pytest.raises(ValueError):
        analysis.interference_at_bin(idx, "sideways", "even", SF6)
    with pytest.raises(ValueError):
        analysis.interference_at_bin(idx, "up", "third", SF6)


def test_cross_parity_ablation():
    # removing the down-chirp even tone leaves the up-branch odd bin untouched
    rng = np.random.default_rng(5)
    m = SF6.m
    w = np.exp(1j * np.pi * np.arange(2 * m) / m)
    n = np.arange(m, dtype=np.int64)
    for _ in range(200):
        idx = random_dmtdm(rng, SF6)
        e1, o1, e2, o2 = idx.expanded()
        s = modem.modulate_dmtdm(idx, SF6)
        down_even = w[(2 * e2 * n - n * n) % (2 * m)]
        spec_full = signal.dft(modem.dechirp(s, signal.DOWNCHIRP))
        spec_ablated = signal.dft(modem.dechirp(s - down_even, signal.DOWNCHIRP))
        assert abs(spec_full[o1] - spec_ablated[o1]) < 1e-9 * m


# ---------------------------------------------------------------- SIR / SINR

def test_sir_values():
    assert analysis.sir_linear(modem.SpreadingFactor(8)) == 128.0
    assert abs(analysis.sir_db(modem.SpreadingFactor(8)) - 10 * math.log10(128)) < 1e-12
    for lam in range(6, 12):
        assert analysis.sir_linear(lam + 1) == 2 * analysis.sir_linear(lam)


def test_sinr_values():
    sf8 = modem.SpreadingFactor(8)
    assert analysis.sinr_linear(sf8, 0.0) == analysis.sir_linear(sf8)
    assert abs(analysis.sinr_linear(sf8, 256.0) - 256.0 / 3.0) < 1e-12
    last = math.inf
    for s2 in (0.0, 10.0, 100.0, 1e4, 1e8):
        val = analysis.sinr_linear(sf8, s2)
        assert val < last or s2 == 0.0
        last = val
    assert analysis.sinr_linear(sf8, 1e12) < 1e-3
    with pytest.raises(ValueError):
        analysis.sinr_linear(sf8, -1.0)


def test_parity_branch_guard():
    analysis._parity_branch_guard(64, 10)
    with pytest.raises(ValueError):
        analysis._parity_branch_guard(64, 3)  # odd difference
    with pytest.raises(ValueError):
        analysis._parity_branch_guard(2, 0)  # M too small


def test_oracle_residuals_smoke():
    report = analysis.oracle_residuals([6, 7], seed=1, trials=20, gauss_trials=100)
    assert report["gauss_reciprocity_rel_c"] < 1e-9
    assert report["inner_product_rel_m"] < 1e-6
    assert report["interference_rel_m"] < 1e-6
