import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from chirpsim import modem, sim
from chirpsim.channel import ChannelSpec

FAST_STOP = sim.StopRule(min_bit_errors=100, max_symbols=30_000)


def strip_wall(record):
    return dataclasses.replace(record, wall_seconds=0.0)


def test_same_seed_gives_identical_record():
    a = sim.run_ber_point("dm-tdm-css", "noncoherent", 7, 4.0, seed=42, stop=FAST_STOP)
    b = sim.run_ber_point("dm-tdm-css", "noncoherent", 7, 4.0, seed=42, stop=FAST_STOP)
    assert strip_wall(a) == strip_wall(b)
    c = sim.run_ber_point("dm-tdm-css", "noncoherent", 7, 4.0, seed=43, stop=FAST_STOP)
    assert c.bit_errors != a.bit_errors or c.ber != a.ber


def test_worker_count_does_not_change_results():
    kwargs = dict(stop=sim.StopRule(300, 60_000), seed=7)
    a = sim.run_ber_point("tdm-css", "noncoherent", 7, 3.0, workers=1, **kwargs)
    b = sim.run_ber_point("tdm-css", "noncoherent", 7, 3.0, workers=2, **kwargs)
    c = sim.run_ber_point("tdm-css", "noncoherent", 7, 3.0, workers=3, **kwargs)
    assert strip_wall(a) == strip_wall(b) == strip_wall(c)


@pytest.mark.parametrize("scheme", modem.SCHEMES)
@pytest.mark.parametrize("detector", modem.DETECTORS)
def test_noiseless_gives_zero_errors(scheme, detector):
    rec = sim.run_ber_point(
        scheme, detector, 7, float("inf"),
        stop=sim.StopRule(min_bit_errors=1, max_symbols=10_000), seed=5,
    )
    assert rec.bit_errors == 0
    assert rec.ber == 0.0
    assert rec.max_symbols_reached
    assert rec.bits_sent == 10_000 * modem.bits_per_symbol(scheme, 7)


def test_stop_on_min_errors():
    rec = sim.run_ber_point("lora", "noncoherent", 6, 0.0, stop=sim.StopRule(50, 10**7), seed=1)
    assert rec.bit_errors >= 50
    assert not rec.max_symbols_reached


def test_stop_on_symbol_budget_smaller_than_chunk():
    rec = sim.run_ber_point("lora", "noncoherent", 6, 30.0, stop=sim.StopRule(10**6, 500), seed=1)
    assert rec.bits_sent == 500 * 6
    assert rec.max_symbols_reached


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sim.run_ber_point("qam", "noncoherent", 7, 4.0)
    with pytest.raises(ValueError):
        sim.run_ber_point("lora", "semicoherent", 7, 4.0)
    with pytest.raises(ValueError):
        sim.run_ber_point("lora", "noncoherent", 7, 4.0, seed=-1)
    with pytest.raises(ValueError):
        sim.run_ber_point("lora", "noncoherent", 7, float("-inf"))
    with pytest.raises(ValueError):
        sim.StopRule(0, 100)


def test_wilson_interval_against_statsmodels():
    from statsmodels.stats.proportion import proportion_confint

    for errors, trials in ((5, 100), (0, 50), (200, 200_000), (199, 200)):
        lo, hi = sim.wilson_interval(errors, trials)
        ref_lo, ref_hi = proportion_confint(errors, trials, alpha=0.05, method="wilson")
        assert abs(lo - ref_lo) < 1e-9
        assert abs(hi - ref_hi) < 1e-9


def test_record_invariants():
    rec = sim.run_ber_point("lora", "noncoherent", 6, 2.0, stop=FAST_STOP, seed=3)
    assert rec.ber == rec.bit_errors / rec.bits_sent
    assert rec.ci_low <= rec.ber <= rec.ci_high


def test_spectral_efficiency_exact():
    assert sim.spectral_efficiency("lora", 8) == Fraction(1, 32)
    assert sim.spectral_efficiency("tdm-css", 8) == Fraction(1, 16)
    assert sim.spectral_efficiency("dm-tdm-css", 8) == Fraction(7, 64)
    assert float(sim.spectral_efficiency("dm-tdm-css", 8)) == 0.109375


def make_record(ebn0_db, ber, bits=10**6):
    errors = int(round(ber * bits))
    return sim.BerRecord(
        scheme="lora", detector="noncoherent", lam=8, ebn0_db=ebn0_db,
        bits_sent=bits, bit_errors=errors, ber=ber, ci_low=0.0, ci_high=1.0,
        max_symbols_reached=False, wall_seconds=0.0, seed=(0,),
    )


def test_required_ebn0_log_interpolation():
    recs = [make_record(2.0, 1e-2), make_record(4.0, 1e-4)]
    assert abs(sim.required_ebn0_db(recs, 1e-3) - 3.0) < 1e-12


def test_required_ebn0_edges():
    assert sim.required_ebn0_db([make_record(2.0, 1e-4)], 1e-3) == 2.0
    assert sim.required_ebn0_db([make_record(2.0, 1e-2), make_record(4.0, 5e-3)], 1e-3) is None
    recs = [make_record(2.0, 1e-2), make_record(4.0, 0.0)]
    got = sim.required_ebn0_db(recs, 1e-3)
    assert 2.0 < got < 4.0


def test_phase_offset_pairs_bit_identical():
    stop = sim.StopRule(100, 20_000)
    with_po = sim.run_impairment_suite(
        "dm-tdm-css", "noncoherent", 8, "po", np.pi / 4, [3.0, 4.0], stop=stop, seed=11
    )
    without = sim.run_impairment_suite(
        "dm-tdm-css", "noncoherent", 8, "po", 0.0, [3.0, 4.0], stop=stop, seed=11
    )
    for a, b in zip(with_po, without):
        assert (a.bit_errors, a.bits_sent, a.ber) == (b.bit_errors, b.bits_sent, b.ber)


def test_impairment_rejects_unknown_kind():
    with pytest.raises(ValueError):
        sim.run_impairment_suite("lora", "noncoherent", 6, "doppler", 1.0, [1.0])


def test_coherent_not_worse_than_noncoherent():
    stop = sim.StopRule(400, 400_000)
    for x in (2.0, 3.5):
        coh = sim.run_ber_point("dm-tdm-css", "coherent", 7, x, stop=stop, seed=21)
        non = sim.run_ber_point("dm-tdm-css", "noncoherent", 7, x, stop=stop, seed=21)
        se = math.sqrt(
            coh.ber * (1 - coh.ber) / coh.bits_sent + non.ber * (1 - non.ber) / non.bits_sent
        )
        assert coh.ber <= non.ber + 3 * se


def test_csv_rendering_deterministic():
    recs = [make_record(2.0, 1e-2), make_record(2.5, 1e-3)]
    text = sim.records_to_csv(recs)
    assert text.splitlines()[0] == "scheme,detector,lambda,ebn0_db,bits,errors,ber,ci_low,ci_high"
    assert text == sim.records_to_csv(recs)
    assert "2.5" in text


def test_run_grid_seeds_depend_on_position_not_impairment():
    stop = sim.StopRule(50, 10_000)
    a = sim.run_grid("lora", "noncoherent", 6, [1.0, 2.0], ChannelSpec(), stop, seed=9)
    b = sim.run_impairment_suite("lora", "noncoherent", 6, "po", 0.0, [1.0, 2.0], stop=stop, seed=9)
    for x, y in zip(a, b):
        assert (x.bit_errors, x.bits_sent) == (y.bit_errors, y.bits_sent)


def test_waterfall_records_bracket_target():
    recs = sim.waterfall_records(
        "lora", "noncoherent", 6, stop=sim.StopRule(150, 100_000), seed=2,
        start_db=0.0,
    )
    req = sim.required_ebn0_db(recs)
    assert req is not None
    bers = [r.ber for r in recs]
    assert max(bers) > 1e-3 > min(bers)
    # refined points exist on a quarter-dB lattice
    assert any(abs(r.ebn0_db * 4 - round(r.ebn0_db * 4)) < 1e-9 and r.ebn0_db % 1 != 0 for r in recs)


def test_se_ee_curve_smoke():
    pts = sim.run_se_ee_curve(
        "lora", "noncoherent", [6], seed=3, stop=sim.StopRule(150, 100_000), start_db=2.0
    )
    assert len(pts) == 1
    p = pts[0]
    assert p.se == Fraction(6, 64)
    assert p.reachable and 3.0 < p.required_ebn0_db < 8.0


def test_required_ebn0_decreases_with_spreading_factor():
    pts = sim.run_se_ee_curve(
        "lora", "noncoherent", [6, 8, 10], seed=5,
        stop=sim.StopRule(250, 400_000), start_db=2.0,
    )
    reqs = [p.required_ebn0_db for p in pts]
    assert all(r is not None for r in reqs)
    assert reqs[0] > reqs[1] > reqs[2]
