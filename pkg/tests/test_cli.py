import json
import os
import struct

import numpy as np
import yaml

from chirpsim import cli
from chirpsim.iqio import read_iq, sidecar_path

TINY_CAMPAIGN = {
    "schema": 1,
    "name": "tiny",
    "sweeps": [
        {
            "scheme": "lora",
            "detector": "noncoherent",
            "lambdas": [6],
            "ebn0_db": [2.0, 4.0],
            "seed": 77,
            "stop": {"min_bit_errors": 60, "max_symbols": 20000},
        }
    ],
}


def write_campaign(tmp_path, doc=TINY_CAMPAIGN, name="tiny.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def test_modulate_writes_expected_file(tmp_path):
    out = str(tmp_path / "sym.iq")
    rc = cli.main(
        ["modulate", "--scheme", "dm-tdm-css", "--lambda", "6", "--bits", "0" * 20, "--out", out]
    )
    assert rc == 0
    raw = open(out, "rb").read()
    assert len(raw) == 16 * 64
    i0, q0 = struct.unpack("<dd", raw[:16])
    assert (i0, q0) == (4.0, 0.0)
    meta = json.load(open(sidecar_path(out)))
    assert meta["scheme"] == "dm-tdm-css"
    assert meta["lambda"] == 6
    assert meta["bits"] == "0" * 20
    assert meta["indices"] == [0, 0, 0, 0]


def test_modulate_seeded_payload_roundtrip(tmp_path, capsys):
    out = str(tmp_path / "s.iq")
    assert cli.main(["modulate", "--scheme", "tdm-css", "--lambda", "7",
                     "--seed", "9", "--out", out]) == 0
    capsys.readouterr()
    assert cli.main(["demodulate", out, "--scheme", "tdm-css",
                     "--detector", "noncoherent"]) == 0
    text = capsys.readouterr().out
    meta = json.load(open(sidecar_path(out)))
    assert f"bits: {meta['bits']}" in text
    assert "sidecar payload match: yes" in text


def test_modulate_rejects_bad_bit_string(tmp_path):
    rc = cli.main(["modulate", "--scheme", "lora", "--lambda", "6",
                   "--bits", "01", "--out", str(tmp_path / "x.iq")])
    assert rc == cli.EXIT_USAGE


def test_demodulate_phase_rotated_file_same_bits(tmp_path, capsys):
    out = str(tmp_path / "a.iq")
    cli.main(["modulate", "--scheme", "dm-tdm-css", "--lambda", "6", "--seed", "4", "--out", out])
    samples = read_iq(out)
    rotated = str(tmp_path / "b.iq")
    (np.exp(1j * 0.9) * samples).astype("<c16").tofile(rotated)
    capsys.readouterr()
    assert cli.main(["demodulate", out, "--scheme", "dm-tdm-css", "--detector", "noncoherent"]) == 0
    bits_a = [l for l in capsys.readouterr().out.splitlines() if l.startswith("bits:")]
    assert cli.main(["demodulate", rotated, "--scheme", "dm-tdm-css", "--detector", "noncoherent"]) == 0
    bits_b = [l for l in capsys.readouterr().out.splitlines() if l.startswith("bits:")]
    assert bits_a == bits_b


def test_demodulate_corrupt_length(tmp_path, capsys):
    out = str(tmp_path / "c.iq")
    cli.main(["modulate", "--scheme", "lora", "--lambda", "6", "--seed", "1", "--out", out])
    raw = open(out, "rb").read()
    open(out, "wb").write(raw[:-7])  # tear mid-pair
    rc = cli.main(["demodulate", out, "--scheme", "lora", "--detector", "noncoherent"])
    assert rc == cli.EXIT_RUNTIME
    err = capsys.readouterr().err
    assert "byte" in err


def test_demodulate_coherent_needs_gain(tmp_path):
    out = str(tmp_path / "d.iq")
    cli.main(["modulate", "--scheme", "lora", "--lambda", "6", "--seed", "2", "--out", out])
    rc = cli.main(["demodulate", out, "--scheme", "lora", "--detector", "coherent"])
    assert rc == cli.EXIT_USAGE
    rc = cli.main(["demodulate", out, "--scheme", "lora", "--detector", "coherent",
                   "--gain", "1+0j"])
    assert rc == 0


def test_usage_errors_exit_1():
    assert cli.main(["modulate", "--scheme", "fsk", "--lambda", "6"]) == cli.EXIT_USAGE
    assert cli.main(["bogus-command"]) == cli.EXIT_USAGE


def test_ber_sweep_deterministic_and_worker_independent(tmp_path):
    campaign = write_campaign(tmp_path)
    out_a, out_b, out_c = (str(tmp_path / d) for d in ("a", "b", "c"))
    assert cli.main(["ber-sweep", "--campaign", campaign, "--out", out_a]) == 0
    assert cli.main(["ber-sweep", "--campaign", campaign, "--out", out_b]) == 0
    assert cli.main(["ber-sweep", "--campaign", campaign, "--out", out_c, "--workers", "2"]) == 0
    name = "tiny_lora_noncoherent_lam6.csv"
    csv_a = open(os.path.join(out_a, name), "rb").read()
    assert csv_a == open(os.path.join(out_b, name), "rb").read()
    assert csv_a == open(os.path.join(out_c, name), "rb").read()
    header = csv_a.decode().splitlines()[0]
    assert header == "scheme,detector,lambda,ebn0_db,bits,errors,ber,ci_low,ci_high"
    summary = json.load(open(os.path.join(out_a, "tiny.json")))
    assert summary["campaign"]["sweeps"][0]["seed"] == 77
    assert len(summary["results"][0]["curves"][0]["records"]) == 2


def test_ber_sweep_bad_campaign_exit_2(tmp_path):
    doc = {"schema": 1, "sweeps": [{"scheme": "lora"}]}
    campaign = write_campaign(tmp_path, doc, "bad.yaml")
    assert cli.main(["ber-sweep", "--campaign", campaign, "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_ber_sweep_missing_campaign_exit_3(tmp_path):
    rc = cli.main(["ber-sweep", "--campaign", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
    assert rc == cli.EXIT_RUNTIME


def test_env_var_default_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.ENV_OUT_DIR, str(tmp_path / "envout"))
    campaign = write_campaign(tmp_path)
    assert cli.main(["ber-sweep", "--campaign", campaign]) == 0
    assert os.path.exists(tmp_path / "envout" / "tiny.json")


def test_analyze_report(tmp_path):
    out = str(tmp_path / "report.json")
    assert cli.main(["analyze", "--lambda-range", "6:8", "--out", out]) == 0
    doc = json.load(open(out))
    rows = {r["lambda"]: r for r in doc["rows"]}
    assert rows[8]["sir_linear"] == 128.0
    assert abs(rows[8]["sir_db"] - 21.0721) < 1e-3
    assert rows[7]["sir_linear"] == 2 * rows[6]["sir_linear"]
    res = doc["oracle_residuals"]
    assert res["gauss_reciprocity_rel_c"] < 1e-9
    assert res["inner_product_rel_m"] < 1e-6
    assert res["interference_rel_m"] < 1e-6


def test_impairment_command(tmp_path):
    out = str(tmp_path / "imp")
    rc = cli.main([
        "impairment", "--scheme", "dm-tdm-css", "--detector", "noncoherent",
        "--lambda", "6", "--po", "0.7853981633974483", "--ebn0", "2,4",
        "--seed", "3", "--min-errors", "50", "--max-symbols", "20000", "--out", out,
    ])
    assert rc == 0
    doc = json.load(open(os.path.join(out, "impairment_po_dm-tdm-css_noncoherent_lam6.json")))
    assert doc["config"]["impairment"] == "po"
    assert len(doc["records"]) == 2


def test_impairment_requires_exactly_one_kind(tmp_path):
    base = ["impairment", "--scheme", "lora", "--detector", "noncoherent",
            "--lambda", "6", "--ebn0", "2", "--out", str(tmp_path)]
    assert cli.main(base) == cli.EXIT_USAGE
    assert cli.main(base + ["--po", "0.1", "--fo", "0.1"]) == cli.EXIT_USAGE


def test_se_ee_command(tmp_path):
    out = str(tmp_path / "seee")
    rc = cli.main([
        "se-ee", "--scheme", "lora", "--detector", "noncoherent",
        "--lambda-range", "6", "--seed", "2", "--min-errors", "100",
        "--max-symbols", "60000", "--out", out,
    ])
    assert rc == 0
    text = open(os.path.join(out, "se_ee_lora_noncoherent.csv")).read()
    lines = text.splitlines()
    assert lines[0] == "scheme,detector,lambda,se,required_ebn0_db,reachable"
    fields = lines[1].split(",")
    assert fields[2] == "6"
    assert float(fields[3]) == 6 / 64
    assert fields[5] == "True"
