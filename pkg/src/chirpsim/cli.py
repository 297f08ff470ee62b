"""Command line front end: waveform files, demodulation reports, BER campaigns.

Subcommands: modulate, demodulate, ber-sweep, se-ee, impairment, analyze.
Every run is deterministic given its arguments; output artifacts embed the
configuration that produced them. CHIRPSIM_OUT sets the default output
directory. Exit codes: 0 success, 1 usage error, 2 campaign/config schema
error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, analysis, sim
from .campaign import CampaignError, SweepJob, load_campaign
from .channel import ChannelSpec
from .iqio import IqFormatError, read_iq, read_sidecar, write_iq, write_sidecar
from .kernels import BACKEND_NAME
from .modem import (
    DETECTORS,
    SCHEMES,
    SpreadingFactor,
    bits_per_symbol,
    detection_report,
    map_bits,
    modulate,
)
from .signal import LAMBDA_MAX, LAMBDA_MIN, is_power_of_two

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

ENV_OUT_DIR = "CHIRPSIM_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _out_dir(args) -> str:
    out = getattr(args, "out", None) or os.environ.get(ENV_OUT_DIR) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _parse_lambda_range(text: str) -> list[int]:
    """Accept '8', '6:10' (inclusive) or '6,8,10'."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        if "," in text:
            return [int(v) for v in text.split(",")]
        return [int(text)]
    except ValueError:
        raise UsageError(f"cannot parse spreading-factor range {text!r}") from None


def _parse_grid(text: str) -> list[float]:
    """Accept 'a:b:step' (inclusive) or a comma list of dB values."""
    try:
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(round((hi - lo) / step)) + 1
            return [round(lo + i * step, 10) for i in range(count)]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse Eb/N0 grid {text!r}") from None


def _json_dump(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _run_meta() -> dict:
    return {"tool": "chirpsim", "version": __version__, "kernel_backend": BACKEND_NAME}


def cmd_modulate(args) -> int:
    sf = SpreadingFactor(args.lam)
    n_bits = bits_per_symbol(args.scheme, sf)
    if args.bits is not None:
        if len(args.bits) != n_bits or set(args.bits) - {"0", "1"}:
            raise UsageError(
                f"--bits must be {n_bits} characters of 0/1 for "
                f"{args.scheme} at lambda={sf.lam}, got {len(args.bits)}"
            )
        bits = np.array([int(b) for b in args.bits], dtype=np.uint8)
    else:
        rng = np.random.default_rng(args.seed)
        bits = rng.integers(0, 2, size=n_bits, dtype=np.uint8)
    idx = map_bits(args.scheme, bits, sf)
    samples = modulate(args.scheme, idx, sf)

    out = args.out or os.path.join(
        os.environ.get(ENV_OUT_DIR, "."), f"{args.scheme}_lam{sf.lam}.iq"
    )
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    write_iq(out, samples)
    write_sidecar(
        out,
        {
            "scheme": args.scheme,
            "lambda": sf.lam,
            "samples": sf.m,
            "bits": "".join(str(b) for b in bits),
            "indices": list(idx.astuple()),
            "seed": args.seed if args.bits is None else None,
            **_run_meta(),
        },
    )
    print(f"wrote {sf.m} samples ({sf.m * 16} bytes) to {out}")
    print(f"indices: {idx.astuple()}  bits: {''.join(str(b) for b in bits)}")
    return EXIT_OK


def cmd_demodulate(args) -> int:
    samples = read_iq(args.infile)
    sidecar = read_sidecar(args.infile)
    m = samples.shape[0]
    if args.lam is not None:
        sf = SpreadingFactor(args.lam)
        if sf.m != m:
            raise IqFormatError(
                f"{args.infile}: {m} samples but lambda={sf.lam} implies {sf.m}"
            )
    else:
        if not is_power_of_two(m) or not (1 << LAMBDA_MIN) <= m <= (1 << LAMBDA_MAX):
            raise IqFormatError(
                f"{args.infile}: {m} samples is not a valid symbol length "
                f"(need 2**lam, lam in [{LAMBDA_MIN}, {LAMBDA_MAX}])"
            )
        sf = SpreadingFactor(m.bit_length() - 1)

    h = None
    if args.detector == "coherent":
        if args.gain is None:
            raise UsageError("--detector coherent requires --gain")
        h = _parse_complex(args.gain)

    report = detection_report(args.scheme, samples, sf, h)
    print(f"bits: {report['bits']}")
    print(f"indices: {tuple(report['indices'])}")
    for d in report["decisions"]:
        print(
            f"  branch={d['branch']:<5} candidates={d['candidates']:<5} "
            f"bin={d['bin']:>4} stat={d['stat']:.4f} "
            f"runner_up_bin={d['runner_up_bin']:>4} margin={d['margin']:.4f}"
        )
    if sidecar is not None and "bits" in sidecar:
        ok = sidecar["bits"] == report["bits"]
        print(f"sidecar payload match: {'yes' if ok else 'NO'}")
    return EXIT_OK


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot parse complex gain {text!r}") from None


def _job_records(job: SweepJob, workers: int) -> dict:
    """Run one sweep job; returns {lam: [BerRecord, ...]}."""
    out = {}
    for lam in job.lams:
        out[lam] = sim.run_grid(
            job.scheme,
            job.detector,
            lam,
            job.ebn0_grid_db,
            channel_spec=job.channel,
            stop=job.stop,
            seed=job.seed,
            workers=workers,
        )
    return out


def cmd_ber_sweep(args) -> int:
    campaign = load_campaign(args.campaign)
    out_dir = _out_dir(args)
    t0 = time.perf_counter()
    job_results = []
    for job in campaign.jobs:
        per_lam = _job_records(job, args.workers)
        for lam, records in per_lam.items():
            csv_path = os.path.join(out_dir, f"{campaign.name}_{job.name}_lam{lam}.csv")
            sim.write_csv(records, csv_path)
            print(f"{job.name} lambda={lam}: {len(records)} points -> {csv_path}")
        job_results.append(
            {
                "job": job.to_dict(),
                "curves": [
                    {
                        "lambda": lam,
                        "records": [r.to_dict() for r in records],
                        "required_ebn0_db": sim.required_ebn0_db(records),
                        "target_ber": sim.TARGET_BER,
                    }
                    for lam, records in per_lam.items()
                ],
            }
        )
    doc = {
        **_run_meta(),
        "campaign": campaign.to_dict(),
        "results": job_results,
        "wall_seconds": time.perf_counter() - t0,
    }
    json_path = os.path.join(out_dir, f"{campaign.name}.json")
    _json_dump(doc, json_path)
    print(f"campaign summary -> {json_path}")
    return EXIT_OK


def cmd_se_ee(args) -> int:
    lams = _parse_lambda_range(args.lambda_range)
    channel = ChannelSpec(fading_rho=args.fading_rho)
    stop = sim.StopRule(min_bit_errors=args.min_errors, max_symbols=args.max_symbols)
    points = sim.run_se_ee_curve(
        args.scheme, args.detector, lams, channel,
        seed=args.seed, stop=stop, workers=args.workers,
    )
    out_dir = _out_dir(args)
    base = f"se_ee_{args.scheme}_{args.detector}"
    csv_path = os.path.join(out_dir, base + ".csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        f.write("scheme,detector,lambda,se,required_ebn0_db,reachable\n")
        for p in points:
            req = "" if p.required_ebn0_db is None else repr(float(p.required_ebn0_db))
            f.write(
                f"{p.scheme},{p.detector},{p.lam},{repr(float(p.se))},{req},{p.reachable}\n"
            )
    doc = {
        **_run_meta(),
        "config": {
            "scheme": args.scheme,
            "detector": args.detector,
            "lambdas": lams,
            "seed": args.seed,
            "fading_rho": args.fading_rho,
            "stop": {"min_bit_errors": stop.min_bit_errors, "max_symbols": stop.max_symbols},
            "target_ber": sim.TARGET_BER,
        },
        "points": [p.to_dict() for p in points],
    }
    _json_dump(doc, os.path.join(out_dir, base + ".json"))
    for p in points:
        req = "unreachable" if p.required_ebn0_db is None else f"{p.required_ebn0_db:.2f} dB"
        print(f"lambda={p.lam} se={float(p.se):.6f} required_ebn0={req}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_impairment(args) -> int:
    if (args.po is None) == (args.fo is None):
        raise UsageError("pass exactly one of --po (radians) or --fo (cycles/symbol)")
    kind, value = ("po", args.po) if args.po is not None else ("fo", args.fo)
    grid = _parse_grid(args.ebn0)
    stop = sim.StopRule(min_bit_errors=args.min_errors, max_symbols=args.max_symbols)
    records = sim.run_impairment_suite(
        args.scheme, args.detector, args.lam, kind, value, grid,
        stop=stop, seed=args.seed, workers=args.workers,
    )
    out_dir = _out_dir(args)
    base = f"impairment_{kind}_{args.scheme}_{args.detector}_lam{args.lam}"
    csv_path = os.path.join(out_dir, base + ".csv")
    sim.write_csv(records, csv_path)
    doc = {
        **_run_meta(),
        "config": {
            "scheme": args.scheme,
            "detector": args.detector,
            "lambda": args.lam,
            "impairment": kind,
            "value": value,
            "ebn0_db": grid,
            "seed": args.seed,
            "stop": {"min_bit_errors": stop.min_bit_errors, "max_symbols": stop.max_symbols},
        },
        "records": [r.to_dict() for r in records],
        "required_ebn0_db": sim.required_ebn0_db(records),
        "target_ber": sim.TARGET_BER,
    }
    _json_dump(doc, os.path.join(out_dir, base + ".json"))
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    lams = _parse_lambda_range(args.lambda_range)
    sigma2_list = [float(v) for v in args.sigma2.split(",")] if args.sigma2 else [0.0]
    rows = []
    for lam in lams:
        sf = SpreadingFactor(lam)
        rows.append(
            {
                "lambda": lam,
                "m": sf.m,
                "sir_linear": analysis.sir_linear(sf),
                "sir_db": analysis.sir_db(sf),
                "sinr": [
                    {"sigma2": s2, "sinr_linear": analysis.sinr_linear(sf, s2)}
                    for s2 in sigma2_list
                ],
            }
        )
    residuals = analysis.oracle_residuals(lams, seed=args.seed)
    doc = {**_run_meta(), "rows": rows, "oracle_residuals": residuals}
    if args.out:
        parent = os.path.dirname(args.out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        _json_dump(doc, args.out)
        print(f"wrote {args.out}")
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="chirpsim", description=__doc__)
    p.add_argument("--version", action="version", version=f"chirpsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, scheme=True, detector=True, lam=True, seed=True, out=True, workers=False):
        if scheme:
            sp.add_argument("--scheme", required=True, choices=SCHEMES)
        if detector:
            sp.add_argument("--detector", required=True, choices=DETECTORS)
        if lam:
            sp.add_argument("--lambda", dest="lam", type=int, required=True,
                            help="spreading factor exponent in [6, 12]")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if out:
            sp.add_argument("--out", default=None,
                            help=f"output path/directory (default: ${ENV_OUT_DIR} or .)")
        if workers:
            sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("modulate", help="synthesize one symbol into an IQ file")
    add_common(sp, detector=False)
    sp.add_argument("--bits", default=None, help="explicit 0/1 payload string")
    sp.set_defaults(func=cmd_modulate)

    sp = sub.add_parser("demodulate", help="detect the payload of an IQ file")
    sp.add_argument("infile")
    add_common(sp, lam=False, seed=False, out=False)
    sp.add_argument("--lambda", dest="lam", type=int, default=None,
                    help="spreading factor (default: inferred from file length)")
    sp.add_argument("--gain", default=None, help="complex channel gain, e.g. '0.3+0.2j'")
    sp.set_defaults(func=cmd_demodulate)

    sp = sub.add_parser("ber-sweep", help="run a campaign file of BER sweeps")
    sp.add_argument("--campaign", required=True)
    add_common(sp, scheme=False, detector=False, lam=False, seed=False, workers=True)
    sp.set_defaults(func=cmd_ber_sweep)

    sp = sub.add_parser("se-ee", help="spectral efficiency vs required Eb/N0")
    add_common(sp, lam=False, workers=True)
    sp.add_argument("--lambda-range", default="6:12", help="e.g. 8, 6:10 or 6,8,10")
    sp.add_argument("--fading-rho", type=float, default=None)
    sp.add_argument("--min-errors", type=int, default=sim.StopRule.min_bit_errors)
    sp.add_argument("--max-symbols", type=int, default=sim.StopRule.max_symbols)
    sp.set_defaults(func=cmd_se_ee)

    sp = sub.add_parser("impairment", help="BER curve under a phase or frequency offset")
    add_common(sp, workers=True)
    sp.add_argument("--po", type=float, default=None, help="phase offset in radians")
    sp.add_argument("--fo", type=float, default=None, help="frequency offset in cycles/symbol")
    sp.add_argument("--ebn0", default="0:12:0.5", help="grid 'lo:hi:step' or comma list (dB)")
    sp.add_argument("--min-errors", type=int, default=sim.StopRule.min_bit_errors)
    sp.add_argument("--max-symbols", type=int, default=sim.StopRule.max_symbols)
    sp.set_defaults(func=cmd_impairment)

    sp = sub.add_parser("analyze", help="SIR/SINR table and closed-form oracle residuals")
    add_common(sp, scheme=False, detector=False, lam=False)
    sp.add_argument("--lambda-range", default="6:12")
    sp.add_argument("--sigma2", default=None, help="comma list of noise variances for SINR rows")
    sp.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CampaignError as e:
        print(f"campaign error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IqFormatError, OSError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
