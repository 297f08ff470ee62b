#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-numpy modem kernels.

Times the Monte Carlo hot path (batch modulation plus dechirp-DFT detection)
for each scheme and a few spreading factors, on every backend that imports.
Run after `pip install -e .` so the compiled extension is available:

    python benchmarks/bench_backends.py [--symbols 8192] [--repeats 5]
"""

import argparse
import timeit

import numpy as np

from chirpsim.kernels import available_backends


def bench_pair(backend, scheme: str, lam: int, n_symbols: int, repeats: int) -> float:
    m = 1 << lam
    rng = np.random.default_rng(123)
    if scheme == "lora":
        idx = rng.integers(0, m, n_symbols)
        mod, det = backend.lora_modulate, backend.lora_detect
    elif scheme == "tdm-css":
        idx = rng.integers(0, m, (n_symbols, 2))
        mod, det = backend.tdm_modulate, backend.tdm_detect
    else:
        idx = rng.integers(0, m // 2, (n_symbols, 4))
        mod, det = backend.dmtdm_modulate, backend.dmtdm_detect

    noise = 0.5 * (rng.standard_normal((n_symbols, m)) + 1j * rng.standard_normal((n_symbols, m)))

    def once():
        det(mod(idx, m) + noise, m, None)

    once()  # warm the table caches
    return min(timeit.repeat(once, number=1, repeat=repeats))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--symbols", type=int, default=8192)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--lambdas", default="7,8,10")
    args = ap.parse_args()

    backends = available_backends()
    lams = [int(v) for v in args.lambdas.split(",")]
    print(f"backends: {', '.join(backends)}   batch: {args.symbols} symbols")
    header = f"{'scheme':<12}{'lambda':>7}" + "".join(f"{name + ' ksym/s':>18}" for name in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for scheme in ("lora", "tdm-css", "dm-tdm-css"):
        for lam in lams:
            rates = {}
            for name, backend in backends.items():
                t = bench_pair(backend, scheme, lam, args.symbols, args.repeats)
                rates[name] = args.symbols / t / 1e3
            row = f"{scheme:<12}{lam:>7}" + "".join(f"{rates[n]:>18.1f}" for n in backends)
            if len(rates) > 1:
                row += f"{rates['compiled'] / rates['python']:>10.2f}"
            print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
