"""Hot-path modem kernels with a compiled core and a pure-numpy fallback.

The Monte Carlo engine spends nearly all of its time modulating symbol
batches and running dechirp-DFT detection, so those six operations live
behind a backend selected once at import:

- ``chirpsim.kernels._speedups``: Cython extension (used when built),
- ``chirpsim.kernels._numpy``: vectorized numpy reference (always present).

Set ``CHIRPSIM_BACKEND`` to ``compiled``, ``python`` or ``auto`` (default)
to force the choice. Both backends implement identical contracts; see
``benchmarks/bench_backends.py`` for a throughput comparison.
"""

from __future__ import annotations

import os

from . import _numpy as numpy_backend

try:
    from . import _speedups as compiled_backend
except ImportError:
    compiled_backend = None

_choice = os.environ.get("CHIRPSIM_BACKEND", "auto").lower()
if _choice == "python":
    _active = numpy_backend
elif _choice == "compiled":
    if compiled_backend is None:
        raise ImportError(
            "CHIRPSIM_BACKEND=compiled but the chirpsim.kernels._speedups "
            "extension is not built; install with `pip install -e .`"
        )
    _active = compiled_backend
elif _choice == "auto":
    _active = compiled_backend if compiled_backend is not None else numpy_backend
else:
    raise ValueError(
        f"CHIRPSIM_BACKEND must be 'auto', 'compiled' or 'python', got {_choice!r}"
    )

BACKEND_NAME = "compiled" if _active is compiled_backend else "python"

dmtdm_modulate = _active.dmtdm_modulate
lora_modulate = _active.lora_modulate
tdm_modulate = _active.tdm_modulate
dmtdm_detect = _active.dmtdm_detect
lora_detect = _active.lora_detect
tdm_detect = _active.tdm_detect


def available_backends() -> dict:
    """Name -> module for every importable backend."""
    out = {"python": numpy_backend}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    return out
