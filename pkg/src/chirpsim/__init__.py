"""Chirp spread spectrum lab.

Three CSS modems (LoRa-style single shift, dual-slope time multiplexing, and
the dual-mode even/odd-tone variant), channel impairments, closed-form
interference analysis with brute-force cross-checks, and a seeded Monte
Carlo BER engine behind a CLI.
"""

__version__ = "0.1.0"

from .channel import ChannelSpec, NoiseSource
from .modem import (
    DETECTORS,
    SCHEMES,
    DmTdmIndices,
    LoRaIndex,
    SpreadingFactor,
    TdmIndices,
)

__all__ = [
    "ChannelSpec",
    "NoiseSource",
    "DETECTORS",
    "SCHEMES",
    "DmTdmIndices",
    "LoRaIndex",
    "SpreadingFactor",
    "TdmIndices",
    "__version__",
]
