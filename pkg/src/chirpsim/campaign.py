"""Campaign files: a strict, versioned YAML schema describing BER sweeps.

A campaign is a list of sweep jobs; each job fixes a scheme, a detector, a
set of spreading factors, an Eb/N0 grid and a channel template. Noise level
is always derived from the grid, so the channel template may not carry its
own noise variance. Unknown keys are rejected: a silent typo in a config
would invalidate an entire measurement campaign.

Example
-------
schema: 1
name: awgn-lam8
sweeps:
  - scheme: dm-tdm-css
    detector: noncoherent
    lambdas: [8]
    ebn0_db: {start: 0.0, stop: 10.0, step: 0.5}
    seed: 1234
    stop: {min_bit_errors: 200, max_symbols: 2000000}
    channel: {fading_rho: 0.2}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .channel import ChannelSpec
from .modem import DETECTORS, SCHEMES
from .sim import StopRule

SCHEMA_VERSION = 1


class CampaignError(Exception):
    """Raised on any campaign schema violation."""


@dataclass(frozen=True)
class SweepJob:
    name: str
    scheme: str
    detector: str
    lams: tuple[int, ...]
    ebn0_grid_db: tuple[float, ...]
    channel: ChannelSpec
    stop: StopRule
    seed: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scheme": self.scheme,
            "detector": self.detector,
            "lambdas": list(self.lams),
            "ebn0_db": list(self.ebn0_grid_db),
            "channel": self.channel.to_dict(),
            "stop": {
                "min_bit_errors": self.stop.min_bit_errors,
                "max_symbols": self.stop.max_symbols,
            },
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Campaign:
    name: str
    jobs: tuple[SweepJob, ...]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "sweeps": [j.to_dict() for j in self.jobs],
        }


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise CampaignError(f"{where} must be a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(mapping: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise CampaignError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(mapping)
    if missing:
        raise CampaignError(f"missing keys in {where}: {sorted(missing)}")


def _parse_grid(spec, where: str) -> tuple[float, ...]:
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise CampaignError(f"{where} must not be empty")
        try:
            return tuple(float(v) for v in spec)
        except (TypeError, ValueError) as e:
            raise CampaignError(f"{where} must hold numbers: {e}") from None
    if isinstance(spec, dict):
        _check_keys(spec, {"start", "stop", "step"}, {"start", "stop", "step"}, where)
        start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise CampaignError(f"{where}: need step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        return tuple(float(x) for x in np.round(start + step * np.arange(count), 10))
    raise CampaignError(f"{where} must be a list or a start/stop/step mapping")


def _parse_channel(spec, where: str) -> ChannelSpec:
    if spec is None:
        return ChannelSpec()
    spec = _require_mapping(spec, where)
    _check_keys(
        spec, {"gain", "noise_sigma2", "fading_rho", "phase_offset", "freq_offset"}, set(), where
    )
    try:
        parsed = ChannelSpec.from_dict(spec)
    except (TypeError, ValueError) as e:
        raise CampaignError(f"invalid {where}: {e}") from None
    if parsed.noise_sigma2 != 0.0:
        raise CampaignError(
            f"{where}: the noise level is derived from the Eb/N0 grid; "
            f"noise_sigma2 must be 0"
        )
    return parsed


def _parse_stop(spec, where: str) -> StopRule:
    if spec is None:
        return StopRule()
    spec = _require_mapping(spec, where)
    _check_keys(spec, {"min_bit_errors", "max_symbols"}, set(), where)
    try:
        return StopRule(
            min_bit_errors=int(spec.get("min_bit_errors", StopRule.min_bit_errors)),
            max_symbols=int(spec.get("max_symbols", StopRule.max_symbols)),
        )
    except (TypeError, ValueError) as e:
        raise CampaignError(f"invalid {where}: {e}") from None


def _parse_job(spec, position: int) -> SweepJob:
    where = f"sweeps[{position}]"
    spec = _require_mapping(spec, where)
    _check_keys(
        spec,
        {"name", "scheme", "detector", "lambdas", "ebn0_db", "seed", "stop", "channel"},
        {"scheme", "detector", "lambdas", "ebn0_db", "seed"},
        where,
    )
    scheme = spec["scheme"]
    if scheme not in SCHEMES:
        raise CampaignError(f"{where}.scheme must be one of {list(SCHEMES)}, got {scheme!r}")
    detector = spec["detector"]
    if detector not in DETECTORS:
        raise CampaignError(f"{where}.detector must be one of {list(DETECTORS)}, got {detector!r}")
    lams_raw = spec["lambdas"]
    if not isinstance(lams_raw, (list, tuple)) or not lams_raw:
        raise CampaignError(f"{where}.lambdas must be a non-empty list")
    lams = []
    for v in lams_raw:
        if not isinstance(v, int) or not (6 <= v <= 12):
            raise CampaignError(f"{where}.lambdas entries must be integers in [6, 12], got {v!r}")
        lams.append(v)
    seed = spec["seed"]
    if not isinstance(seed, int) or seed < 0:
        raise CampaignError(f"{where}.seed must be a non-negative integer, got {seed!r}")
    name = spec.get("name", f"{scheme}_{detector}")
    if not isinstance(name, str) or not name:
        raise CampaignError(f"{where}.name must be a non-empty string")
    return SweepJob(
        name=name,
        scheme=scheme,
        detector=detector,
        lams=tuple(lams),
        ebn0_grid_db=_parse_grid(spec["ebn0_db"], f"{where}.ebn0_db"),
        channel=_parse_channel(spec.get("channel"), f"{where}.channel"),
        stop=_parse_stop(spec.get("stop"), f"{where}.stop"),
        seed=seed,
    )


def parse_campaign(doc, name_hint: str = "campaign") -> Campaign:
    doc = _require_mapping(doc, "campaign document")
    _check_keys(doc, {"schema", "name", "sweeps"}, {"schema", "sweeps"}, "campaign document")
    if doc["schema"] != SCHEMA_VERSION:
        raise CampaignError(
            f"unsupported schema version {doc['schema']!r}, expected {SCHEMA_VERSION}"
        )
    sweeps = doc["sweeps"]
    if not isinstance(sweeps, list) or not sweeps:
        raise CampaignError("sweeps must be a non-empty list")
    jobs = tuple(_parse_job(j, i) for i, j in enumerate(sweeps))
    names = [j.name for j in jobs]
    if len(set(names)) != len(names):
        raise CampaignError(f"sweep names must be unique, got {names}")
    name = doc.get("name", name_hint)
    if not isinstance(name, str) or not name:
        raise CampaignError("campaign name must be a non-empty string")
    return Campaign(name=name, jobs=jobs)


def load_campaign(path) -> Campaign:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise CampaignError(f"cannot parse {path}: {e}") from None
    import os

    hint = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_campaign(doc, name_hint=hint)
