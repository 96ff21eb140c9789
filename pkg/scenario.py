"""
Scenario configuration

A scenario is one JSON document with the blocks ``probe``, ``sample``,
``channel``, ``measurement`` and an optional ``sweep``:

    {
      "probe":   {"family": "polarization_squeezed", "alpha": 31622.78, "s": 1.0},
      "sample":  {"concentration": 0.01, "concentration_unit": "g/cm3",
                  "path_length": 1.0, "path_length_unit": "cm", "delta_gamma": 1.16},
      "channel": {"mode": "birefringence", "eta": 1.0},
      "measurement": {"scheme": "balanced", "nu": 1, "seed": 7},
      "sweep":   {"parameter": "probe.s", "start": 0.0, "stop": 1.8, "steps": 19}
    }

Unknown keys are rejected with the dotted path of the offending field. The
unit tags of the sample block are mandatory.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from models import SUCROSE, SUCROSE_PHOTONS, ChiralSample, ParameterError, ProbeFamily, ProbeSpec
from montecarlo import OUTCOME_MODELS, RATIO_REFERENCE_SAMPLE, SCHEMES, ExperimentPlan

logger = logging.getLogger(__name__)

CHANNEL_MODES = ("birefringence", "dichroism")

_REQUIRED = object()


class ConfigError(ValueError):
    """Invalid scenario; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementBlock:
    scheme: str = "balanced"
    xi: Optional[float] = None
    nu: int = 1
    seed: Optional[int] = None
    outcome_model: str = "gaussian-bright"
    partitions: Optional[int] = None

    def to_dict(self):
        return {
            "scheme": self.scheme,
            "xi": self.xi,
            "nu": self.nu,
            "seed": self.seed,
            "outcome_model": self.outcome_model,
            "partitions": self.partitions,
        }


@dataclass(frozen=True)
class SweepBlock:
    parameter: str
    values: Tuple[float, ...]

    def to_dict(self):
        return {"parameter": self.parameter, "values": list(self.values)}


@dataclass(frozen=True)
class ScenarioConfig:
    probe: ProbeSpec
    sample: ChiralSample
    mode: str = "birefringence"
    common_phase: float = 0.0
    measurement: MeasurementBlock = field(default_factory=MeasurementBlock)
    sweep: Optional[SweepBlock] = None

    # -- serialization -------------------------------------------------------

    @classmethod
    def from_dict(cls, data) -> ScenarioConfig:
        if not isinstance(data, dict):
            raise ConfigError("<root>", "scenario must be a JSON object")
        _reject_unknown(data, ("probe", "sample", "channel", "measurement", "sweep"), "")
        for block in ("probe", "sample", "channel"):
            if block not in data:
                raise ConfigError(block, "block is required")

        probe_data = _read_block(data["probe"], "probe", {
            "family": (_enum(ProbeFamily), ProbeFamily.POLARIZATION_SQUEEZED),
            "alpha": (_number, _REQUIRED),
            "alpha_phase": (_number, 0.0),
            "s": (_number, 0.0),
            "theta": (_number, 0.0),
        })
        sample_data = _read_block(data["sample"], "sample", {
            "concentration": (_number, _REQUIRED),
            "concentration_unit": (_string, _REQUIRED),
            "path_length": (_number, _REQUIRED),
            "path_length_unit": (_string, _REQUIRED),
            "delta_gamma": (_number, 0.0),
            "eps_L": (_number, 0.0),
            "eps_R": (_number, 0.0),
        })
        channel = _read_block(data["channel"], "channel", {
            "mode": (_choice(CHANNEL_MODES), _REQUIRED),
            "eta": (_number, 1.0),
            "common_phase": (_number, 0.0),
        })
        measurement = _read_block(data.get("measurement", {}), "measurement", {
            "scheme": (_choice(SCHEMES), None),
            "xi": (_optional(_number), None),
            "nu": (_integer, 1),
            "seed": (_optional(_integer), None),
            "outcome_model": (_choice(OUTCOME_MODELS), "gaussian-bright"),
            "partitions": (_optional(_integer), None),
        })
        if measurement["scheme"] is None:
            measurement["scheme"] = "balanced" if channel["mode"] == "birefringence" else "ratio"

        probe = _build("probe", ProbeSpec, **probe_data)
        sample = _build("sample", ChiralSample, eta=channel["eta"], **sample_data)
        config = cls(
            probe=probe,
            sample=sample,
            mode=channel["mode"],
            common_phase=channel["common_phase"],
            measurement=MeasurementBlock(**measurement),
        )
        config._check_consistency()
        if data.get("sweep") is not None:
            config = replace(config, sweep=_read_sweep(data["sweep"], config))
        return config

    def to_dict(self):
        sample = self.sample.to_dict()
        eta = sample.pop("eta")
        data = {
            "probe": self.probe.to_dict(),
            "sample": sample,
            "channel": {"mode": self.mode, "eta": eta, "common_phase": self.common_phase},
            "measurement": self.measurement.to_dict(),
        }
        if self.sweep is not None:
            data["sweep"] = self.sweep.to_dict()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # -- derived views -------------------------------------------------------

    def with_value(self, parameter, value) -> ScenarioConfig:
        """Copy with one dotted numeric field replaced, e.g. ``probe.s``."""
        block, name = _split_parameter(parameter)
        path = f"sweep.parameter ({parameter})"
        if block == "probe":
            return replace(self, probe=_build(path, replace, self.probe, **{name: value}))
        if block == "sample":
            return replace(self, sample=_build(path, replace, self.sample, **{name: value}))
        if block == "channel" and name == "eta":
            return replace(self, sample=_build(path, replace, self.sample, eta=value))
        if block == "channel" and name == "common_phase":
            return replace(self, common_phase=float(value))
        if block == "measurement":
            converted = int(value) if name in ("nu", "seed", "partitions") else float(value)
            return replace(self, measurement=replace(self.measurement, **{name: converted}))
        raise ConfigError("sweep.parameter", f"{parameter!r} is not a numeric scenario field")

    def points(self):
        """(sweep value, config) pairs in sweep order; one point without a sweep."""
        if self.sweep is None:
            return [(None, self)]
        return [(value, self.with_value(self.sweep.parameter, value)) for value in self.sweep.values]

    def plan(self) -> ExperimentPlan:
        m = self.measurement
        return ExperimentPlan(
            probe=self.probe,
            sample=self.sample,
            scheme=m.scheme,
            trials=m.nu,
            seed=m.seed,
            xi=m.xi,
            outcome_model=m.outcome_model,
            common_phase=self.common_phase,
            partitions=m.partitions,
        )

    def _check_consistency(self):
        if self.mode == "birefringence":
            if self.measurement.scheme != "balanced":
                raise ConfigError("measurement.scheme", "birefringence scenarios use the balanced scheme")
            if self.probe.family is ProbeFamily.TWIN_SQUEEZED:
                raise ConfigError("probe.family", "birefringence needs a coherent or polarization-squeezed probe")
            if self.sample.is_molar:
                raise ConfigError("sample.concentration_unit", "birefringence needs a mass concentration")
        else:
            if self.measurement.scheme != "ratio":
                raise ConfigError("measurement.scheme", "dichroism scenarios use the ratio scheme")
            if self.probe.family is ProbeFamily.POLARIZATION_SQUEEZED:
                raise ConfigError("probe.family", "dichroism needs a coherent or twin-squeezed probe")
            if not self.sample.is_molar:
                raise ConfigError("sample.concentration_unit", "dichroism needs a molar concentration (mol/L)")


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON in {path}: {exc}")
    logger.debug("Loaded scenario from %s", path)
    return ScenarioConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

def default_scenario(mode="birefringence") -> ScenarioConfig:
    """Sucrose polarimetry, or a weakly dichroic molar sample with T_R = 0.9."""
    if mode == "birefringence":
        return ScenarioConfig(
            probe=ProbeSpec.from_photons(SUCROSE_PHOTONS, family=ProbeFamily.POLARIZATION_SQUEEZED, s=1.0),
            sample=SUCROSE,
            mode="birefringence",
            measurement=MeasurementBlock(scheme="balanced"),
        )
    if mode == "dichroism":
        return ScenarioConfig(
            probe=ProbeSpec.from_photons(SUCROSE_PHOTONS, family=ProbeFamily.TWIN_SQUEEZED, s=1.0),
            sample=RATIO_REFERENCE_SAMPLE,
            mode="dichroism",
            measurement=MeasurementBlock(scheme="ratio"),
        )
    raise ConfigError("channel.mode", f"expected one of {CHANNEL_MODES}, got {mode!r}")


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

_SWEEPABLE = {
    "probe": ("alpha", "alpha_phase", "s", "theta"),
    "sample": ("concentration", "path_length", "delta_gamma", "eps_L", "eps_R"),
    "channel": ("eta", "common_phase"),
    "measurement": ("xi", "nu", "seed"),
}


def _read_block(data, path, schema) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(path, "block must be a JSON object")
    _reject_unknown(data, schema, path)
    values = {}
    for name, (convert, default) in schema.items():
        key = f"{path}.{name}"
        if name not in data:
            if default is _REQUIRED:
                raise ConfigError(key, "field is required")
            values[name] = default
            continue
        values[name] = convert(data[name], key)
    return values


def _read_sweep(data, config):
    if not isinstance(data, dict):
        raise ConfigError("sweep", "block must be a JSON object")
    _reject_unknown(data, ("parameter", "values", "start", "stop", "steps"), "sweep")
    if "parameter" not in data:
        raise ConfigError("sweep.parameter", "field is required")
    parameter = _string(data["parameter"], "sweep.parameter")
    block, name = _split_parameter(parameter)
    if name not in _SWEEPABLE.get(block, ()):
        raise ConfigError("sweep.parameter", f"{parameter!r} is not a numeric scenario field")

    if "values" in data:
        if any(k in data for k in ("start", "stop", "steps")):
            raise ConfigError("sweep", "give either values or start/stop/steps, not both")
        raw = data["values"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("sweep.values", "must be a non-empty list of numbers")
        values = tuple(_number(v, f"sweep.values[{i}]") for i, v in enumerate(raw))
    else:
        for key in ("start", "stop", "steps"):
            if key not in data:
                raise ConfigError(f"sweep.{key}", "field is required without sweep.values")
        start = _number(data["start"], "sweep.start")
        stop = _number(data["stop"], "sweep.stop")
        steps = _integer(data["steps"], "sweep.steps")
        if steps < 1:
            raise ConfigError("sweep.steps", "must be >= 1")
        values = tuple(float(v) for v in np.linspace(start, stop, steps))

    sweep = SweepBlock(parameter=parameter, values=values)
    for value in values:
        config.with_value(parameter, value)
    return sweep


def _reject_unknown(data, allowed, path):
    for key in data:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown key")


def _split_parameter(parameter):
    block, _, name = parameter.partition(".")
    if not name:
        raise ConfigError("sweep.parameter", f"expected block.field, got {parameter!r}")
    return block, name


def _build(path, constructor, *args, **kwargs):
    try:
        return constructor(*args, **kwargs)
    except (ParameterError, TypeError) as exc:
        raise ConfigError(path, str(exc))


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    return float(value)


def _integer(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _string(value, path) -> str:
    if not isinstance(value, str):
        raise ConfigError(path, f"expected a string, got {value!r}")
    return value


def _optional(convert):
    def read(value, path):
        return None if value is None else convert(value, path)
    return read


def _choice(options):
    def read(value, path):
        if value not in options:
            raise ConfigError(path, f"expected one of {', '.join(options)}, got {value!r}")
        return value
    return read


def _enum(kind):
    def read(value, path):
        try:
            return kind(value)
        except ValueError:
            raise ConfigError(path, f"expected one of {', '.join(k.value for k in kind)}, got {value!r}")
    return read
