"""Experiment configuration files (YAML or JSON).

Recognised layout::

    set: 1                  # or {E_C: ..., E_CJ: ..., E_J: ..., E_L: ...}
    flux: {phi_e0: [..3], a: [..3], omega: [..3], epsilon: 0.0}
    space: {n_max: 5, d2: 11, d3: 11, basis: oscillator, grid_half_width: 12.566}
    run: {preset: fig3, levels: 6, points: 201, dt: 0.01, T: 40.0, S0: 1e-4, calibrate_T1: 10.0}

Every section is optional; unknown keys raise :class:`ConfigError`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .basis import HilbertSpace
from .parameters import PARAMETER_SETS, FluxConfiguration, ParameterSet

SECTION_KEYS = {
    "set": {"E_C", "E_CJ", "E_J", "E_L"},
    "flux": {"phi_e0", "a", "omega", "epsilon"},
    "space": {"n_max", "d2", "d3", "basis", "grid_half_width"},
    "run": {"preset", "levels", "points", "dt", "T", "S0", "calibrate_T1", "full_basis", "workers"},
}

# Grid settings used when only the basis kind is switched to "grid".
GRID_DEFAULT = {"d2": 41, "d3": 41, "grid_half_width": 6 * np.pi}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    params: ParameterSet = PARAMETER_SETS[1]
    set_name: str = "set1"
    flux: FluxConfiguration | None = None
    space: HilbertSpace = field(default_factory=HilbertSpace)
    run: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "set": self.set_name,
            "params": self.params.as_dict(),
            "flux": None if self.flux is None else self.flux.as_dict(),
            "space": self.space.as_dict(),
            "run": dict(self.run),
        }

    def with_set(self, index: int) -> ExperimentConfig:
        if index not in PARAMETER_SETS:
            raise ConfigError(f"unknown parameter set {index}; choose 1, 2 or 3")
        return replace(self, params=PARAMETER_SETS[index], set_name=f"set{index}")

    def with_basis(self, basis: str) -> ExperimentConfig:
        if basis == self.space.basis:
            return self
        extra = GRID_DEFAULT if basis == "grid" else {"d2": 11, "d3": 11}
        return replace(self, space=replace(self.space, basis=basis, **extra))


def _check_keys(section: str, data) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    unknown = set(data) - SECTION_KEYS[section]
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(sorted(unknown))}")
    return data


def _triple(name, value):
    if np.isscalar(value):
        return (float(value),) * 3
    value = tuple(float(v) for v in value)
    if len(value) != 3:
        raise ConfigError(f"flux.{name} needs one or three numbers")
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    unknown = set(data) - set(SECTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    cfg = ExperimentConfig()

    if "set" in data:
        entry = data["set"]
        if isinstance(entry, dict):
            entry = _check_keys("set", entry)
            missing = SECTION_KEYS["set"] - set(entry)
            if missing:
                raise ConfigError(f"custom set is missing {', '.join(sorted(missing))}")
            try:
                cfg.params = ParameterSet(**{k: float(v) for k, v in entry.items()})
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            cfg.set_name = "custom"
        else:
            label = str(entry).lower().removeprefix("set")
            if not label.isdigit():
                raise ConfigError(f"set must be 1, 2, 3 or a mapping, got {entry!r}")
            cfg = cfg.with_set(int(label))

    if "flux" in data:
        entry = _check_keys("flux", data["flux"])
        kwargs = {k: _triple(k, entry[k]) for k in ("phi_e0", "a", "omega") if k in entry}
        if "epsilon" in entry:
            kwargs["epsilon"] = float(entry["epsilon"])
        try:
            cfg.flux = FluxConfiguration(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    if "space" in data:
        entry = dict(_check_keys("space", data["space"]))
        basis = entry.get("basis", "oscillator")
        base = {"basis": basis, **(GRID_DEFAULT if basis == "grid" else {})}
        base.update(entry)
        try:
            cfg.space = HilbertSpace(**base)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    if "run" in data:
        cfg.run = dict(_check_keys("run", data["run"]))
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    else:
        import yaml

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return config_from_dict(data or {})
