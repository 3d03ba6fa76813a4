"""JSON scenario files and built-in presets.

A scenario holds the network, the hop count ``k`` and optionally a power
split, a sweep description and optimizer options. Parsing is strict: unknown
keys are errors.

Example::

    {
      "positions": [0, 1, 2, 3, 4],
      "powers": [1, 1, 1, 1],
      "noises": [1, 1, 1, 1],
      "kappa": 1.0,
      "eta": 2.0,
      "k": 2,
      "split": {"named": {"alpha1": 0.0, "alpha2": 0.0, "alpha3": 0.0}},
      "sweep": {"parameter": "power_all", "values": [0.01, 0.1, 1, 10]},
      "optimizer": {"resolution": 0.1, "permute": false}
    }

``split`` is either ``{"matrix": [[...], ...]}`` (row i = node i, column j =
layer j) or ``{"named": {...}}``. Named splits exist for T = 5 only: with
k = 2 the keys are alpha1..alpha3 (share sent two hops ahead); with k = 4
they are alpha1, beta1, gamma1, alpha2, beta2, alpha3 (missing keys are 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .allocation import (PowerSplit, ViewSpec, from_named_omniscient, from_named_twohop,
                         require_valid)
from .channel import NetworkConfig
from .errors import ConfigurationError
from .optimizer import DEFAULT_BUDGET, OptimizerOptions

SWEEP_PARAMETERS = ("power_all", "noise_all")
_TOP_KEYS = {"positions", "powers", "noises", "kappa", "eta", "k", "split", "sweep", "optimizer"}
_OPTIMIZER_KEYS = {"resolution", "budget", "permute", "step0", "step_floor"}
_TWOHOP_KEYS = {"alpha1", "alpha2", "alpha3"}
_OMNISCIENT_KEYS = {"alpha1", "beta1", "gamma1", "alpha2", "beta2", "alpha3"}


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class Scenario:
    config: NetworkConfig
    k: int
    split: PowerSplit | None = None
    sweep: Sweep | None = None
    optimizer: OptimizerOptions = OptimizerOptions()

    @property
    def view(self) -> ViewSpec:
        return ViewSpec(self.config.n_nodes, self.k)

    def to_dict(self) -> dict[str, Any]:
        c = self.config
        out: dict[str, Any] = {
            "positions": list(c.positions), "powers": list(c.powers), "noises": list(c.noises),
            "kappa": c.kappa, "eta": c.eta, "k": self.k,
        }
        if self.split is not None:
            out["split"] = {"matrix": self.split.to_list()}
        if self.sweep is not None:
            out["sweep"] = {"parameter": self.sweep.parameter, "values": list(self.sweep.values)}
        o = self.optimizer
        out["optimizer"] = {"resolution": o.resolution, "budget": o.budget,
                            "permute": o.permute, "step0": o.step0, "step_floor": o.step_floor}
        return out


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - allowed)
    if extra:
        raise ConfigurationError(f"unknown field(s) in {where}: {', '.join(extra)}")


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {value!r}")
    return float(value)


def _numbers(value, name):
    if not isinstance(value, list):
        raise ConfigurationError(f"{name} must be a list of numbers")
    return [_number(v, f"{name}[{n}]") for n, v in enumerate(value)]


def _parse_split(raw, view: ViewSpec) -> PowerSplit:
    if not isinstance(raw, dict) or len(raw) != 1 or next(iter(raw)) not in ("matrix", "named"):
        raise ConfigurationError('split must be {"matrix": [...]} or {"named": {...}}')
    if "matrix" in raw:
        rows = raw["matrix"]
        if not isinstance(rows, list):
            raise ConfigurationError("split.matrix must be a list of rows")
        split = PowerSplit([_numbers(r, "split.matrix row") for r in rows])
    else:
        named = raw["named"]
        if not isinstance(named, dict):
            raise ConfigurationError("split.named must be an object")
        values = {key: _number(v, f"split.named.{key}") for key, v in named.items()}
        if view.T != 5 or view.k not in (2, 4):
            raise ConfigurationError("named splits need T=5 with k=2 (two-hop) or k=4 (omniscient)")
        if view.k == 2:
            _unknown(values, _TWOHOP_KEYS, "split.named (k=2)")
            split = from_named_twohop(**values)
        else:
            _unknown(values, _OMNISCIENT_KEYS, "split.named (k=4)")
            split = from_named_omniscient(**values)
    require_valid(split, view)
    return split


def _parse_optimizer(raw) -> OptimizerOptions:
    if not isinstance(raw, dict):
        raise ConfigurationError("optimizer must be an object")
    _unknown(raw, _OPTIMIZER_KEYS, "optimizer")
    kwargs: dict[str, Any] = {}
    for key in ("resolution", "step0", "step_floor"):
        if key in raw:
            kwargs[key] = _number(raw[key], f"optimizer.{key}")
    if "budget" in raw:
        if isinstance(raw["budget"], bool) or not isinstance(raw["budget"], int):
            raise ConfigurationError("optimizer.budget must be an integer")
        kwargs["budget"] = raw["budget"]
    if "permute" in raw:
        if not isinstance(raw["permute"], bool):
            raise ConfigurationError("optimizer.permute must be true or false")
        kwargs["permute"] = raw["permute"]
    return OptimizerOptions(**kwargs)


def _parse_sweep(raw) -> Sweep:
    if not isinstance(raw, dict):
        raise ConfigurationError("sweep must be an object")
    _unknown(raw, {"parameter", "values"}, "sweep")
    if raw.get("parameter") not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"sweep.parameter must be one of {SWEEP_PARAMETERS}")
    values = _numbers(raw.get("values"), "sweep.values")
    if not values:
        raise ConfigurationError("sweep.values is empty")
    if any(v <= 0 for v in values):
        raise ConfigurationError("sweep.values must be positive")
    return Sweep(raw["parameter"], tuple(values))


def parse_scenario(raw: Any) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigurationError("scenario must be a JSON object")
    _unknown(raw, _TOP_KEYS, "scenario")
    for key in ("positions", "powers", "noises"):
        if key not in raw:
            raise ConfigurationError(f"scenario is missing '{key}'")
    config = NetworkConfig(
        positions=_numbers(raw["positions"], "positions"),
        powers=_numbers(raw["powers"], "powers"),
        noises=_numbers(raw["noises"], "noises"),
        kappa=_number(raw.get("kappa", 1.0), "kappa"),
        eta=_number(raw.get("eta", 2.0), "eta"),
    )
    k = raw.get("k", config.n_nodes - 1)
    if isinstance(k, bool) or not isinstance(k, int):
        raise ConfigurationError(f"k must be an integer, got {k!r}")
    if not 1 <= k <= config.n_nodes - 1:
        raise ConfigurationError(f"k={k} outside 1..{config.n_nodes - 1}")
    view = ViewSpec(config.n_nodes, k)
    return Scenario(
        config=config,
        k=k,
        split=_parse_split(raw["split"], view) if "split" in raw else None,
        sweep=_parse_sweep(raw["sweep"]) if "sweep" in raw else None,
        optimizer=_parse_optimizer(raw["optimizer"]) if "optimizer" in raw else OptimizerOptions(),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(raw)


# equal spacing is stated; for node2_close only d_23 = 1.5 is, the 0.5 m
# first hop and unit spacing after node 3 are assumptions
PRESET_POSITIONS = {
    "equal_spacing_5": (0.0, 1.0, 2.0, 3.0, 4.0),
    "node2_close_5": (0.0, 0.5, 2.0, 3.0, 4.0),
}
DEFAULT_SWEEP = Sweep("power_all", (0.01, 0.1, 1.0, 10.0, 100.0))


def preset(name: str, power: float = 1.0, noise: float = 1.0, k: int | None = None) -> Scenario:
    try:
        positions = PRESET_POSITIONS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_POSITIONS)}") from None
    T = len(positions)
    config = NetworkConfig(positions, [power] * (T - 1), [noise] * (T - 1), kappa=1.0, eta=2.0)
    return Scenario(config=config, k=T - 1 if k is None else k, sweep=DEFAULT_SWEEP,
                    optimizer=OptimizerOptions(budget=DEFAULT_BUDGET))


def with_overrides(scenario: Scenario, *, k=None, resolution=None, budget=None,
                   permute=None) -> Scenario:
    opts = scenario.optimizer
    opts = replace(
        opts,
        resolution=opts.resolution if resolution is None else resolution,
        budget=opts.budget if budget is None else budget,
        permute=opts.permute if permute is None else permute,
    )
    if k is not None:
        view = ViewSpec(scenario.config.n_nodes, k)
        split = scenario.split
        if split is not None:
            require_valid(split, view)
        scenario = replace(scenario, k=k)
    return replace(scenario, optimizer=opts)
