"""Flat ``section.key = value`` scenario files.

Example::

    # 16-node path under a drift ramp
    topology.kind = path
    topology.n = 16
    adversary.drift = ramp_across_nodes
    sim.duration = 10000

Omitted keys take the defaults in :data:`DEFAULTS`. ``params.mu`` defaults to
``max(100 * rho, 1e-3)``; ``topology.radius`` only matters for
``random_geometric`` and defaults to 0.3 there.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Any, Callable

from .clocks import DriftKind
from .simengine import DelayKind, Scenario
from .topology import SystemParams, TopologyKind, TopologySpec

DEFAULT_RG_RADIUS = 0.3


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _enum(cls) -> Callable[[str], Any]:
    def parse(text: str):
        try:
            return cls(text.lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"{text!r} is not one of {choices}") from None

    return parse


PARSERS: dict[str, Callable[[str], Any]] = {
    "topology.kind": _enum(TopologyKind),
    "topology.n": int,
    "topology.radius": float,
    "params.rho": float,
    "params.mu": float,
    "params.ru": float,
    "params.beta_min": float,
    "params.beta_max": float,
    "params.delta_t": float,
    "params.delta_b": float,
    "params.lambda": float,
    "params.rbs_enabled": _bool,
    "params.rbs_adjacent": _bool,
    "params.loss_prob": float,
    "adversary.drift": _enum(DriftKind),
    "adversary.delay": _enum(DelayKind),
    "sim.duration": float,
    "sim.sample_period": float,
    "sim.seed": int,
    "sim.tick": float,
}

DEFAULTS: dict[str, Any] = {
    "topology.kind": TopologyKind.PATH,
    "topology.n": 16,
    "topology.radius": None,
    "params.rho": 1e-4,
    "params.mu": None,
    "params.ru": 0.01,
    "params.beta_min": 0.0,
    "params.beta_max": 1.0,
    "params.delta_t": 1.0,
    "params.delta_b": 1.0,
    "params.lambda": 4.0,
    "params.rbs_enabled": True,
    "params.rbs_adjacent": False,
    "params.loss_prob": 0.0,
    "adversary.drift": DriftKind.CONSTANT,
    "adversary.delay": DelayKind.SEEDED_UNIFORM,
    "sim.duration": 1000.0,
    "sim.sample_period": 1.0,
    "sim.seed": 0,
    "sim.tick": 0.01,
}


def parse_assignments(text: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = parse_value(key, value, lineno)
    return values


def parse_value(key: str, value: str, lineno: int | None = None) -> Any:
    where = f"line {lineno}: " if lineno is not None else ""
    if key not in PARSERS:
        raise ConfigError(f"{where}unknown key {key!r}")
    try:
        return PARSERS[key](value)
    except ValueError as exc:
        raise ConfigError(f"{where}bad value for {key}: {exc}") from None


def scenario_from_values(values: dict[str, Any]) -> Scenario:
    v = {**DEFAULTS, **values}
    kind = v["topology.kind"]
    radius = v["topology.radius"]
    if kind is TopologyKind.RANDOM_GEOMETRIC and radius is None:
        radius = DEFAULT_RG_RADIUS
    rho = v["params.rho"]
    if not 0 <= rho < 1:
        raise ConfigError(f"rho out of range: {rho}")
    if v["topology.n"] < 1:
        raise ConfigError("topology.n must be at least 1")
    try:
        topo = TopologySpec(
            kind=kind,
            n=v["topology.n"],
            radius=radius,
            beta_min=v["params.beta_min"],
            beta_max=v["params.beta_max"],
        )
        if not 0 <= topo.beta_min <= topo.beta_max:
            raise ValueError("need 0 <= beta_min <= beta_max")
        params = SystemParams(
            rho=rho,
            mu=v["params.mu"],
            ru=v["params.ru"],
            delta_t=v["params.delta_t"],
            delta_b=v["params.delta_b"],
            lam=v["params.lambda"],
            rbs_enabled=v["params.rbs_enabled"],
            rbs_adjacent=v["params.rbs_adjacent"],
        )
        return Scenario(
            topology=topo,
            params=params,
            drift=v["adversary.drift"],
            delay=v["adversary.delay"],
            duration=v["sim.duration"],
            sample_period=v["sim.sample_period"],
            seed=v["sim.seed"],
            tick=v["sim.tick"],
            loss_prob=v["params.loss_prob"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_scenario_config(text: str) -> Scenario:
    return scenario_from_values(parse_assignments(text))


def without_rbs(sc: Scenario) -> Scenario:
    return replace(sc, params=replace(sc.params, rbs_enabled=False))
