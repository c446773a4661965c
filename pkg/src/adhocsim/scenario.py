"""Scenario definition and its JSON file format.

A scenario file is a JSON object. Only ``nodes`` and ``flows`` are required;
every other block falls back to the reference parameters::

    {
      "name": "paper-default",
      "area": [300, 200],
      "nodes": [{"id": 0, "x": 0, "y": 0, "energy": 20.0}, ...],
      "flows": [{"source": 0, "destination": 11, "send_interval": 0.05, "start": 0.0}],
      "radio": {"tx_power": 1.43, "rx_power": 0.925, "sleep_power": 0.045,
                "range": 250.0, "bandwidth": 2000000.0},
      "protocol": "essdsr",
      "essdsr": {"threshold_fraction": 0.2, "jitter_scale": 100.0,
                 "max_delay": 0.01, "min_energy": 1.0},
      "dsr": {"max_rreq_jitter": 0.01, "retransmit_limit": 2, "retransmit_timeout": 0.05,
              "discovery_timeout": 0.5, "discovery_attempts": 5},
      "toggles": {"intermediate_cache_reply": false, "rrep_energy_jitter": true,
                  "promiscuous_rx": false},
      "horizon": 60.0,
      "seed": 1,
      "snapshot_interval": 0.5
    }
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

from .essdsr import EnergyJitterParams
from .radio import RadioParams

PROTOCOLS = ("dsr", "essdsr")


class ScenarioError(ValueError):
    """Invalid scenario content; ``key`` names the offending field."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class NodeSpec:
    id: int
    x: float
    y: float
    energy: float


@dataclass(frozen=True)
class FlowSpec:
    source: int
    destination: int
    send_interval: float = 0.05
    start: float = 0.0
    data_bytes: int = 1080
    ack_bytes: int = 40


@dataclass(frozen=True)
class DsrParams:
    max_rreq_jitter: float = 0.01
    retransmit_limit: int = 2
    retransmit_timeout: float = 0.05
    discovery_timeout: float = 0.5
    discovery_attempts: int = 5


@dataclass(frozen=True)
class Toggles:
    intermediate_cache_reply: bool = False
    rrep_energy_jitter: bool = True
    promiscuous_rx: bool = False


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[NodeSpec, ...]
    flows: tuple[FlowSpec, ...]
    name: str = "custom"
    area: tuple[float, float] = (300.0, 200.0)
    radio: RadioParams = RadioParams()
    protocol: str = "essdsr"
    essdsr_threshold_fraction: float = 0.2
    essdsr_jitter: EnergyJitterParams = EnergyJitterParams()
    dsr: DsrParams = DsrParams()
    toggles: Toggles = Toggles()
    horizon: float = 60.0
    seed: int = 1
    snapshot_interval: float = 0.5

    def with_(self, **changes) -> "Scenario":
        return validate(dataclasses.replace(self, **changes))

    @property
    def positions(self) -> dict[int, tuple[float, float]]:
        return {n.id: (n.x, n.y) for n in self.nodes}

    @property
    def energies(self) -> dict[int, float]:
        return {n.id: n.energy for n in self.nodes}

    def digest(self) -> str:
        return hashlib.sha256(dumps(self).encode()).hexdigest()[:16]


def paper_default(protocol: str = "essdsr", seed: int = 1) -> Scenario:
    """Twelve static nodes on a 4 x 3 grid (100 m pitch) covering 300 x 200 m.

    Node ids run row by row from the corner at the origin, so the source
    (node 0) and destination (node 11) sit in opposite corners, 360 m apart
    and out of each other's range. Even ids start with 20 J, odd ids with 10 J.
    """
    nodes = tuple(NodeSpec(i, 100.0 * (i % 4), 100.0 * (i // 4), 20.0 if i % 2 == 0 else 10.0)
                  for i in range(12))
    return Scenario(nodes=nodes, flows=(FlowSpec(0, 11),), name="paper-default",
                    protocol=protocol, seed=seed)


# -- serialisation ------------------------------------------------------------

def to_dict(s: Scenario) -> dict[str, Any]:
    return {
        "name": s.name,
        "area": list(s.area),
        "nodes": [dataclasses.asdict(n) for n in s.nodes],
        "flows": [dataclasses.asdict(f) for f in s.flows],
        "radio": dataclasses.asdict(s.radio),
        "protocol": s.protocol,
        "essdsr": {
            "threshold_fraction": s.essdsr_threshold_fraction,
            "jitter_scale": s.essdsr_jitter.scale,
            "max_delay": s.essdsr_jitter.max_delay,
            "min_energy": s.essdsr_jitter.min_energy,
        },
        "dsr": dataclasses.asdict(s.dsr),
        "toggles": dataclasses.asdict(s.toggles),
        "horizon": s.horizon,
        "seed": s.seed,
        "snapshot_interval": s.snapshot_interval,
    }


def dumps(s: Scenario) -> str:
    return json.dumps(to_dict(s), indent=2) + "\n"


def _number(value, key, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(key, f"expected a number, got {value!r}")
    if integer and not float(value).is_integer():
        raise ScenarioError(key, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(key, f"must be finite, got {value!r}")
    if positive and not value > 0:
        raise ScenarioError(key, f"must be positive, got {value!r}")
    if nonneg and value < 0:
        raise ScenarioError(key, f"must be non-negative, got {value!r}")
    return int(value) if integer else float(value)


def _block(data, key, cls, numeric_kinds):
    raw = data.get(key, {})
    if not isinstance(raw, dict):
        raise ScenarioError(key, "expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"{key}.{sorted(unknown)[0]}", "unknown field")
    values = {}
    for name, kind in numeric_kinds.items():
        if name in raw:
            values[name] = kind(raw[name], f"{key}.{name}")
    return cls(**values)


def from_dict(data: dict[str, Any]) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    pos = lambda v, k: _number(v, k, positive=True)
    posint = lambda v, k: _number(v, k, positive=True, integer=True)
    nonnegint = lambda v, k: _number(v, k, nonneg=True, integer=True)
    flag = _flag

    if "nodes" not in data:
        raise ScenarioError("nodes", "missing")
    if not isinstance(data["nodes"], list) or not data["nodes"]:
        raise ScenarioError("nodes", "expected a non-empty list")
    nodes = []
    for i, raw in enumerate(data["nodes"]):
        key = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise ScenarioError(key, "expected an object")
        for f in ("id", "x", "y", "energy"):
            if f not in raw:
                raise ScenarioError(f"{key}.{f}", "missing")
        nodes.append(NodeSpec(
            id=_number(raw["id"], f"{key}.id", nonneg=True, integer=True),
            x=_number(raw["x"], f"{key}.x"),
            y=_number(raw["y"], f"{key}.y"),
            energy=_number(raw["energy"], f"{key}.energy", positive=True),
        ))

    if "flows" not in data:
        raise ScenarioError("flows", "missing")
    if not isinstance(data["flows"], list):
        raise ScenarioError("flows", "expected a list")
    flows = []
    for i, raw in enumerate(data["flows"]):
        key = f"flows[{i}]"
        if not isinstance(raw, dict):
            raise ScenarioError(key, "expected an object")
        for f in ("source", "destination"):
            if f not in raw:
                raise ScenarioError(f"{key}.{f}", "missing")
        flows.append(FlowSpec(
            source=_number(raw["source"], f"{key}.source", nonneg=True, integer=True),
            destination=_number(raw["destination"], f"{key}.destination", nonneg=True, integer=True),
            send_interval=_number(raw.get("send_interval", 0.05), f"{key}.send_interval", positive=True),
            start=_number(raw.get("start", 0.0), f"{key}.start", nonneg=True),
            data_bytes=posint(raw.get("data_bytes", 1080), f"{key}.data_bytes"),
            ack_bytes=posint(raw.get("ack_bytes", 40), f"{key}.ack_bytes"),
        ))

    try:
        radio = _block(data, "radio", RadioParams,
                       {k: pos for k in ("tx_power", "rx_power", "sleep_power", "range", "bandwidth")})
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("radio", str(exc)) from None

    ess = data.get("essdsr", {})
    if not isinstance(ess, dict):
        raise ScenarioError("essdsr", "expected an object")
    unknown = set(ess) - {"threshold_fraction", "jitter_scale", "max_delay", "min_energy"}
    if unknown:
        raise ScenarioError(f"essdsr.{sorted(unknown)[0]}", "unknown field")
    fraction = _number(ess.get("threshold_fraction", 0.2), "essdsr.threshold_fraction", positive=True)
    if not fraction < 1:
        raise ScenarioError("essdsr.threshold_fraction", f"must lie in (0, 1), got {fraction}")
    try:
        jitter = EnergyJitterParams(
            scale=_number(ess.get("jitter_scale", 100.0), "essdsr.jitter_scale", positive=True),
            max_delay=_number(ess.get("max_delay", 0.01), "essdsr.max_delay", positive=True),
            min_energy=_number(ess.get("min_energy", 1.0), "essdsr.min_energy", positive=True),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("essdsr", str(exc)) from None

    dsr = _block(data, "dsr", DsrParams, {
        "max_rreq_jitter": pos, "retransmit_limit": nonnegint,
        "retransmit_timeout": pos, "discovery_timeout": pos, "discovery_attempts": posint,
    })
    toggles = _block(data, "toggles", Toggles, {
        "intermediate_cache_reply": flag, "rrep_energy_jitter": flag, "promiscuous_rx": flag,
    })

    protocol = data.get("protocol", "essdsr")
    if protocol not in PROTOCOLS:
        raise ScenarioError("protocol", f"must be one of {PROTOCOLS}, got {protocol!r}")
    area = data.get("area", [300.0, 200.0])
    if not isinstance(area, list) or len(area) != 2:
        raise ScenarioError("area", "expected [width, height]")
    name = data.get("name", "custom")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")

    scenario = Scenario(
        nodes=tuple(nodes), flows=tuple(flows), name=name,
        area=(_number(area[0], "area[0]", positive=True), _number(area[1], "area[1]", positive=True)),
        radio=radio, protocol=protocol,
        essdsr_threshold_fraction=fraction, essdsr_jitter=jitter, dsr=dsr, toggles=toggles,
        horizon=_number(data.get("horizon", 60.0), "horizon", positive=True),
        seed=_number(data.get("seed", 1), "seed", integer=True),
        snapshot_interval=_number(data.get("snapshot_interval", 0.5), "snapshot_interval", positive=True),
    )
    return validate(scenario)


def _flag(value, key):
    if not isinstance(value, bool):
        raise ScenarioError(key, f"expected true or false, got {value!r}")
    return value


def validate(s: Scenario) -> Scenario:
    seen = set()
    for i, n in enumerate(s.nodes):
        if n.id in seen:
            raise ScenarioError(f"nodes[{i}].id", f"duplicate node id {n.id}")
        seen.add(n.id)
        if not (0 <= n.x <= s.area[0] and 0 <= n.y <= s.area[1]):
            raise ScenarioError(f"nodes[{i}]", f"node {n.id} at ({n.x}, {n.y}) lies outside the area {s.area}")
        if not n.energy > 0:
            raise ScenarioError(f"nodes[{i}].energy", f"must be positive, got {n.energy}")
    for i, f in enumerate(s.flows):
        for end in ("source", "destination"):
            if getattr(f, end) not in seen:
                raise ScenarioError(f"flows[{i}].{end}", f"unknown node id {getattr(f, end)}")
        if f.source == f.destination:
            raise ScenarioError(f"flows[{i}]", "source and destination must differ")
    if s.protocol not in PROTOCOLS:
        raise ScenarioError("protocol", f"must be one of {PROTOCOLS}, got {s.protocol!r}")
    if not s.horizon > 0:
        raise ScenarioError("horizon", f"must be positive, got {s.horizon}")
    return s


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return from_dict(data)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load a scenario file; the name ``paper-default`` selects the built-in one."""
    if str(path) == "paper-default":
        return paper_default()
    return loads(Path(path).read_text())
