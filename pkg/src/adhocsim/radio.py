"""Disc connectivity model and per-node battery accounting.

Defaults are the reference radio profile: 1.43 W transmit, 0.925 W receive,
0.045 W idle, 250 m range, 2 Mb/s link rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional


class Position(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class RadioParams:
    tx_power: float = 1.43
    rx_power: float = 0.925
    sleep_power: float = 0.045
    range: float = 250.0
    bandwidth: float = 2e6

    def __post_init__(self):
        for name in ("tx_power", "rx_power", "sleep_power", "range", "bandwidth"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"radio.{name} must be a positive finite number, got {value!r}")


@dataclass
class EnergyAccount:
    """Battery state of one node.

    The ``spent_*`` totals exist so that the books can be audited:
    ``initial - residual == spent_tx + spent_rx + spent_idle``.
    """

    initial: float
    residual: float = field(default=None)  # type: ignore[assignment]
    last_update: float = 0.0
    dead_since: Optional[float] = None
    spent_tx: float = 0.0
    spent_rx: float = 0.0
    spent_idle: float = 0.0

    def __post_init__(self):
        if not self.initial > 0:
            raise ValueError(f"initial energy must be positive, got {self.initial!r}")
        if self.residual is None:
            self.residual = float(self.initial)

    @property
    def alive(self) -> bool:
        return self.residual > 0

    @property
    def spent(self) -> float:
        return self.spent_tx + self.spent_rx + self.spent_idle


def distance(a: Position, b: Position) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def in_range(a: Position, b: Position, params: RadioParams) -> bool:
    # boundary inclusive
    return distance(a, b) <= params.range


def tx_duration(nbytes: int, params: RadioParams) -> float:
    if nbytes <= 0:
        raise ValueError(f"packet size must be positive, got {nbytes}")
    return nbytes * 8 / params.bandwidth


def _drain(acct: EnergyAccount, cost: float, now: float) -> float:
    used = min(acct.residual, cost)
    acct.residual -= used
    if acct.residual <= 0:
        acct.residual = 0.0
        if acct.dead_since is None:
            acct.dead_since = now
    return used


def charge_tx(acct: EnergyAccount, nbytes: int, params: RadioParams, now: float) -> float:
    """Charge one transmission; returns joules consumed.

    When the cost exhausts the battery the node dies at ``now`` and the
    caller must treat the transmission as failed (check ``acct.alive``).
    """
    if not acct.alive:
        raise ValueError("cannot charge a transmission to a dead node")
    used = _drain(acct, params.tx_power * tx_duration(nbytes, params), now)
    acct.spent_tx += used
    return used


def charge_rx(acct: EnergyAccount, nbytes: int, params: RadioParams, now: float) -> float:
    if not acct.alive:
        raise ValueError("cannot charge a reception to a dead node")
    used = _drain(acct, params.rx_power * tx_duration(nbytes, params), now)
    acct.spent_rx += used
    return used


def charge_idle(acct: EnergyAccount, start: float, end: float, params: RadioParams) -> float:
    """Charge idle drain over ``[start, end]``.

    A node that runs dry inside the interval gets the exact death instant
    ``start + residual / sleep_power``.
    """
    if end < start:
        raise ValueError(f"idle interval runs backwards: {start} -> {end}")
    acct.last_update = max(acct.last_update, end)
    if not acct.alive or end == start:
        return 0.0
    cost = params.sleep_power * (end - start)
    if cost >= acct.residual:
        death = start + acct.residual / params.sleep_power
        used = acct.residual
        acct.residual = 0.0
        acct.dead_since = death
    else:
        used = cost
        acct.residual -= cost
    acct.spent_idle += used
    return used


def settle(acct: EnergyAccount, now: float, params: RadioParams) -> float:
    """Bring idle drain up to ``now``."""
    if now <= acct.last_update:
        return 0.0
    return charge_idle(acct, acct.last_update, now, params)


def neighbors(node: int, positions: Mapping[int, Position], params: RadioParams,
              alive: Optional[Iterable[int]] = None) -> set[int]:
    """Nodes other than ``node`` within range; restricted to ``alive`` if given."""
    candidates = positions.keys() if alive is None else alive
    here = positions[node]
    return {n for n in candidates if n != node and in_range(here, positions[n], params)}
