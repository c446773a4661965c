"""Energy saving and survival extension of DSR.

Two mechanisms sit on top of :mod:`adhocsim.dsr`:

* forwarding delay for RREQ/RREP that shrinks as residual energy grows,
  ``min(max_delay, 1 / (scale * residual))``, so route requests race
  fastest through well-charged relays;
* a one-shot ``LOW_ENERGY`` broadcast from a node whose battery falls to a
  fraction of its initial charge while it still carries traffic. Its
  neighbours stop routing through it and tell affected sources, which
  rediscover a route that avoids the node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .dsr import DsrAgent, DsrConfig
from .packets import LowEnergy, Packet, Rerr, Rrep, Rreq
from .radio import EnergyAccount

if TYPE_CHECKING:
    from .network import Network


@dataclass(frozen=True)
class EnergyJitterParams:
    scale: float = 100.0
    max_delay: float = 0.01
    min_energy: float = 1.0

    def __post_init__(self):
        if min(self.scale, self.max_delay, self.min_energy) <= 0:
            raise ValueError("jitter parameters must be positive")
        if abs(1.0 / (self.scale * self.min_energy) - self.max_delay) > 1e-12:
            raise ValueError(
                f"inconsistent jitter constants: 1/(scale*min_energy) = "
                f"{1.0 / (self.scale * self.min_energy)} != max_delay {self.max_delay}")


def energy_jitter(residual: float, params: EnergyJitterParams = EnergyJitterParams()) -> float:
    if not residual > 0:
        raise ValueError(f"energy jitter needs positive residual energy, got {residual!r}")
    if residual <= params.min_energy:
        return params.max_delay
    return min(params.max_delay, 1.0 / (params.scale * residual))


def check_low_energy(acct: EnergyAccount, fraction: float) -> bool:
    if not 0 < fraction < 1:
        raise ValueError(f"threshold fraction must lie in (0, 1), got {fraction}")
    return acct.residual <= fraction * acct.initial


@dataclass
class EssdsrConfig(DsrConfig):
    threshold_fraction: float = 0.2
    jitter: EnergyJitterParams = field(default_factory=EnergyJitterParams)
    rrep_energy_jitter: bool = True
    frozen_jitter: Optional[dict] = None   # test hook: node -> residual used for delays


class EssdsrAgent(DsrAgent):
    protocol = "essdsr"

    def __init__(self, node_id: int, net: "Network", config: Optional[EssdsrConfig] = None) -> None:
        super().__init__(node_id, net, config or EssdsrConfig())
        self.low_energy = False
        self.low_energy_sent = 0

    def essdsr_control_delay(self, pkt: Packet) -> float:
        if isinstance(pkt, Rreq) or (isinstance(pkt, Rrep) and self.config.rrep_energy_jitter):
            if self.config.zero_jitter:
                return 0.0
            frozen = self.config.frozen_jitter
            residual = frozen[self.id] if frozen is not None else self.net.residual(self.id)
            return energy_jitter(residual, self.config.jitter)
        return 0.0

    control_delay = essdsr_control_delay

    def may_forward_rreq(self, rreq: Rreq) -> bool:
        return rreq.excluded != self.id

    def before_data_tx(self) -> None:
        # the node is about to send or relay traffic: the only moment it may raise the alarm
        if self.low_energy or not self.net.is_alive(self.id):
            return
        if check_low_energy(self.net.account(self.id), self.config.threshold_fraction):
            self.emit_low_energy()

    def emit_low_energy(self) -> Optional[LowEnergy]:
        if self.low_energy_sent:
            return None
        if not self.net.is_alive(self.id):
            raise RuntimeError(f"dead node {self.id} cannot announce low energy")
        self.low_energy = True
        self.low_energy_sent += 1
        pkt = LowEnergy(origin=self.id)
        self.net.on_low_energy(self.id)
        self.net.broadcast(self.id, pkt)
        return pkt

    def handle_low_energy(self, pkt: LowEnergy) -> list[Rerr]:
        origin = pkt.origin
        self.cache.blocked.add(origin)
        self.cache.remove_intermediate(origin)
        sent = []
        for (src, dst), route in sorted(self.flow_routes.items()):
            if origin not in route[1:-1] or self.id not in route:
                continue
            idx = route.index(self.id)
            if idx == 0:
                # this node is the flow source: act as if the error had arrived
                rerr = Rerr(broken_from=self.id, broken_to=origin, original_sender=src,
                            destination=dst, path=(self.id,), position=0, low_energy=True)
                self.net.trace_local(self.id, rerr)
                self.on_rerr_at_source(rerr)
            else:
                path = tuple(reversed(route[: idx + 1]))
                rerr = Rerr(broken_from=self.id, broken_to=origin, original_sender=src,
                            destination=dst, path=path, position=1, low_energy=True)
                self.net.unicast(self.id, path[1], rerr)
            sent.append(rerr)
        return sent


def rediscover_excluding(agent: EssdsrAgent, destination: int, excluded: int) -> Rreq:
    """Start a discovery whose RREQ is refused by ``excluded``."""
    agent.excluded[destination] = excluded
    agent.cache.blocked.add(excluded)
    agent.cache.remove_intermediate(excluded)
    pending = agent.discoveries.pop(destination, None)
    if pending is not None and pending.timer is not None:
        pending.timer.cancel()
    return agent.initiate_route_discovery(destination)
