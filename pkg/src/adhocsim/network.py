"""Shared medium: energy charging, disc connectivity and packet tracing.

There is no MAC. A transmission occupies the sender for the packet airtime
and reaches every alive in-range receiver when the airtime ends.
Broadcasts charge receive energy to the whole alive neighbourhood; unicasts
only to the addressed hop unless promiscuous reception is switched on.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Protocol

from . import radio
from .engine import EventQueue, RngStream
from .packets import Packet
from .radio import EnergyAccount, Position, RadioParams


class Application(Protocol):
    def on_data_delivered(self, node: int, pkt) -> None: ...
    def on_ack(self, node: int, pkt) -> None: ...
    def on_route_found(self, node: int, destination: int) -> None: ...
    def on_unreachable(self, node: int, destination: int) -> None: ...
    def on_rerr_at_source(self, node: int, rerr) -> None: ...
    def on_low_energy(self, node: int) -> None: ...
    def on_death(self, node: int, when: float) -> None: ...


class NullApplication:
    def __getattr__(self, name):
        if name.startswith("on_"):
            return lambda *args, **kwargs: None
        raise AttributeError(name)


@dataclass
class NodeState:
    id: int
    position: Position
    account: EnergyAccount
    agent: object = None
    death_reported: bool = False


class Network:
    def __init__(self, positions: Mapping[int, Position], energies: Mapping[int, float],
                 params: RadioParams = RadioParams(), seed: int = 0,
                 promiscuous_rx: bool = False, trace: bool = True) -> None:
        if set(positions) != set(energies):
            raise ValueError("positions and energies must cover the same node ids")
        self.params = params
        self.queue = EventQueue()
        self.rng = RngStream(seed)
        self.promiscuous_rx = promiscuous_rx
        self.nodes: dict[int, NodeState] = {
            n: NodeState(n, Position(*positions[n]), EnergyAccount(float(energies[n])))
            for n in sorted(positions)
        }
        self.positions = {n: s.position for n, s in self.nodes.items()}
        self._adjacency = {n: sorted(radio.neighbors(n, self.positions, params)) for n in self.nodes}
        self.app: Application = NullApplication()
        self.tracing = trace
        self.trace: list[str] = []
        self.counters: dict[str, dict[str, int]] = defaultdict(lambda: {"tx": 0, "rx": 0, "drop": 0})
        self.listeners: list[Callable[[float, int, str, Packet], None]] = []

    @property
    def now(self) -> float:
        return self.queue.now

    def attach(self, agent_factory: Callable[[int, "Network"], object]) -> None:
        for n, state in self.nodes.items():
            state.agent = agent_factory(n, self)

    def agent(self, node: int):
        return self.nodes[node].agent

    # -- energy ---------------------------------------------------------
    def account(self, node: int) -> EnergyAccount:
        state = self.nodes[node]
        radio.settle(state.account, self.now, self.params)
        self._check_death(state)
        return state.account

    def residual(self, node: int) -> float:
        return self.account(node).residual

    def is_alive(self, node: int) -> bool:
        return self.account(node).alive

    def settle_all(self) -> None:
        for n in self.nodes:
            self.account(n)

    def _check_death(self, state: NodeState) -> None:
        if state.account.dead_since is not None and not state.death_reported:
            state.death_reported = True
            self.app.on_death(state.id, state.account.dead_since)

    def _charge(self, node: int, nbytes: int, tx: bool) -> bool:
        """Charge a tx or rx; False if the node is (or just became) dead."""
        state = self.nodes[node]
        acct = self.account(node)
        if not acct.alive:
            return False
        if tx:
            radio.charge_tx(acct, nbytes, self.params, self.now)
        else:
            radio.charge_rx(acct, nbytes, self.params, self.now)
        self._check_death(state)
        return acct.alive

    # -- topology -------------------------------------------------------
    def static_neighbors(self, node: int) -> list[int]:
        return self._adjacency[node]

    def neighbors(self, node: int) -> list[int]:
        return [n for n in self._adjacency[node] if self.is_alive(n)]

    def linked(self, a: int, b: int) -> bool:
        return b in self._adjacency[a]

    # -- transmission ---------------------------------------------------
    def broadcast(self, sender: int, pkt: Packet) -> bool:
        if not self._charge(sender, pkt.size, tx=True):
            self.drop(sender, pkt, "sender-dead")
            return False
        self._log(sender, "s", pkt)
        arrival = self.now + radio.tx_duration(pkt.size, self.params)
        for n in self.neighbors(sender):
            self.queue.schedule(arrival, "PacketArrival",
                                lambda n=n: self._arrive(n, pkt, sender, deliver=True),
                                payload=(n, pkt))
        return True

    def schedule_broadcast(self, sender: int, pkt: Packet, delay: float) -> None:
        def fire():
            if self.is_alive(sender):
                self.broadcast(sender, pkt)
            else:
                self.drop(sender, pkt, "sender-dead")
        self.queue.schedule_in(delay, "JitterExpiry", fire, payload=(sender, pkt))

    def unicast(self, sender: int, receiver: int, pkt: Packet) -> bool:
        """Send one copy to ``receiver``.

        Returns whether the link delivered it: False when the sender died
        paying for it, or the receiver is dead or out of range.
        """
        if not self._charge(sender, pkt.size, tx=True):
            self.drop(sender, pkt, "sender-dead")
            return False
        self._log(sender, "s", pkt)
        ok = self.linked(sender, receiver) and self.is_alive(receiver)
        arrival = self.now + radio.tx_duration(pkt.size, self.params)
        if ok:
            self.queue.schedule(arrival, "PacketArrival",
                                lambda: self._arrive(receiver, pkt, sender, deliver=True),
                                payload=(receiver, pkt))
        if self.promiscuous_rx:
            for n in self.neighbors(sender):
                if n != receiver:
                    self.queue.schedule(arrival, "PacketArrival",
                                        lambda n=n: self._arrive(n, pkt, sender, deliver=False),
                                        payload=(n, pkt))
        if not ok:
            self.drop(sender, pkt, "no-link")
        return ok

    def _arrive(self, node: int, pkt: Packet, sender: int, deliver: bool) -> None:
        if not self._charge(node, pkt.size, tx=False):
            if deliver:
                self.drop(node, pkt, "receiver-dead")
            return
        if not deliver:
            return
        self._log(node, "r", pkt)
        self.nodes[node].agent.receive(pkt, sender)

    # -- bookkeeping ----------------------------------------------------
    def drop(self, node: int, pkt: Packet, reason: str) -> None:
        self.counters[pkt.kind]["drop"] += 1
        self._emit(node, "d", pkt, f" reason={reason}")

    def count(self, kind: str, what: str) -> None:
        self.counters[kind][what] += 1

    def trace_local(self, node: int, pkt: Packet) -> None:
        self._emit(node, "l", pkt, "")

    def _log(self, node: int, event: str, pkt: Packet) -> None:
        self.counters[pkt.kind]["tx" if event == "s" else "rx"] += 1
        self._emit(node, event, pkt, "")

    def _emit(self, node: int, event: str, pkt: Packet, extra: str) -> None:
        if self.tracing:
            self.trace.append(f"{self.now:.9f} {node} {event} {pkt.trace_fields()}{extra}")
        for listener in self.listeners:
            listener(self.now, node, event, pkt)

    # application hooks, forwarded so agents only ever see the network
    def on_data_delivered(self, node, pkt):
        self.app.on_data_delivered(node, pkt)

    def on_ack(self, node, pkt):
        self.app.on_ack(node, pkt)

    def on_route_found(self, node, destination):
        self.app.on_route_found(node, destination)

    def on_unreachable(self, node, destination):
        self.app.on_unreachable(node, destination)

    def on_rerr_at_source(self, node, rerr):
        self.app.on_rerr_at_source(node, rerr)

    def on_low_energy(self, node):
        self.app.on_low_energy(node)
