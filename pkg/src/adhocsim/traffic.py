"""Constant-rate reliable flows and the lifetime metrics computed from a run."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .packets import ACK_BYTES, DATA_BYTES
from .radio import Position, RadioParams, in_range

SENDING, DISCOVERING, STALLED, DEAD = "sending", "discovering", "stalled", "dead"


@dataclass
class Flow:
    source: int
    destination: int
    send_interval: float = 0.05
    start: float = 0.0
    data_bytes: int = DATA_BYTES
    ack_bytes: int = ACK_BYTES
    flow_id: int = 0
    next_seq: int = 0
    state: str = SENDING
    injected: int = 0
    delivered: set = field(default_factory=set)
    acked: set = field(default_factory=set)
    sent_seqs: dict = field(default_factory=dict)


@dataclass
class MetricsLog:
    snapshots: list[tuple[float, int, float]] = field(default_factory=list)
    deaths: list[tuple[int, float]] = field(default_factory=list)
    lifetime_events: list[tuple[float, str, str]] = field(default_factory=list)
    packet_counters: dict[str, dict[str, int]] = field(default_factory=dict)

    def death_times(self) -> dict[int, float]:
        return dict(self.deaths)

    def energy_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "node", "residual_joules"])
        for t, n, e in self.snapshots:
            w.writerow([f"{t:.6f}", n, repr(e)])
        return buf.getvalue()

    def deaths_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "death_time"])
        for n, t in sorted(self.deaths, key=lambda d: (d[1], d[0])):
            w.writerow([n, repr(t)])
        return buf.getvalue()


@dataclass(frozen=True)
class NetworkLifetime:
    value: float
    cause: str   # "partition" or "horizon"


@dataclass(frozen=True)
class NodeLifetime:
    node: int
    death_time: Optional[float]
    final_residual: float


def record_snapshot(net, now: float, log: MetricsLog) -> None:
    """Settle idle drain on every node to ``now`` and log the residuals."""
    for n in net.nodes:
        acct = net.account(n)
        log.snapshots.append((now, n, acct.residual))


class TrafficManager:
    """Drives flows over a :class:`~adhocsim.network.Network` and fills a MetricsLog."""

    def __init__(self, net, flows: Iterable[Flow], snapshot_interval: float = 0.5) -> None:
        self.net = net
        self.flows = list(flows)
        self.log = MetricsLog()
        self.snapshot_interval = snapshot_interval
        self.low_energy_nodes: list[tuple[int, float]] = []
        self.rerrs_at_source: list[tuple[float, int, object]] = []
        net.app = self

    def start(self) -> None:
        self.net.queue.schedule(self.net.now, "EnergySnapshot", self._snapshot_tick)
        for flow in self.flows:
            self.net.queue.schedule(flow.start, "TrafficTick", lambda f=flow: self.inject_data(f))

    def _snapshot_tick(self) -> None:
        record_snapshot(self.net, self.net.now, self.log)
        self.net.queue.schedule_in(self.snapshot_interval, "EnergySnapshot", self._snapshot_tick)

    def _flow_for(self, source: int, destination: int) -> Optional[Flow]:
        for flow in self.flows:
            if flow.source == source and flow.destination == destination:
                return flow
        return None

    def inject_data(self, flow: Flow) -> Optional[str]:
        if flow.state in (STALLED, DEAD):
            return None
        if not self.net.is_alive(flow.source):
            flow.state = DEAD
            self.log.lifetime_events.append((self.net.now, "flow-dead", f"{flow.source}->{flow.destination}"))
            return None
        seq = flow.next_seq
        flow.next_seq += 1
        flow.injected += 1
        flow.sent_seqs[seq] = flow.data_bytes
        outcome = self.net.agent(flow.source).send_data(flow.destination, seq, flow.flow_id,
                                                        flow.data_bytes)
        if flow.state not in (STALLED, DEAD):
            flow.state = SENDING if outcome == "sent" else DISCOVERING
        self.net.queue.schedule_in(flow.send_interval, "TrafficTick", lambda: self.inject_data(flow))
        return outcome

    # -- Application hooks ------------------------------------------------
    def on_data_delivered(self, node: int, pkt) -> None:
        flow = self._flow_for(pkt.route[0], node)
        if flow is not None:
            flow.delivered.add(pkt.flow_seq)
            self.net.agent(node).send_ack(pkt, flow.ack_bytes)
        else:
            self.net.agent(node).send_ack(pkt)

    def on_ack(self, node: int, pkt) -> None:
        flow = self._flow_for(node, pkt.route[0])
        if flow is not None:
            flow.acked.add(pkt.flow_seq)

    def on_route_found(self, node: int, destination: int) -> None:
        flow = self._flow_for(node, destination)
        if flow is not None and flow.state == DISCOVERING:
            flow.state = SENDING

    def on_unreachable(self, node: int, destination: int) -> None:
        flow = self._flow_for(node, destination)
        if flow is not None:
            flow.state = STALLED
        self.log.lifetime_events.append((self.net.now, "unreachable", f"{node}->{destination}"))

    def on_rerr_at_source(self, node: int, rerr) -> None:
        self.rerrs_at_source.append((self.net.now, node, rerr))

    def on_low_energy(self, node: int) -> None:
        self.low_energy_nodes.append((node, self.net.now))
        self.log.lifetime_events.append((self.net.now, "low-energy", str(node)))

    def on_death(self, node: int, when: float) -> None:
        self.log.deaths.append((node, when))
        self.log.lifetime_events.append((when, "death", str(node)))
        record_snapshot(self.net, self.net.now, self.log)

    def finish(self) -> MetricsLog:
        record_snapshot(self.net, self.net.now, self.log)
        self.log.packet_counters = {k: dict(v) for k, v in sorted(self.net.counters.items())}
        return self.log


def _connected(alive: set[int], adjacency: Mapping[int, Iterable[int]], source: int, destination: int) -> bool:
    if source not in alive or destination not in alive:
        return False
    seen = {source}
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        if u == destination:
            return True
        for v in adjacency[u]:
            if v in alive and v not in seen:
                seen.add(v)
                frontier.append(v)
    return False


def compute_network_lifetime(deaths: Iterable[tuple[int, float]], positions: Mapping[int, Position],
                             params: RadioParams, source: int, destination: int,
                             horizon: float) -> NetworkLifetime:
    """First instant the source can no longer reach the destination over alive nodes.

    Deaths are replayed in time order against the static disc graph; deaths
    sharing a timestamp are applied together before the path check.
    """
    adjacency = {u: [v for v in positions if v != u and in_range(positions[u], positions[v], params)]
                 for u in positions}
    alive = set(positions)
    if not _connected(alive, adjacency, source, destination):
        return NetworkLifetime(0.0, "partition")
    by_time: dict[float, list[int]] = {}
    for node, t in deaths:
        by_time.setdefault(t, []).append(node)
    for t in sorted(by_time):
        if t > horizon:
            break
        alive.difference_update(by_time[t])
        if not _connected(alive, adjacency, source, destination):
            return NetworkLifetime(t, "partition")
    return NetworkLifetime(horizon, "horizon")


def compute_node_lifetimes(log: MetricsLog) -> dict[int, NodeLifetime]:
    final: dict[int, float] = {}
    for _, n, e in log.snapshots:
        final[n] = e
    deaths = log.death_times()
    return {n: NodeLifetime(n, deaths.get(n), final[n]) for n in sorted(final)}
