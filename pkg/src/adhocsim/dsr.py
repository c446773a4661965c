"""Baseline Dynamic Source Routing.

Each node runs a :class:`DsrAgent`. Agents never touch the event queue or
the energy books directly; everything goes through the owning
:class:`~adhocsim.network.Network`, which charges energy, applies
connectivity and writes the packet trace.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Optional

from .packets import ACK_BYTES, DATA_BYTES, Data, LowEnergy, Packet, Rerr, Rrep, Rreq, make_ack, validate_route

if TYPE_CHECKING:
    from .network import Network


@dataclass
class DsrConfig:
    max_rreq_jitter: float = 0.01
    zero_jitter: bool = False           # test hook: first RREQ arrival == fewest hops
    retransmit_limit: int = 2           # retries after the first attempt
    retransmit_timeout: float = 0.05
    discovery_timeout: float = 0.5
    discovery_attempts: int = 5
    intermediate_cache_reply: bool = False


class RouteCache:
    """Full source routes owned by one node, keyed by destination.

    Routes through nodes in ``blocked`` (reported low on energy) are never
    returned as intermediates, even if still stored.
    """

    def __init__(self, owner: int) -> None:
        self.owner = owner
        self.routes: dict[int, list[tuple[int, ...]]] = {}
        self.blocked: set[int] = set()

    def __len__(self) -> int:
        return sum(len(v) for v in self.routes.values())

    def __iter__(self):
        for routes in self.routes.values():
            yield from routes

    def add(self, route: Iterable[int]) -> bool:
        route = validate_route(route)
        if route[0] != self.owner:
            raise ValueError(f"route {route} does not start at cache owner {self.owner}")
        bucket = self.routes.setdefault(route[-1], [])
        if route in bucket:
            return False
        bucket.append(route)
        return True

    def usable(self, route: tuple[int, ...]) -> bool:
        return not self.blocked.intersection(route[1:-1])

    def lookup(self, destination: int) -> list[tuple[int, ...]]:
        return [r for r in self.routes.get(destination, ()) if self.usable(r)]

    def remove_link(self, a: int, b: int) -> int:
        """Drop every route using the link a-b (either direction; links are symmetric)."""
        def uses(route):
            return any({route[i], route[i + 1]} == {a, b} for i in range(len(route) - 1))
        return self._remove(uses)

    def remove_intermediate(self, node: int) -> int:
        """Drop routes that relay through ``node``; routes ending at it survive."""
        return self._remove(lambda route: node in route[1:-1])

    def _remove(self, predicate) -> int:
        removed = 0
        for dest in list(self.routes):
            keep = [r for r in self.routes[dest] if not predicate(r)]
            removed += len(self.routes[dest]) - len(keep)
            if keep:
                self.routes[dest] = keep
            else:
                del self.routes[dest]
        return removed


def select_route(cache: RouteCache, destination: int) -> Optional[tuple[int, ...]]:
    """Minimum hop count; ties go to the earliest inserted route."""
    best = None
    for route in cache.lookup(destination):
        if best is None or len(route) < len(best):
            best = route
    return best


class DedupTable:
    def __init__(self) -> None:
        self.seen: set[tuple[int, int]] = set()

    def check_and_add(self, source: int, request_id: int) -> bool:
        """True if the pair is new (and now recorded)."""
        key = (source, request_id)
        if key in self.seen:
            return False
        self.seen.add(key)
        return True

    def __contains__(self, key) -> bool:
        return key in self.seen


@dataclass
class Discovery:
    destination: int
    request_id: int
    attempts: int
    timer: object = None


@dataclass
class PendingData:
    destination: int
    flow_seq: int
    flow_id: int = 0
    size: int = DATA_BYTES


class DsrAgent:
    protocol = "dsr"

    def __init__(self, node_id: int, net: "Network", config: Optional[DsrConfig] = None) -> None:
        self.id = node_id
        self.net = net
        self.config = config or DsrConfig()
        self.cache = RouteCache(node_id)
        self.dedup = DedupTable()
        self.next_request_id = 0
        self.buffer: dict[int, deque[PendingData]] = {}
        self.discoveries: dict[int, Discovery] = {}
        self.excluded: dict[int, int] = {}
        # routes of DATA flows this node has sent, forwarded or received
        self.flow_routes: dict[tuple[int, int], tuple[int, ...]] = {}

    # -- hooks overridden by the energy-aware variant -------------------
    def control_delay(self, pkt: Packet) -> float:
        if isinstance(pkt, Rreq) and not self.config.zero_jitter:
            return self.net.rng.uniform_jitter(0.0, self.config.max_rreq_jitter)
        return 0.0

    def may_forward_rreq(self, rreq: Rreq) -> bool:
        return True

    def before_data_tx(self) -> None:
        pass

    def handle_low_energy(self, pkt: LowEnergy) -> None:
        pass

    # -- origination ----------------------------------------------------
    def send_data(self, destination: int, flow_seq: int, flow_id: int = 0,
                  size: int = DATA_BYTES) -> str:
        """Hand a DATA packet to routing. Returns 'sent' or 'queued'."""
        item = PendingData(destination, flow_seq, flow_id, size)
        route = select_route(self.cache, destination)
        if route is not None:
            self._originate(route, item)
            return "sent"
        self.buffer.setdefault(destination, deque()).append(item)
        if destination not in self.discoveries:
            self.initiate_route_discovery(destination)
        return "queued"

    def _originate(self, route, item: PendingData) -> None:
        pkt = Data(route=route, flow_seq=item.flow_seq, flow_id=item.flow_id, hop_index=0,
                   size=item.size)
        self.flow_routes[(route[0], route[-1])] = route
        self.forward_data(pkt)

    def initiate_route_discovery(self, destination: int, attempts: int = 1) -> Optional[Rreq]:
        if not self.net.is_alive(self.id):
            raise RuntimeError(f"dead node {self.id} cannot initiate discovery")
        rid = self.next_request_id
        self.next_request_id += 1
        self.dedup.check_and_add(self.id, rid)
        rreq = Rreq(self.id, destination, rid, (self.id,), excluded=self.excluded.get(destination))
        disc = Discovery(destination, rid, attempts)
        disc.timer = self.net.queue.schedule_in(
            self.config.discovery_timeout, "DiscoveryTimeout",
            lambda: self._discovery_timeout(destination, rid))
        self.discoveries[destination] = disc
        self.net.broadcast(self.id, rreq)
        return rreq

    def _discovery_timeout(self, destination: int, rid: int) -> None:
        disc = self.discoveries.get(destination)
        if disc is None or disc.request_id != rid or not self.net.is_alive(self.id):
            return
        if disc.attempts < self.config.discovery_attempts:
            self.initiate_route_discovery(destination, disc.attempts + 1)
            return
        del self.discoveries[destination]
        dropped = self.buffer.pop(destination, deque())
        for _ in dropped:
            self.net.count("DATA", "drop")
        self.net.on_unreachable(self.id, destination)

    # -- reception ------------------------------------------------------
    def receive(self, pkt: Packet, sender: int) -> None:
        if isinstance(pkt, Rreq):
            self.handle_rreq(pkt)
        elif isinstance(pkt, Rrep):
            self.handle_rrep(pkt)
        elif isinstance(pkt, Rerr):
            self.handle_rerr(pkt)
        elif isinstance(pkt, LowEnergy):
            self.handle_low_energy(pkt)
        elif isinstance(pkt, Data):
            self.handle_data(pkt)

    def handle_rreq(self, rreq: Rreq) -> str:
        if self.id in rreq.route_record:
            self.net.drop(self.id, rreq, "loop")
            return "drop"
        if not self.dedup.check_and_add(rreq.source, rreq.request_id):
            self.net.drop(self.id, rreq, "dup")
            return "drop"
        if rreq.destination == self.id:
            route = rreq.route_record + (self.id,)
            rrep = Rrep(route=route, responder=self.id, request_id=rreq.request_id,
                        position=len(route) - 2)
            self.net.unicast(self.id, route[-2], rrep)
            return "reply"
        if not self.may_forward_rreq(rreq):
            self.net.drop(self.id, rreq, "excluded")
            return "drop"
        if self.config.intermediate_cache_reply:
            cached = self._cached_reply_route(rreq)
            if cached is not None:
                rrep = Rrep(route=cached, responder=self.id, request_id=rreq.request_id,
                            position=len(rreq.route_record) - 1)
                self.net.unicast(self.id, rreq.route_record[-1], rrep)
                return "reply"
        fwd = Rreq(rreq.source, rreq.destination, rreq.request_id,
                   rreq.route_record + (self.id,), excluded=rreq.excluded)
        self.net.schedule_broadcast(self.id, fwd, self.control_delay(fwd))
        return "forward"

    def _cached_reply_route(self, rreq: Rreq):
        for route in self.cache.lookup(rreq.destination):
            tail = route[1:]
            if set(tail) & set(rreq.route_record):
                continue
            if rreq.excluded is not None and rreq.excluded in route[1:-1]:
                continue
            return rreq.route_record + route
        return None

    def handle_rrep(self, rrep: Rrep) -> None:
        pos = rrep.position
        if pos == 0:
            self.cache.add(rrep.route)
            disc = self.discoveries.pop(rrep.route[-1], None)
            if disc is not None and disc.timer is not None:
                disc.timer.cancel()
            self.net.on_route_found(self.id, rrep.route[-1])
            self._drain_buffer(rrep.route[-1])
            return
        if pos < len(rrep.route) - 1:
            self.cache.add(rrep.route[pos:])
        fwd = Rrep(rrep.route, rrep.responder, rrep.request_id, pos - 1)
        delay = self.control_delay(fwd)
        if delay > 0:
            self.net.queue.schedule_in(delay, "JitterExpiry",
                                       lambda: self._send_rrep(fwd))
        else:
            self._send_rrep(fwd)

    def _send_rrep(self, rrep: Rrep) -> None:
        if self.net.is_alive(self.id):
            self.net.unicast(self.id, rrep.route[rrep.position], rrep)

    def _drain_buffer(self, destination: int) -> None:
        queued = self.buffer.pop(destination, deque())
        while queued:
            route = select_route(self.cache, destination)
            if route is None:
                # route pruned while draining; keep the rest for the next discovery
                self.buffer[destination] = queued
                if destination not in self.discoveries:
                    self.initiate_route_discovery(destination)
                return
            self._originate(route, queued.popleft())

    # -- data plane -----------------------------------------------------
    def handle_data(self, pkt: Data) -> None:
        if pkt.route[pkt.hop_index] != self.id:
            self.net.drop(self.id, pkt, "misrouted")
            return
        if not pkt.is_ack:
            self.flow_routes[(pkt.route[0], pkt.route[-1])] = pkt.route
        if pkt.hop_index == len(pkt.route) - 1:
            if pkt.is_ack:
                self.net.on_ack(self.id, pkt)
            else:
                self.net.on_data_delivered(self.id, pkt)
            return
        self.forward_data(pkt)

    def send_ack(self, data: Data, size: int = ACK_BYTES) -> None:
        self.forward_data(make_ack(data, size))

    def forward_data(self, pkt: Data) -> None:
        """Unicast ``pkt`` from this node to the next hop of its header route."""
        self.before_data_tx()
        if not self.net.is_alive(self.id):
            self.net.drop(self.id, pkt, "sender-dead")
            return
        nxt = pkt.route[pkt.hop_index + 1]
        out = Data(route=pkt.route, flow_seq=pkt.flow_seq, flow_id=pkt.flow_id,
                   hop_index=pkt.hop_index + 1, is_ack=pkt.is_ack, attempts=0, size=pkt.size)
        self._attempt(out, nxt)

    def _attempt(self, out: Data, nxt: int) -> None:
        if not self.net.is_alive(self.id):
            self.net.drop(self.id, out, "sender-dead")
            return
        out.attempts += 1
        if self.net.unicast(self.id, nxt, out):
            return
        if out.attempts <= self.config.retransmit_limit:
            self.net.queue.schedule_in(self.config.retransmit_timeout, "RetransmitTimeout",
                                       lambda: self._attempt(out, nxt))
            return
        self.route_maintenance(out, (self.id, nxt))

    def route_maintenance(self, pkt: Data, failed_link: tuple[int, int]) -> Optional[Rerr]:
        a, b = failed_link
        self.cache.remove_link(a, b)
        origin = pkt.route[0]
        if origin == self.id:
            if not pkt.is_ack:
                # the source keeps its own packet and rediscovers
                self.buffer.setdefault(pkt.route[-1], deque()).appendleft(
                    PendingData(pkt.route[-1], pkt.flow_seq, pkt.flow_id, pkt.size))
                if pkt.route[-1] not in self.discoveries:
                    self.initiate_route_discovery(pkt.route[-1])
            else:
                self.net.drop(self.id, pkt, "link-broken")
            return None
        self.net.drop(self.id, pkt, "link-broken")
        idx = pkt.route.index(self.id)
        path = tuple(reversed(pkt.route[: idx + 1]))
        rerr = Rerr(broken_from=a, broken_to=b, original_sender=origin,
                    destination=pkt.route[-1], path=path, position=0)
        self.net.unicast(self.id, path[1], replace(rerr, position=1))
        return rerr

    def handle_rerr(self, rerr: Rerr) -> None:
        self.cache.remove_link(rerr.broken_from, rerr.broken_to)
        if rerr.low_energy:
            self.cache.blocked.add(rerr.broken_to)
            self.cache.remove_intermediate(rerr.broken_to)
        if rerr.position == len(rerr.path) - 1:
            self.on_rerr_at_source(rerr)
            return
        nxt = rerr.path[rerr.position + 1]
        self.net.unicast(self.id, nxt, replace(rerr, position=rerr.position + 1))

    def on_rerr_at_source(self, rerr: Rerr) -> None:
        self.net.on_rerr_at_source(self.id, rerr)
        if rerr.low_energy:
            self.excluded[rerr.destination] = rerr.broken_to
        dest = rerr.destination
        if self.buffer.get(dest) and dest not in self.discoveries and select_route(self.cache, dest) is None:
            self.initiate_route_discovery(dest)
