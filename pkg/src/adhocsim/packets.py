"""Packet types carried over the simulated air interface.

Every packet knows how to render itself as the trailing fields of a trace
line: ``kind source dest id route [flags=LE]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

DATA_BYTES = 1080
ACK_BYTES = 40
CONTROL_BYTES = 40


def validate_route(hops: Sequence[int]) -> tuple[int, ...]:
    hops = tuple(hops)
    if len(hops) < 2:
        raise ValueError(f"source route needs at least two hops: {hops}")
    if len(set(hops)) != len(hops):
        raise ValueError(f"source route has a loop: {hops}")
    return hops


def format_route(hops: Sequence[int]) -> str:
    return "-".join(str(h) for h in hops) if hops else "-"


@dataclass
class Rreq:
    source: int
    destination: int
    request_id: int
    route_record: tuple[int, ...]
    excluded: Optional[int] = None
    size: int = CONTROL_BYTES
    kind = "RREQ"

    def trace_fields(self) -> str:
        text = f"RREQ {self.source} {self.destination} {self.request_id} {format_route(self.route_record)}"
        if self.excluded is not None:
            text += f" x={self.excluded}"
        return text


@dataclass
class Rrep:
    """Route reply travelling back along the reversed route.

    ``position`` is the index in ``route`` of the node currently holding it.
    """

    route: tuple[int, ...]
    responder: int
    request_id: int
    position: int
    size: int = CONTROL_BYTES
    kind = "RREP"

    def trace_fields(self) -> str:
        return f"RREP {self.route[0]} {self.route[-1]} {self.request_id} {format_route(self.route)}"


@dataclass
class Rerr:
    """Route error: link ``broken_from -> broken_to`` failed.

    ``path`` is the node sequence the error walks, ending at
    ``original_sender``; ``low_energy`` marks errors raised by the survival
    mechanism, in which case ``broken_to`` names the drained node.
    """

    broken_from: int
    broken_to: int
    original_sender: int
    destination: int
    path: tuple[int, ...]
    position: int = 0
    low_energy: bool = False
    size: int = CONTROL_BYTES
    kind = "RERR"

    def __post_init__(self):
        if self.broken_from == self.broken_to:
            raise ValueError("RERR link endpoints must differ")

    def trace_fields(self) -> str:
        text = (f"RERR {self.original_sender} {self.destination} "
                f"{self.broken_from}>{self.broken_to} {format_route(self.path)}")
        return text + (" flags=LE" if self.low_energy else "")


@dataclass
class LowEnergy:
    origin: int
    low_energy: int = 1
    size: int = CONTROL_BYTES
    kind = "LOW_ENERGY"

    def trace_fields(self) -> str:
        return f"LOW_ENERGY {self.origin} * 0 - flags=LE"


@dataclass
class Data:
    """Source-routed DATA or ACK packet; ``hop_index`` is the holder's index."""

    route: tuple[int, ...]
    flow_seq: int
    flow_id: int = 0
    hop_index: int = 0
    is_ack: bool = False
    attempts: int = 0
    size: int = field(default=DATA_BYTES)

    @property
    def kind(self) -> str:
        return "ACK" if self.is_ack else "DATA"

    def trace_fields(self) -> str:
        return f"{self.kind} {self.route[0]} {self.route[-1]} {self.flow_seq} {format_route(self.route)}"


def make_ack(data: Data, size: int = ACK_BYTES) -> Data:
    return Data(route=tuple(reversed(data.route)), flow_seq=data.flow_seq,
                flow_id=data.flow_id, hop_index=0, is_ack=True, size=size)


Packet = Union[Rreq, Rrep, Rerr, LowEnergy, Data]
