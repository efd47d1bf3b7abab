"""Topology knowledge, message envelopes and per-node delivery queues.

Knowledge is a map ``node id -> set of neighbour ids``. It is stored as two
Python integers used as bitsets: ``present`` has bit ``i`` set when an entry
for node ``i`` exists, and ``rows`` packs every neighbour set as an
``n``-bit row at offset ``i * n``. Both are immutable, so a snapshot is just
a reference and a union is two ``|`` operations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

__all__ = [
    "TopologyKnowledge",
    "MessageKind",
    "Message",
    "canonical_size",
    "RoundCounters",
    "PostOffice",
    "ID_BYTES",
]

ID_BYTES = 4
TAG_BYTES = 1


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class TopologyKnowledge:
    """Immutable union-closed topology map over ids ``0..n-1``."""

    __slots__ = ("n", "present", "rows", "_size", "_cache")

    def __init__(self, n: int, present: int = 0, rows: int = 0):
        self.n = n
        self.present = present
        self.rows = rows
        self._size: Optional[int] = None
        self._cache: dict[int, frozenset[int]] = {}

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Iterable[int]], n: Optional[int] = None) -> "TopologyKnowledge":
        if n is None:
            ids = set(mapping)
            for vs in mapping.values():
                ids.update(vs)
            n = max(ids) + 1 if ids else 0
        present = rows = 0
        for u, vs in mapping.items():
            present |= 1 << u
            row = 0
            for v in vs:
                if not 0 <= v < n:
                    raise ValueError(f"id {v} outside 0..{n - 1}")
                row |= 1 << v
            rows |= row << (u * n)
        return cls(n, present, rows)

    @classmethod
    def from_graph(cls, graph, only: Optional[Iterable[int]] = None) -> "TopologyKnowledge":
        keys = graph.nodes() if only is None else only
        return cls.from_mapping({u: graph.neighbors(u) for u in keys}, graph.n)

    # -- mapping protocol ------------------------------------------------
    def __contains__(self, u: int) -> bool:
        return bool(self.present >> u & 1)

    def __len__(self) -> int:
        return self.present.bit_count()

    def keys(self) -> list[int]:
        return list(_bits(self.present))

    def neighbours(self, u: int) -> Optional[frozenset[int]]:
        """Neighbour set stored for ``u``, or ``None`` when there is no entry."""
        if not self.present >> u & 1:
            return None
        hit = self._cache.get(u)
        if hit is None:
            row = (self.rows >> (u * self.n)) & ((1 << self.n) - 1)
            hit = self._cache[u] = frozenset(_bits(row))
        return hit

    def items(self) -> Iterator[tuple[int, frozenset[int]]]:
        for u in self.keys():
            yield u, self.neighbours(u)

    def as_dict(self) -> dict[int, set[int]]:
        return {u: set(vs) for u, vs in self.items()}

    # -- algebra ---------------------------------------------------------
    def merge(self, other: "TopologyKnowledge") -> "TopologyKnowledge":
        if other.n != self.n:
            raise ValueError(f"cannot merge knowledge over {self.n} and {other.n} ids")
        present = self.present | other.present
        rows = self.rows | other.rows
        if present == self.present and rows == self.rows:
            return self
        if present == other.present and rows == other.rows:
            return other
        return TopologyKnowledge(self.n, present, rows)

    __or__ = merge

    def with_entry(self, u: int, neighbours: Iterable[int] = ()) -> "TopologyKnowledge":
        """Union ``neighbours`` into the entry for ``u`` (creating it if needed)."""
        row = 0
        for v in neighbours:
            row |= 1 << v
        present = self.present | (1 << u)
        rows = self.rows | (row << (u * self.n))
        if present == self.present and rows == self.rows:
            return self
        return TopologyKnowledge(self.n, present, rows)

    def issubset(self, other: "TopologyKnowledge") -> bool:
        return (self.present | other.present) == other.present and (self.rows | other.rows) == other.rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, TopologyKnowledge):
            return NotImplemented
        return self.present == other.present and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.present, self.rows))

    @property
    def size_bytes(self) -> int:
        """Serialised size: tag byte + per entry (id + 4 bytes per neighbour)."""
        if self._size is None:
            self._size = TAG_BYTES + ID_BYTES * (self.present.bit_count() + self.rows.bit_count())
        return self._size

    def __repr__(self) -> str:
        body = ", ".join(f"{u}: {sorted(vs)}" for u, vs in self.items())
        return f"TopologyKnowledge({{{body}}})"


class MessageKind(str, Enum):
    CONNECT = "connect"
    NETWORK_DATA = "network_data"
    NETWORK_DATA_TRICKLE = "network_data_trickle"
    NETWORK_DATA_MOBILE_AGENT = "network_data_mobile_agent"
    PING = "ping"
    HEARTBEAT = "heartbeat"


TOPOLOGY_KINDS = frozenset({
    MessageKind.NETWORK_DATA,
    MessageKind.NETWORK_DATA_TRICKLE,
    MessageKind.NETWORK_DATA_MOBILE_AGENT,
})

Payload = Union[TopologyKnowledge, int, None]


def canonical_size(kind: MessageKind, payload: Payload = None) -> int:
    kind = MessageKind(kind)
    if kind in (MessageKind.PING, MessageKind.HEARTBEAT):
        return TAG_BYTES
    if kind is MessageKind.CONNECT:
        return TAG_BYTES + ID_BYTES
    if payload is None:
        return TAG_BYTES
    return payload.size_bytes


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: int
    payload: Payload = None
    size_bytes: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", MessageKind(self.kind))
        object.__setattr__(self, "size_bytes", canonical_size(self.kind, self.payload))


@dataclass
class RoundCounters:
    """Traffic observed by receivers during one round."""

    received_bytes: int = 0
    received_messages: int = 0
    heartbeats: int = 0
    pings: int = 0
    delivered_payload_bytes: int = 0
    protocol_errors: int = 0

    def reset(self) -> None:
        self.received_bytes = self.received_messages = 0
        self.heartbeats = self.pings = 0
        self.delivered_payload_bytes = self.protocol_errors = 0


class PostOffice:
    """Per-node FIFO inboxes with next-round delivery.

    ``send`` buffers a message; ``deliver_pending`` moves buffered messages
    into the recipients' queues and charges the receive counters. Messages
    addressed to a node that is dead at send or delivery time are dropped.
    """

    def __init__(self, is_alive: Callable[[int], bool]):
        self.is_alive = is_alive
        self.queues: dict[int, deque[Message]] = {}
        self.pending: list[tuple[int, Message]] = []
        self.counters = RoundCounters()

    def send(self, to: int, message: Message) -> None:
        if self.is_alive(to):
            self.pending.append((to, message))

    def deliver(self, to: int, message: Message) -> bool:
        if not self.is_alive(to):
            return False
        self.queues.setdefault(to, deque()).append(message)
        c = self.counters
        c.received_bytes += message.size_bytes
        c.received_messages += 1
        c.delivered_payload_bytes += message.size_bytes
        return True

    def deliver_pending(self) -> int:
        pending, self.pending = self.pending, []
        return sum(self.deliver(to, msg) for to, msg in pending)

    def drain(self, node: int) -> list[Message]:
        q = self.queues.get(node)
        if not q:
            return []
        out = list(q)
        q.clear()
        return out

    def discard(self, node: int) -> None:
        self.queues.pop(node, None)
        self.pending = [(to, m) for to, m in self.pending if to != node]

    def ping(self, to: int) -> bool:
        """One-byte probe; counted in bytes and messages when ``to`` is alive."""
        if not self.is_alive(to):
            return False
        c = self.counters
        c.pings += 1
        c.received_messages += 1
        c.received_bytes += TAG_BYTES
        return True

    def heartbeat(self, to: int) -> bool:
        """Aliveness probe; counted as a message but not as bandwidth."""
        if not self.is_alive(to):
            return False
        self.counters.heartbeats += 1
        self.counters.received_messages += 1
        return True
