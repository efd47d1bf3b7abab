"""Static node agents and their message-processing variants.

Three variants exist, selected per experiment: every node starts with the
whole topology (``all_info``), topology is gossiped with an adapted Trickle
(``trickle``), or it is carried around by mobile agents (``mobile_agents``).
All three share the ``connect``/``network_data`` handling used to seed
replicas during recovery.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .messaging import Message, MessageKind, TopologyKnowledge

if TYPE_CHECKING:
    from .environment import Environment

log = logging.getLogger(__name__)

__all__ = [
    "Protocol",
    "TrickleState",
    "NodeAgent",
    "IMAX_CAP",
    "handle_common",
    "process_messages_all_info",
    "process_messages_trickle",
    "process_messages_mobile_agents",
    "process_messages",
    "node_act",
]

IMAX_CAP = 2 ** 16


class Protocol(str, Enum):
    ALL_INFO = "all_info"
    TRICKLE = "trickle"
    MOBILE_AGENTS = "mobile_agents"


@dataclass
class TrickleState:
    """Round-based Trickle timer.

    Deviates from RFC 6206 the same way the adapted algorithm does: an
    inconsistent transmission collapses ``current_interval``, ``i_min`` and
    ``i_max`` to one round, and at each expiry the bounds are re-derived
    from the doubled interval. Doubling is bounded by ``IMAX_CAP``.
    """

    k: int = 3
    i_min: int = 1
    i_max: int = IMAX_CAP
    current_interval: int = 2
    counter: int = 0
    t: int = 1

    def sample_t(self, rng: random.Random) -> int:
        # integer transmission round in [I/2, I), never below 1
        self.t = max(1, int(rng.uniform(self.current_interval / 2, self.current_interval)))
        return self.t

    def should_transmit(self, round_no: int) -> bool:
        return round_no % self.t == 0 and self.counter < self.k

    def hear(self, consistent: bool) -> None:
        if consistent:
            self.counter += 1
        else:
            self.counter = 0
            self.current_interval = self.i_min = self.i_max = 1

    def expired(self, round_no: int) -> bool:
        return round_no % self.current_interval == 0

    def expire(self) -> None:
        self.counter = 0
        self.current_interval = min(2 * self.current_interval, IMAX_CAP)
        self.i_min = max(1, self.current_interval // 2)
        self.i_max = self.current_interval


@dataclass
class NodeAgent:
    id: int
    knowledge: TopologyKnowledge
    protocol: Protocol = Protocol.ALL_INFO
    visited: bool = False
    trickle: Optional[TrickleState] = None
    # round in which this node (or its replica) came up; 0 for the initial population
    born: int = 0

    def believed_neighbours(self) -> frozenset[int]:
        return self.knowledge.neighbours(self.id) or frozenset()

    def learn(self, data: TopologyKnowledge) -> None:
        self.knowledge = self.knowledge.merge(data)


def handle_common(node: NodeAgent, message: Message, env: "Environment") -> bool:
    """Recovery messages understood by every variant. Returns False if not handled."""
    if message.kind is MessageKind.CONNECT:
        target = message.payload
        if env.graph.alive(target):
            env.connect(node.id, target)
            env.send(target, Message(MessageKind.NETWORK_DATA, node.id, node.knowledge))
        return True
    if message.kind is MessageKind.NETWORK_DATA:
        node.learn(message.payload)
        return True
    return False


def _protocol_error(node: NodeAgent, message: Message, env: "Environment") -> None:
    env.post.counters.protocol_errors += 1
    log.debug("node %d (%s) ignored %s from %d", node.id, node.protocol.value, message.kind.value, message.sender)


def process_messages_all_info(node: NodeAgent, env: "Environment") -> None:
    for message in env.post.drain(node.id):
        if not handle_common(node, message, env):
            _protocol_error(node, message, env)


def process_messages_trickle(node: NodeAgent, env: "Environment", rng: random.Random) -> None:
    state = node.trickle
    round_no = env.round
    state.sample_t(rng)
    if state.should_transmit(round_no):
        data = node.knowledge
        for nbr in sorted(env.graph.neighbors(node.id)):
            env.send(nbr, Message(MessageKind.NETWORK_DATA_TRICKLE, node.id, data))

    for message in env.post.drain(node.id):
        if message.kind is MessageKind.NETWORK_DATA_TRICKLE:
            state.hear(message.payload == node.knowledge)
            node.learn(message.payload)
        elif not handle_common(node, message, env):
            _protocol_error(node, message, env)

    if state.expired(round_no):
        state.expire()


def process_messages_mobile_agents(node: NodeAgent, env: "Environment") -> None:
    for message in env.post.drain(node.id):
        if message.kind is MessageKind.NETWORK_DATA_MOBILE_AGENT:
            node.learn(message.payload)
        elif not handle_common(node, message, env):
            _protocol_error(node, message, env)


def process_messages(node: NodeAgent, env: "Environment") -> None:
    if node.protocol is Protocol.TRICKLE:
        process_messages_trickle(node, env, env.rng("trickle"))
    elif node.protocol is Protocol.MOBILE_AGENTS:
        process_messages_mobile_agents(node, env)
    else:
        process_messages_all_info(node, env)


def node_act(node: NodeAgent, env: "Environment", u: float) -> bool:
    """One node's full turn: failure draw, message processing, then healing.

    ``u`` is the node's uniform draw for this round. Returns False when the
    node failed. The engine runs the same steps split into phases.
    """
    from .healing import evaluate_node_creation

    if u < env.p_f and env.in_failure_window():
        env.kill_node(node.id)
        return False
    process_messages(node, env)
    evaluate_node_creation(node, env)
    return True
