"""Failure detection and decentralised node recreation.

Each round a node compares the neighbours it senses with the neighbourhood it
has memorised. A memorised neighbour that is no longer sensed is treated as
failed; the lowest-id node holding the failed node's neighbourhood recreates
it under the same id, seeds it with its own knowledge and asks the other
former neighbours to reconnect.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .messaging import Message, MessageKind
from .nodes import NodeAgent

if TYPE_CHECKING:
    from .environment import Environment

log = logging.getLogger(__name__)

__all__ = ["HealingDecision", "sense_neighbours", "evaluate_node_creation", "create_new_node", "answers_ping"]


@dataclass(frozen=True)
class HealingDecision:
    missing: int
    creator: int
    neighbor_set: frozenset[int]


def sense_neighbours(node: NodeAgent, env: "Environment") -> set[int]:
    """Alive adjacent nodes; charges one heartbeat per memorised neighbour."""
    for nbr in node.believed_neighbours():
        env.post.heartbeat(nbr)
    return set(env.graph.neighbors(node.id))


def answers_ping(candidate: int, missing: int, env: "Environment") -> bool:
    """A lower-id candidate replies when it is alive, misses ``missing`` too and can recreate it.

    Replicas created during the current round stay silent: they only start
    acting in the next one.
    """
    other = env.nodes.get(candidate)
    if other is None or other.born == env.round and env.round > 0:
        return False
    return (missing in other.believed_neighbours()
            and missing in other.knowledge
            and not env.graph.has_edge(candidate, missing))


def evaluate_node_creation(node: NodeAgent, env: "Environment") -> list[HealingDecision]:
    sensed = sense_neighbours(node, env)
    believed = node.believed_neighbours()
    unexpected = sensed - believed
    if unexpected:
        node.knowledge = node.knowledge.with_entry(node.id, unexpected)
    decisions = []
    for missing in sorted(believed - sensed):
        neigh = node.knowledge.neighbours(missing)
        if neigh is None:
            log.debug("node %d misses %d but holds no data about it", node.id, missing)
            env.missing_knowledge += 1
            continue
        lower = sorted(c for c in neigh if c < node.id and c != missing)
        if any(env.post.ping(c) and answers_ping(c, missing, env) for c in lower):
            continue
        decision = HealingDecision(missing, node.id, frozenset(neigh))
        create_new_node(node, missing, decision.neighbor_set, env)
        decisions.append(decision)
    return decisions


def create_new_node(creator: NodeAgent, missing_id: int, neigh_set: frozenset[int], env: "Environment") -> int:
    if env.graph.alive(missing_id):
        env.connect(creator.id, missing_id)
        return missing_id
    env.recreate_node(missing_id, creator.knowledge)
    env.connect(creator.id, missing_id)
    for nbr in sorted(neigh_set - {creator.id, missing_id}):
        env.exchange(nbr, Message(MessageKind.CONNECT, creator.id, missing_id))
    return missing_id
