"""Mobile agents that carry topology data between the nodes they visit."""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .messaging import Message, MessageKind, TopologyKnowledge

if TYPE_CHECKING:
    from .environment import Environment

__all__ = ["MobileAgentState", "AgentOutcome", "agent_act", "random_with_marks", "spawn_agent_at", "AGENT_OVERHEAD_BYTES"]

AGENT_OVERHEAD_BYTES = 16


class AgentOutcome(str, Enum):
    SURVIVED = "survived"
    DIED_NODE_FAILURE = "died_node_failure"
    DIED_REDUNDANCY = "died_redundancy"


@dataclass
class MobileAgentState:
    agent_id: int
    location: int
    knowledge: TopologyKnowledge
    counter: int = 0
    k: int = 3

    @property
    def memory_bytes(self) -> int:
        return self.knowledge.size_bytes + AGENT_OVERHEAD_BYTES


def random_with_marks(location: int, env: "Environment", rng: random.Random) -> int:
    """Next hop: uniform over unvisited neighbours, else uniform over all of them.

    Querying each neighbour's visited flag costs one ping. An agent on a node
    without live neighbours stays where it is.
    """
    nbrs = sorted(env.graph.neighbors(location))
    if not nbrs:
        return location
    for v in nbrs:
        env.post.ping(v)
    unmarked = [v for v in nbrs if not env.nodes[v].visited]
    return rng.choice(unmarked or nbrs)


def agent_act(agent: MobileAgentState, env: "Environment", rng: random.Random) -> AgentOutcome:
    node = env.nodes.get(agent.location)
    if node is None:
        return AgentOutcome.DIED_NODE_FAILURE
    carried = agent.knowledge
    if carried == node.knowledge:
        agent.counter += 1
    else:
        agent.counter = 0
    if agent.counter >= agent.k:
        return AgentOutcome.DIED_REDUNDANCY
    env.send(node.id, Message(MessageKind.NETWORK_DATA_MOBILE_AGENT, node.id, carried))
    agent.knowledge = node.knowledge.merge(carried)
    node.visited = True
    agent.location = random_with_marks(node.id, env, rng)
    return AgentOutcome.SURVIVED


def spawn_agent_at(env: "Environment", node_id: int) -> MobileAgentState:
    node = env.nodes.get(node_id)
    if node is None:
        raise KeyError(f"cannot spawn an agent on missing node {node_id}")
    agent = MobileAgentState(env.next_agent_id(), node_id, node.knowledge, k=env.k_agents)
    env.agents.append(agent)
    return agent
