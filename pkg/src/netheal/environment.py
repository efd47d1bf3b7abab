"""Simulation state shared by nodes, agents and the scheduler."""

from __future__ import annotations

import random
from typing import Optional

from .messaging import Message, PostOffice, TopologyKnowledge
from .nodes import NodeAgent, Protocol, TrickleState, handle_common
from .topology import Graph

__all__ = ["Environment", "Window", "STREAMS"]

STREAMS = ("failures", "trickle", "moves", "order")

Window = tuple[int, int, int]


class Environment:
    """Ground-truth graph, live node/agent populations and the round clock.

    Random numbers come from independent named streams derived from one
    seed, so e.g. agent movement never shifts the failure draws.
    """

    def __init__(
        self,
        graph: Graph,
        protocol: Protocol = Protocol.ALL_INFO,
        p_f: float = 0.0,
        window: Window = (0, 0, 1),
        seed: int = 0,
        k_trickle: int = 3,
        k_agents: int = 3,
        original: Optional[Graph] = None,
    ):
        self.original = original if original is not None else graph.copy()
        self.graph = graph
        self.protocol = Protocol(protocol)
        self.p_f = p_f
        self.window = window
        self.seed = seed
        self.k_trickle = k_trickle
        self.k_agents = k_agents
        self.round = 0
        self.nodes: dict[int, NodeAgent] = {}
        self.agents: list = []
        self.post = PostOffice(self.graph.alive)
        self.missing_knowledge = 0
        self._streams = {name: random.Random(f"{seed}/{name}") for name in STREAMS}
        self._agent_ids = 0

    # -- setup -----------------------------------------------------------
    def initial_knowledge(self, u: int) -> TopologyKnowledge:
        if self.protocol is Protocol.ALL_INFO:
            if not hasattr(self, "_full"):
                self._full = TopologyKnowledge.from_graph(self.graph)
            return self._full
        return TopologyKnowledge(self.graph.n).with_entry(u, self.graph.neighbors(u))

    def populate(self) -> None:
        """Create one node agent per live node, plus one mobile agent each when used."""
        from .agents import spawn_agent_at

        for u in self.graph.nodes():
            self.nodes[u] = self._make_node(u, self.initial_knowledge(u))
        if self.protocol is Protocol.MOBILE_AGENTS:
            for u in self.graph.nodes():
                spawn_agent_at(self, u)

    def _make_node(self, u: int, knowledge: TopologyKnowledge) -> NodeAgent:
        trickle = TrickleState(k=self.k_trickle) if self.protocol is Protocol.TRICKLE else None
        return NodeAgent(u, knowledge, self.protocol, trickle=trickle)

    # -- helpers ---------------------------------------------------------
    def rng(self, name: str) -> random.Random:
        return self._streams[name]

    def next_agent_id(self) -> int:
        self._agent_ids += 1
        return self._agent_ids - 1

    def in_failure_window(self, round_no: Optional[int] = None) -> bool:
        r = self.round if round_no is None else round_no
        start, stop, _ = self.window
        return start <= r < stop

    # -- graph lifecycle -------------------------------------------------
    def kill_node(self, u: int) -> None:
        """Crash ``u``: drop its edges, inbox and every agent located on it."""
        self.graph.kill(u)
        del self.nodes[u]
        self.post.discard(u)
        self.agents = [a for a in self.agents if a.location != u]

    def recreate_node(self, u: int, knowledge: TopologyKnowledge) -> NodeAgent:
        self.graph.recreate(u)
        node = self.nodes[u] = self._make_node(u, knowledge)
        node.born = self.round
        if self.protocol is Protocol.MOBILE_AGENTS:
            from .agents import spawn_agent_at

            spawn_agent_at(self, u)
        return node

    def connect(self, u: int, v: int) -> None:
        self.graph.add_edge(u, v)

    # -- messaging -------------------------------------------------------
    def send(self, to: int, message: Message) -> None:
        if self._immediate:
            self.exchange(to, message)
        else:
            self.post.send(to, message)

    _immediate = False

    def exchange(self, to: int, message: Message) -> None:
        """Deliver and handle a recovery message within the current phase.

        Replies sent while handling it are exchanged synchronously too, so a
        replica is wired up and seeded before the healing pass moves on.
        """
        if not self.post.deliver(to, message):
            return
        self.post.queues[to].pop()
        previous, self._immediate = self._immediate, True
        try:
            handle_common(self.nodes[to], message, self)
        finally:
            self._immediate = previous

    # -- observation -----------------------------------------------------
    def live_agents(self) -> int:
        return len(self.agents)

    def missing_nodes(self) -> list[int]:
        return sorted(set(self.original.adj) - set(self.graph.adj))
