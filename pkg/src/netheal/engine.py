"""Round scheduler and experiment orchestration."""

from __future__ import annotations

import logging
import math
import random
import statistics
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .agents import AgentOutcome, agent_act
from .environment import Environment
from .healing import evaluate_node_creation
from .metrics import MetricsRecord, snapshot
from .nodes import Protocol, process_messages
from .topology import Graph, GeneratorParams, build_graph

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "ReferencePointError",
    "RepResult",
    "PHASES",
    "make_graph",
    "run_rep",
    "run_experiment",
    "find_reference_point",
]

PHASES = ("failures", "delivery", "nodes", "agents", "healing", "snapshot")


class ConfigError(ValueError):
    pass


class ReferencePointError(RuntimeError):
    """No reference point inside the round budget; ``series`` holds what was run."""

    def __init__(self, message: str, series: list):
        super().__init__(message)
        self.series = series


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorParams
    p_f: float = 0.0
    protocol: Protocol = Protocol.ALL_INFO
    k_agents: int = 3
    k_trickle: int = 3
    window: tuple[int, int, int] = (0, 50, 100)
    reps: int = 30
    seed: int = 1
    # similarity is computed every N rounds and always in the last one; 0 = last only
    similarity_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        object.__setattr__(self, "window", tuple(int(w) for w in self.window))
        if len(self.window) != 3:
            raise ConfigError("window must be (start, stop, end)")
        start, stop, end = self.window
        if not 0 <= start <= stop <= end:
            raise ConfigError(f"window must satisfy 0 <= start <= stop <= end, got {self.window}")
        if end < 1:
            raise ConfigError("end must be at least 1 round")
        if not 0.0 <= self.p_f <= 1.0:
            raise ConfigError(f"p_f must lie in [0, 1], got {self.p_f}")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.k_agents < 1 or self.k_trickle < 1:
            raise ConfigError("redundancy constants must be >= 1")
        if self.similarity_every < 0:
            raise ConfigError("similarity_every must be >= 0")
        if not -(2 ** 63) <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


@dataclass
class RepResult:
    rep: int
    seed: int
    series: list[MetricsRecord]
    final_graph: Graph
    original: Graph
    missing_nodes: list[int] = field(default_factory=list)

    @property
    def recovered(self) -> bool:
        return self.final_graph.same_as(self.original)

    @property
    def similarity_agrees(self) -> bool:
        """Final score is 100% exactly when the edge-set oracle says the graph is whole."""
        return (self.series[-1].similarity_pct == 100.0) == self.recovered


def make_graph(config: ExperimentConfig) -> Graph:
    """The experiment's topology; generated once from the root seed and shared by all reps."""
    return build_graph(config.generator, random.Random(f"{config.seed}/generators"))


def _wants_similarity(config: ExperimentConfig, round_no: int) -> bool:
    end = config.window[2]
    if round_no == end:
        return True
    every = config.similarity_every
    return every > 0 and round_no % every == 0


def run_round(env: Environment) -> None:
    """Advance ``env`` by one round, leaving it quiescent for the snapshot."""
    env.round += 1
    env.post.counters.reset()

    if env.in_failure_window() and env.p_f > 0:
        rng = env.rng("failures")
        draws = [rng.random() for _ in range(env.graph.n)]
        for u in range(env.graph.n):
            if draws[u] < env.p_f and env.graph.alive(u):
                env.kill_node(u)

    env.post.deliver_pending()

    order = env.graph.nodes()
    env.rng("order").shuffle(order)
    for u in order:
        node = env.nodes.get(u)
        if node is not None:
            process_messages(node, env)

    if env.agents:
        agents = list(env.agents)
        env.rng("order").shuffle(agents)
        moves = env.rng("moves")
        dead = set()
        for agent in agents:
            if agent_act(agent, env, moves) is not AgentOutcome.SURVIVED:
                dead.add(agent.agent_id)
        if dead:
            env.agents = [a for a in env.agents if a.agent_id not in dead]

    for u in env.graph.nodes():
        node = env.nodes.get(u)
        if node is not None:
            evaluate_node_creation(node, env)


def run_rep(config: ExperimentConfig, graph: Graph, rep: int = 0,
            on_round: Optional[Callable[[Environment], None]] = None) -> RepResult:
    seed = config.seed + rep
    env = Environment(
        graph.copy(),
        protocol=config.protocol,
        p_f=config.p_f,
        window=config.window,
        seed=seed,
        k_trickle=config.k_trickle,
        k_agents=config.k_agents,
        original=graph,
    )
    env.populate()
    series = []
    for _ in range(config.window[2]):
        run_round(env)
        if on_round is not None:
            on_round(env)
        series.append(snapshot(env, _wants_similarity(config, env.round)))
    result = RepResult(rep, seed, series, env.graph, graph, env.missing_nodes())
    log.debug("rep %d (seed %d) done, %d nodes missing", rep, seed, len(result.missing_nodes))
    if not result.similarity_agrees:
        log.warning("rep %d: similarity %.4f%% disagrees with the edge-set check", rep, series[-1].similarity_pct)
    return result


def run_experiment(config: ExperimentConfig, graph: Optional[Graph] = None) -> list[list[MetricsRecord]]:
    """Per-rep metric series for every repetition of ``config``."""
    if graph is None:
        graph = make_graph(config)
    return [run_rep(config, graph, rep).series for rep in range(config.reps)]


def _trickle_fixpoint(series: list[list[MetricsRecord]]) -> int:
    end = len(series[0])
    finals = {s[-1].node_memory_bytes for s in series}
    if len(finals) != 1:
        raise ReferencePointError("node knowledge differs across reps at the last round", series)
    final = finals.pop()
    first = end
    for i in range(end - 1, -1, -1):
        if all(s[i].node_memory_bytes == final for s in series):
            first = i
        else:
            break
    if first >= end - 1:
        raise ReferencePointError("node knowledge did not settle within the round budget", series)
    return series[0][first].round


def _agents_extinct(series: list[list[MetricsRecord]]) -> int:
    rounds = []
    for s in series:
        hit = next((r.round for r in s if r.live_agents == 0), None)
        if hit is None:
            raise ReferencePointError("agents still alive at the end of the round budget", series)
        rounds.append(hit)
    return math.ceil(statistics.median(rounds))


def find_reference_point(config: ExperimentConfig, graph: Optional[Graph] = None) -> int:
    """Round at which data collection settles in a failure-free run.

    Trickle: first round from which every rep holds the same, final amount of
    node knowledge. Mobile agents: median round at which the last agent dies.
    """
    if config.p_f != 0:
        raise ConfigError("reference points are measured with p_f = 0")
    if config.protocol is Protocol.ALL_INFO:
        raise ConfigError("reference points exist only for trickle and mobile_agents")
    series = run_experiment(config.with_(similarity_every=0), graph)
    if config.protocol is Protocol.TRICKLE:
        return _trickle_fixpoint(series)
    return _agents_extinct(series)
