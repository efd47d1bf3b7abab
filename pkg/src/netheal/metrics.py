"""Per-round measurements and the summary statistics built on them."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING, Iterable, Sequence

from .similarity import graph_similarity

if TYPE_CHECKING:
    from .environment import Environment

__all__ = ["MetricsRecord", "CSV_COLUMNS", "snapshot", "rpd", "integrate", "summarize_series", "SUMMARY_METRICS"]


@dataclass(frozen=True)
class MetricsRecord:
    round: int
    similarity_pct: float
    node_memory_bytes: int
    agent_memory_bytes: int
    received_bytes: int
    received_messages: int
    live_nodes: int
    live_agents: int
    # not part of the CSV; kept for the heartbeat steady-state check
    heartbeats: int = 0

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


CSV_COLUMNS = tuple(f.name for f in fields(MetricsRecord) if f.name != "heartbeats")

SUMMARY_METRICS = ("node_memory_bytes", "agent_memory_bytes", "received_bytes", "received_messages")


def snapshot(env: "Environment", with_similarity: bool = True) -> MetricsRecord:
    """Measure the quiescent state at the end of ``env.round``.

    With ``with_similarity`` False the score is recorded as NaN; this is a
    cost knob only and never changes the trajectory.
    """
    if not with_similarity:
        sim = math.nan
    elif not env.graph.adj:
        sim = 0.0
    else:
        sim = 100.0 * graph_similarity(env.original, env.graph)
    c = env.post.counters
    return MetricsRecord(
        round=env.round,
        similarity_pct=sim,
        node_memory_bytes=sum(node.knowledge.size_bytes for node in env.nodes.values()),
        agent_memory_bytes=sum(a.memory_bytes for a in env.agents),
        received_bytes=c.received_bytes,
        received_messages=c.received_messages,
        live_nodes=env.graph.number_of_nodes(),
        live_agents=len(env.agents),
        heartbeats=c.heartbeats,
    )


def rpd(a: float, b: float) -> float:
    """Relative percent difference, 0 when both values are 0."""
    if a < 0 or b < 0:
        raise ValueError("rpd is defined for non-negative values")
    if a == 0 and b == 0:
        return 0.0
    # |a-b| / mean * 100 without halving a subnormal sum down to zero
    return abs(a - b) / (a + b) * 200


def integrate(series: Iterable[float]) -> float:
    return sum(series)


def summarize_series(reps: Sequence[Sequence[MetricsRecord]]) -> dict:
    """Integrated min/median/max per metric and final-similarity success counts."""
    out: dict = {"reps": len(reps), "metrics": {}}
    for name in SUMMARY_METRICS + ("total_memory_bytes",):
        if name == "total_memory_bytes":
            totals = [integrate(r.node_memory_bytes + r.agent_memory_bytes for r in s) for s in reps]
        else:
            totals = [integrate(getattr(r, name) for r in s) for s in reps]
        out["metrics"][name] = {
            "min": min(totals),
            "median": statistics.median(totals),
            "max": max(totals),
        }
    finals = [s[-1].similarity_pct for s in reps]
    known = [f for f in finals if not math.isnan(f)]
    out["final_similarity_pct"] = {
        "min": min(known) if known else None,
        "median": statistics.median(known) if known else None,
        "max": max(known) if known else None,
    }
    out["successful_reps"] = sum(f == 100.0 for f in known)
    out["failed_reps"] = len(known) - out["successful_reps"]
    return out
