import random

import pytest

from netheal.engine import run_round
from netheal.messaging import Message, MessageKind, TopologyKnowledge
from netheal.nodes import IMAX_CAP, Protocol, TrickleState, process_messages
from netheal.topology import Graph, generate_hub_spoke

from oracles import fresh_env


def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def test_interval_doubles_until_cap():
    state = TrickleState()
    seen = [state.current_interval]
    for _ in range(20):
        state.expire()
        seen.append(state.current_interval)
    assert seen[:5] == [2, 4, 8, 16, 32]
    assert max(seen) == IMAX_CAP == 2 ** 16
    assert seen[-1] == IMAX_CAP


def test_isolated_node_interval_doubles_on_expiry():
    env = fresh_env(Graph(1), Protocol.TRICKLE)
    node = env.nodes[0]
    intervals = []
    for _ in range(40):
        run_round(env)
        intervals.append(node.trickle.current_interval)
    # expiry checks happen at multiples of the current interval
    assert sorted(set(intervals))[:4] == [2, 4, 8, 16]
    assert intervals == sorted(intervals)


def test_t_stays_in_half_open_interval():
    state = TrickleState(current_interval=64)
    r = random.Random(5)
    draws = {state.sample_t(r) for _ in range(500)}
    assert min(draws) >= 32 and max(draws) < 64


def test_t_never_below_one():
    state = TrickleState(current_interval=1)
    assert state.sample_t(random.Random(0)) == 1


def test_suppression_after_k_redundant():
    state = TrickleState(k=3, t=1)
    for _ in range(2):
        state.hear(True)
    assert state.should_transmit(10)
    state.hear(True)
    assert not state.should_transmit(10)


def test_inconsistency_resets_interval():
    state = TrickleState(current_interval=512, counter=2)
    state.hear(False)
    assert (state.current_interval, state.i_min, state.i_max, state.counter) == (1, 1, 1, 0)
    state.expire()
    assert state.current_interval == 2


def test_trickle_broadcast_reaches_neighbours_next_round():
    env = fresh_env(path3(), Protocol.TRICKLE, seed=3)
    run_round(env)
    # round 1: everyone broadcasts; nothing has arrived yet
    assert all(len(n.knowledge) == 1 for n in env.nodes.values())
    run_round(env)
    assert set(env.nodes[1].knowledge.keys()) == {0, 1, 2}
    assert set(env.nodes[0].knowledge.keys()) == {0, 1}


def test_trickle_converges_to_full_topology():
    g = generate_hub_spoke(10)
    env = fresh_env(g, Protocol.TRICKLE)
    full = TopologyKnowledge.from_graph(g)
    for _ in range(10):
        run_round(env)
    assert all(n.knowledge == full for n in env.nodes.values())


def test_all_info_starts_with_everything():
    g = path3()
    env = fresh_env(g, Protocol.ALL_INFO)
    assert all(n.knowledge == TopologyKnowledge.from_graph(g) for n in env.nodes.values())


@pytest.mark.parametrize("protocol", [Protocol.TRICKLE, Protocol.MOBILE_AGENTS])
def test_runtime_protocols_start_with_own_entry(protocol):
    env = fresh_env(path3(), protocol)
    assert env.nodes[1].knowledge.as_dict() == {1: {0, 2}}


def test_foreign_message_counts_as_protocol_error():
    env = fresh_env(path3(), Protocol.ALL_INFO)
    k = TopologyKnowledge.from_mapping({0: {1}}, 3)
    env.post.deliver(1, Message(MessageKind.NETWORK_DATA_TRICKLE, 0, k))
    process_messages(env.nodes[1], env)
    assert env.post.counters.protocol_errors == 1


def test_mobile_agent_deposit_is_merged():
    env = fresh_env(path3(), Protocol.MOBILE_AGENTS)
    k = TopologyKnowledge.from_mapping({2: {1}}, 3)
    env.post.deliver(0, Message(MessageKind.NETWORK_DATA_MOBILE_AGENT, 0, k))
    process_messages(env.nodes[0], env)
    assert set(env.nodes[0].knowledge.keys()) == {0, 2}
