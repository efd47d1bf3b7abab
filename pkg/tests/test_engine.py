import networkx as nx
import pytest

from netheal.engine import (
    ConfigError,
    ExperimentConfig,
    ReferencePointError,
    find_reference_point,
    make_graph,
    run_experiment,
    run_rep,
)
from netheal.environment import Environment
from netheal.presets import generator_for, scenario_window
from netheal.topology import GeneratorKind, GeneratorParams

from oracles import flooding_rounds, from_nx


def cfg(**kw):
    base = dict(generator=generator_for("scale_free"), p_f=0.25, protocol="trickle",
                window=(3, 10, 16), reps=2, seed=5, similarity_every=0)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize("bad", [
    dict(window=(5, 3, 10)),
    dict(window=(0, 5)),
    dict(reps=0),
    dict(p_f=1.5),
    dict(k_agents=0),
    dict(similarity_every=-1),
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        cfg(**bad)


def test_scenario_window_has_25_failing_rounds():
    start, stop, end = scenario_window(13)
    assert (start, stop, end) == (13, 38, 63)
    assert sum(start <= r < stop for r in range(1, end + 1)) == 25


@pytest.mark.parametrize("protocol", ["all_info", "trickle", "mobile_agents"])
def test_replay_is_bit_identical(protocol):
    c = cfg(protocol=protocol, similarity_every=1)
    g = make_graph(c)
    a, b = run_rep(c, g, 1), run_rep(c, g, 1)
    assert a.series == b.series
    assert a.final_graph.same_as(b.final_graph)


def test_reps_use_distinct_subseeds():
    c = cfg(p_f=0.5)
    g = make_graph(c)
    assert run_rep(c, g, 0).seed == 5 and run_rep(c, g, 1).seed == 6
    assert run_rep(c, g, 0).series != run_rep(c, g, 1).series


def count_kills(monkeypatch):
    kills = []
    original = Environment.kill_node

    def counting(self, u):
        kills.append((self.round, u))
        return original(self, u)

    monkeypatch.setattr(Environment, "kill_node", counting)
    return kills


def test_failures_only_inside_window(monkeypatch):
    kills = count_kills(monkeypatch)
    c = cfg(p_f=0.5, window=(4, 8, 14))
    run_rep(c, make_graph(c), 0)
    assert kills
    assert all(4 <= r < 8 for r, _ in kills)


def test_failure_rate_matches_pf(monkeypatch):
    # all-info healing restores the population each round, so each round's draw sees the live set
    kills = count_kills(monkeypatch)
    c = ExperimentConfig(GeneratorParams(GeneratorKind.SMALL_WORLD, n=100, k=4, beta=0.3), p_f=0.3,
                         protocol="all_info", window=(0, 40, 40), reps=1, seed=3, similarity_every=0)
    res = run_rep(c, make_graph(c), 0)
    alive_before = [100] + [r.live_nodes for r in res.series[:-1]]
    expected = sum(0.3 * a for a in alive_before)
    sigma = sum(a * 0.3 * 0.7 for a in alive_before) ** 0.5
    assert abs(len(kills) - expected) < 3 * sigma


def test_live_plus_missing_equals_original():
    c = cfg(p_f=0.6, protocol="mobile_agents")
    g = make_graph(c)
    seen = []
    run_rep(c, g, 0, on_round=lambda env: seen.append(len(env.graph.adj) + len(env.missing_nodes())))
    assert set(seen) == {g.number_of_nodes()}


def test_messages_wait_one_round():
    c = cfg(p_f=0.0, window=(0, 0, 3))
    g = make_graph(c)
    pending = []
    run_rep(c, g, 0, on_round=lambda env: pending.append(sum(len(q) for q in env.post.queues.values())))
    # every delivered message is consumed in the round it arrives
    assert pending == [0, 0, 0]


def test_run_experiment_shape():
    series = run_experiment(cfg(reps=3))
    assert len(series) == 3
    assert [r.round for r in series[0]] == list(range(1, 17))


def test_path3_trickle_reference_point():
    g = from_nx(nx.path_graph(3))
    c = ExperimentConfig(GeneratorParams(GeneratorKind.EDGE_LIST, path="unused"), protocol="trickle",
                         window=(0, 0, 30), reps=5, seed=2)
    ref = find_reference_point(c, g)
    assert flooding_rounds(g) <= ref <= 4


def test_reference_point_requires_pf_zero():
    with pytest.raises(ConfigError):
        find_reference_point(cfg(p_f=0.1))


def test_reference_point_budget_exhausted():
    c = cfg(p_f=0.0, protocol="mobile_agents", window=(0, 0, 2), generator=generator_for("small_world"))
    with pytest.raises(ReferencePointError) as info:
        find_reference_point(c)
    assert len(info.value.series) == 2
