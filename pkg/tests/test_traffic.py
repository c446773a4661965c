import random

import networkx as nx
import pytest

from adhocsim.radio import Position
from adhocsim.scenario import FlowSpec, NodeSpec, Scenario, paper_default
from adhocsim.sim import Simulation, run
from adhocsim.traffic import (DISCOVERING, Flow, MetricsLog, TrafficManager,
                              compute_network_lifetime, compute_node_lifetimes, record_snapshot)
from conftest import P, build_net, chain


def _manager(positions, energies=None, **flow_kw):
    net = build_net(positions, energies)
    flow = Flow(0, max(positions), **flow_kw)
    return net, flow, TrafficManager(net, [flow])


def test_inject_with_cached_route_sends_one_data_packet():
    net, flow, tm = _manager(chain(3))
    net.agent(0).cache.add([0, 1, 2])
    assert tm.inject_data(flow) == "sent"
    sends = [l for l in net.trace if " s DATA" in l]
    assert len(sends) == 1 and net.queue.peek().fire_at == pytest.approx(4.32e-3, abs=1e-12)
    assert flow.sent_seqs == {0: 1080}


def test_inject_without_route_starts_discovery():
    net, flow, tm = _manager(chain(3))
    assert tm.inject_data(flow) == "queued"
    assert flow.state == DISCOVERING
    assert any(" s RREQ" in l for l in net.trace)
    assert len(net.agent(0).buffer[2]) == 1


def test_inject_from_dead_source_kills_flow():
    net, flow, tm = _manager(chain(3))
    net.nodes[0].account.residual = 0.0
    assert tm.inject_data(flow) is None
    assert flow.state == "dead" and flow.injected == 0


def test_delivery_emits_ack_on_reversed_route():
    net, flow, tm = _manager(chain(3))
    net.agent(0).cache.add([0, 1, 2])
    tm.inject_data(flow)
    net.queue.run_until(0.04)
    acks = [l for l in net.trace if " s ACK" in l]
    assert acks[0].split()[1] == "2" and acks[0].endswith("2-1-0")
    assert flow.delivered == {0} and flow.acked == {0}


def test_duplicate_delivery_counted_once():
    net, flow, tm = _manager(chain(3))
    from adhocsim.packets import Data
    pkt = Data(route=(0, 1, 2), flow_seq=5, hop_index=2)
    tm.on_data_delivered(2, pkt)
    tm.on_data_delivered(2, pkt)
    assert flow.delivered == {5}
    assert sum(" s ACK" in l for l in net.trace) == 2


def test_dead_destination_gets_nothing():
    net, flow, tm = _manager(chain(3))
    net.nodes[2].account.residual = 0.0
    net.agent(0).cache.add([0, 1, 2])
    tm.inject_data(flow)
    net.queue.run_until(1.0)
    assert flow.delivered == set()


def test_initial_snapshot_matches_energy_assignment():
    sim = Simulation(paper_default())
    sim.traffic.start()
    sim.net.queue.run_until(0.0)
    first = {n: e for t, n, e in sim.traffic.log.snapshots if t == 0.0}
    assert first == {n: (20.0 if n % 2 == 0 else 10.0) for n in range(12)}


def test_snapshot_after_one_transmission():
    net = build_net(chain(3))
    net.agent(0).cache.add([0, 1, 2])
    net.agent(0).send_data(2, flow_seq=0)
    log = MetricsLog()
    record_snapshot(net, 0.0, log)
    assert log.snapshots[0] == (0.0, 0, pytest.approx(20.0 - 6.1776e-3, abs=1e-12))


def test_idle_only_snapshots_differ_by_sleep_power():
    net = build_net(chain(2))
    log = MetricsLog()
    record_snapshot(net, 0.0, log)
    net.queue.run_until(2.5)
    record_snapshot(net, 2.5, log)
    assert log.snapshots[0][2] - log.snapshots[2][2] == pytest.approx(0.045 * 2.5, abs=1e-12)


def test_lifetime_chain_cut_vertex():
    pos = {i: Position(200.0 * i, 0.0) for i in range(3)}
    lt = compute_network_lifetime([(1, 12.5)], pos, P, 0, 2, 60.0)
    assert (lt.value, lt.cause) == (12.5, "partition")


def test_lifetime_diamond_needs_both_relays_dead():
    pos = {0: (0.0, 150.0), 1: (200.0, 0.0), 2: (200.0, 300.0), 3: (400.0, 150.0)}
    lt = compute_network_lifetime([(1, 10.0), (2, 25.0)], pos, P, 0, 3, 60.0)
    assert (lt.value, lt.cause) == (25.0, "partition")


def test_lifetime_without_deaths_is_horizon():
    lt = compute_network_lifetime([], {0: (0, 0), 1: (100, 0)}, P, 0, 1, 60.0)
    assert (lt.value, lt.cause) == (60.0, "horizon")


def test_lifetime_replay_agrees_with_networkx():
    rng = random.Random(2)
    for _ in range(30):
        n = rng.randint(4, 12)
        pos = {i: (rng.uniform(0, 500), rng.uniform(0, 500)) for i in range(n)}
        deaths = [(i, round(rng.uniform(0, 70), 1)) for i in rng.sample(range(n), rng.randint(0, n))]
        lt = compute_network_lifetime(deaths, pos, P, 0, n - 1, 60.0)
        g = nx.Graph()
        g.add_nodes_from(pos)
        g.add_edges_from((u, v) for u in pos for v in pos
                         if u < v and ((pos[u][0] - pos[v][0]) ** 2 + (pos[u][1] - pos[v][1]) ** 2) <= 250 ** 2)
        expected = (60.0, "horizon")
        if not nx.has_path(g, 0, n - 1):
            expected = (0.0, "partition")
        else:
            for t in sorted({t for _, t in deaths if t <= 60.0}):
                h = g.subgraph([v for v in pos if all(not (d == v and dt <= t) for d, dt in deaths)])
                if 0 not in h or n - 1 not in h or not nx.has_path(h, 0, n - 1):
                    expected = (t, "partition")
                    break
        assert (lt.value, lt.cause) == expected


def test_node_lifetimes():
    log = MetricsLog(snapshots=[(0.0, 0, 20.0), (0.0, 1, 10.0), (31.0, 0, 19.0), (31.0, 1, 0.0)],
                     deaths=[(1, 31.0)])
    lives = compute_node_lifetimes(log)
    assert lives[1].death_time == 31.0
    assert lives[0].death_time is None and lives[0].final_residual == 19.0


def test_isolated_node_final_residual():
    nodes = (NodeSpec(0, 0, 0, 20.0), NodeSpec(1, 200, 0, 20.0), NodeSpec(2, 0, 500, 20.0))
    s = Scenario(nodes=nodes, flows=(FlowSpec(0, 1),), horizon=60.0, area=(300.0, 500.0))
    lives = compute_node_lifetimes(run(s, "dsr").log)
    assert lives[2].final_residual == pytest.approx(20.0 - 0.045 * 60.0, abs=1e-9)
    assert all(v.death_time is None for v in lives.values())


def test_delivered_never_exceeds_injected_and_matches_sizes():
    result = run(paper_default(seed=3), "dsr")
    flow = result.simulation.flows[0]
    assert len(flow.delivered) <= flow.injected
    assert all(flow.sent_seqs[s] == 1080 for s in flow.delivered)


def test_snapshot_series_non_increasing():
    result = run(paper_default(seed=4), "essdsr")
    last = {}
    for t, n, e in result.log.snapshots:
        assert e <= last.get(n, float("inf"))
        last[n] = e
