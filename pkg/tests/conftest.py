import random

import pytest

from adhocsim.dsr import DsrAgent, DsrConfig
from adhocsim.essdsr import EssdsrAgent, EssdsrConfig
from adhocsim.network import Network
from adhocsim.radio import RadioParams, in_range
from adhocsim.scenario import FlowSpec, NodeSpec, Scenario

P = RadioParams()


def build_net(positions, energies=None, protocol="dsr", seed=0, **config):
    energies = energies or {n: 20.0 for n in positions}
    net = Network(positions, energies, P, seed=seed)
    if protocol == "dsr":
        cfg = DsrConfig(**config)
        net.attach(lambda n, net: DsrAgent(n, net, cfg))
    else:
        cfg = EssdsrConfig(**config)
        net.attach(lambda n, net: EssdsrAgent(n, net, cfg))
    return net


def chain(n, spacing=200.0):
    return {i: (spacing * i, 0.0) for i in range(n)}


# two disjoint 2-hop paths 0-1-3 and 0-2-3; 1 and 2 are out of each other's range
DIAMOND = {0: (0.0, 150.0), 1: (200.0, 0.0), 2: (200.0, 300.0), 3: (400.0, 150.0)}


def diamond_scenario(protocol="essdsr", e1=3.0, e2=2.5, horizon=12.0, **kw):
    energies = {0: 20.0, 1: e1, 2: e2, 3: 20.0}
    nodes = tuple(NodeSpec(n, x, y, energies[n]) for n, (x, y) in DIAMOND.items())
    return Scenario(nodes=nodes, flows=(FlowSpec(0, 3),), area=(400.0, 300.0),
                    horizon=horizon, protocol=protocol, name="diamond", **kw)


def adjacency(positions):
    return {u: {v for v in positions if v != u and in_range(positions[u], positions[v], P)}
            for u in positions}


def is_connected(positions):
    adj = adjacency(positions)
    start = next(iter(positions))
    seen, stack = {start}, [start]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(positions)


def random_connected_positions(rng: random.Random, max_nodes=8, side=600.0):
    while True:
        n = rng.randint(3, max_nodes)
        pos = {i: (rng.uniform(0, side), rng.uniform(0, side)) for i in range(n)}
        if is_connected(pos):
            return pos


def simple_paths(adj, s, t):
    """Every loop-free path from s to t, by exhaustive depth-first enumeration."""
    out, path = [], [s]

    def walk(u):
        if u == t:
            out.append(tuple(path))
            return
        for v in sorted(adj[u]):
            if v not in path:
                path.append(v)
                walk(v)
                path.pop()

    walk(s)
    return out


@pytest.fixture
def diamond():
    return diamond_scenario


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
