"""
Steering traffic away from a tired relay
========================================

Two disjoint two-hop paths join node 0 to node 3. Relay 1 starts with a
little more energy than relay 2, so the first discovery goes through it.
Once relay 1 drops to a fifth of its battery it announces itself, the source
learns about it through a route error, and the next discovery skips it.
"""

from adhocsim import Scenario
from adhocsim.scenario import FlowSpec, NodeSpec
from adhocsim.sim import Simulation

layout = {0: (0.0, 150.0), 1: (200.0, 0.0), 2: (200.0, 300.0), 3: (400.0, 150.0)}
energy = {0: 20.0, 1: 3.0, 2: 2.5, 3: 20.0}
scenario = Scenario(
    nodes=tuple(NodeSpec(n, x, y, energy[n]) for n, (x, y) in layout.items()),
    flows=(FlowSpec(0, 3),), area=(400.0, 300.0), horizon=12.0, name="diamond",
)

result = Simulation(scenario).run()

# the interesting part of the trace: control traffic and route changes
shown, last_route = 0, None
for line in result.trace:
    fields = line.split()
    kind = fields[3]
    if kind == "DATA" and fields[1] == "0" and fields[2] == "s":
        if fields[7] != last_route:
            last_route = fields[7]
            print(line, "  <- route in use")
    elif kind in ("LOW_ENERGY", "RERR") or (kind == "RREQ" and fields[1] == "0"):
        print(line)

print("low-energy nodes:", result.report.low_energy_nodes)
