"""
Who wins the route request race
===============================

ESSDSR holds each rebroadcast of a route request for 1/(100 E) seconds, E
being the node's residual energy in joules. Copies through well charged
relays arrive first and the destination answers only the first one.
"""

from adhocsim import energy_jitter
from adhocsim.dsr import select_route
from adhocsim.essdsr import EssdsrAgent, EssdsrConfig
from adhocsim.network import Network
from adhocsim.radio import RadioParams

for joules in (0.5, 1, 2, 5, 10, 20):
    print(f"{joules:5.1f} J -> {1e3 * energy_jitter(joules):6.3f} ms")

# a ladder: 0 -> {1, 2} -> {3, 4} -> 5
positions = {0: (0, 100), 1: (200, 0), 2: (200, 200), 3: (400, 0), 4: (400, 200), 5: (600, 100)}
for energies in ({1: 20, 2: 5, 3: 20, 4: 5}, {1: 5, 2: 20, 3: 5, 4: 20}):
    energies = {0: 20, 5: 20, **energies}
    net = Network(positions, energies, RadioParams(), seed=0)
    net.attach(lambda n, net: EssdsrAgent(n, net, EssdsrConfig()))
    net.agent(0).initiate_route_discovery(5)
    net.queue.run_until(0.5)
    print(energies, "->", select_route(net.agent(0).cache, 5))
