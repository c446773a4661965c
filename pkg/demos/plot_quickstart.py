"""
Running a single simulation
===========================

Simulate the built-in twelve node grid with one protocol and look at the
network lifetime, the packet counters and who ran out of energy.
"""

from adhocsim import paper_default, run

scenario = paper_default(protocol="dsr", seed=1)
result = run(scenario)
report = result.report

print(f"{report.protocol}: lifetime {report.network_lifetime:.3f} s ({report.lifetime_cause})")
print("deaths:", report.death_times or "none")

# per packet kind: transmissions, receptions, drops
for kind, counts in report.packet_counters.items():
    print(f"{kind:10s} {counts}")

# the trace is plain text, one event per line
print(*result.trace[:8], sep="\n")
