"""
Residual energy under DSR and ESSDSR
====================================

Run both protocols on the same scenario and seed, then tabulate the energy
left in every node at the end. With matplotlib installed the table is also
drawn as a grouped bar chart.
"""

from adhocsim import compare, paper_default

comparison = compare(paper_default(seed=1))
print(f"dsr lifetime    {comparison.dsr.report.network_lifetime:.3f} s")
print(f"essdsr lifetime {comparison.essdsr.report.network_lifetime:.3f} s")

print("node      dsr   essdsr    delta")
for node, dsr, ess, delta in comparison.residual_deltas():
    print(f"{node:4d} {dsr:8.3f} {ess:8.3f} {delta:+8.3f}")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    rows = comparison.residual_deltas()
    xs = [r[0] for r in rows]
    plt.bar([x - 0.2 for x in xs], [r[1] for r in rows], width=0.4, label="DSR")
    plt.bar([x + 0.2 for x in xs], [r[2] for r in rows], width=0.4, label="ESSDSR")
    plt.xlabel("node")
    plt.ylabel("residual energy (J)")
    plt.legend()
    plt.show()
