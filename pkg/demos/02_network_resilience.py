"""Which pipes matter most?

We build a small looped network, then ask how its shortest-path structure
changes when single links fail.  Efficiency summarizes the change in one
number; the distance-distribution view (Wasserstein or JS between the
hop-count histograms before and after) says how the whole network shifts.
"""

from moeawst.graph import (
    NetworkGraph,
    centrality_report,
    edge_criticality_map,
    loss_of_efficiency,
    spectral_clustering,
    vulnerability_report,
)

# Two looped districts joined by a single main plus a long backup link.
west = [(0, 1), (1, 2), (2, 3), (3, 0), (1, 3), (2, 4), (4, 5), (5, 2)]
east = [(6, 7), (7, 8), (8, 9), (9, 6), (7, 9), (8, 10), (10, 11), (11, 8)]
g = NetworkGraph(12, west + east + [(3, 6), (5, 11)])

print("Centrality")
for name, value in centrality_report(g).as_rows():
    print(f"  {name:30s} {value:.4f}")

vul = vulnerability_report(g)
print(f"\nefficiency {vul.efficiency:.4f}, worst node-removal drop {vul.v_max:.3f}")
print(f"algebraic connectivity {vul.algebraic_connectivity:.4f}")

wst = edge_criticality_map(g, "wst")
ranked = sorted(wst.items(), key=lambda kv: -kv[1])
print("\nMost critical links by Wasserstein shift of the distance distribution")
for (u, v), score in ranked[:4]:
    print(f"  {u:2d}-{v:<2d}  W={score:.3f}  efficiency loss={loss_of_efficiency(g, [(u, v)]):.3f}")

both = [(3, 6), (5, 11)]
print(f"\nlosing both inter-district links: efficiency loss {loss_of_efficiency(g, both):.3f}")
print(f"after that, algebraic connectivity {vulnerability_report(g.without_edges(both)).algebraic_connectivity:.4f}")

print(f"\nspectral districts: {spectral_clustering(g, 2, seed=0)}")
