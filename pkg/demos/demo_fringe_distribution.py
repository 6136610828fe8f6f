"""Limit distribution of fringe-tree sizes in a random patricia trie.

The proportion of nodes whose subtree holds k keys converges (up to tiny
oscillations) to (1 - rho(k)) / ((J + H) k (k-1)); for binary alphabets
J = H.  A single large simulation reproduces the first masses to a few
tenths of a percent.
"""

from triefringe import SourceDistribution, fringe_limit
from triefringe.simulation import SimulationConfig, fringe_distribution

for name, d in (("binary symmetric", SourceDistribution((0.5, 0.5))),
                ("uniform ternary", SourceDistribution.uniform(3))):
    cfg = SimulationConfig.fixed(d, 50_000, 40, 20240808, (), histogram_kmax=16)
    fd = fringe_distribution(cfg)
    print(f"{name}: n = 50000, {fd.replicates} replicates")
    print(f"  leaf mass: {fd.leaf_mass_mean:.6f}")
    print(f"  {'k':>3s} {'empirical':>10s} {'limit':>10s}")
    for k in range(2, 9):
        print(f"  {k:3d} {fd.mass(k):10.6f} {fringe_limit(d, k):10.6f}")
    print()

print("masses decay like 1/k^2; every node is either a leaf or the root of")
print("a fringe with k >= 2 keys, so the masses plus the leaf mass sum to 1.")
