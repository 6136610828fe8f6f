"""The independence number of a random patricia trie.

A node is essential exactly when none of its children is essential, and
the independence number alpha(T) equals the number of essential nodes.
For the binary symmetric source the essential-root probabilities alpha_n
satisfy a Binomial-split recursion whose partial sums enclose the limit
ratio of essential nodes rigorously.
"""

import math

from triefringe.asymptotics import indnum_alphas, indnum_mean_bounds
from triefringe.simulation import estimate_root_essential
from triefringe.source import SourceDistribution

d = SourceDistribution((0.5, 0.5))

alphas = indnum_alphas(1000)
print("essential-root probabilities alpha_n = P(root of P_n is essential):")
print(f"  {'n':>5s} {'alpha_n':>10s} {'MC':>10s}")
for n in (2, 3, 4, 5, 8, 12):
    est, se = estimate_root_essential(d, n, 30_000, 20240808 + n)
    print(f"  {n:5d} {alphas[n]:10.6f} {est:10.6f} (+-{se:.4f})")
print("  alpha_4 = 3/7 =", 3 / 7)

print()
print("alpha_n oscillates without converging (period log 2 in log n):")
for n in (64, 91, 128, 181, 256, 362, 512, 724):
    print(f"  n = {n:4d}: alpha_n = {alphas[n]:.6f}")

print()
print("rigorous enclosure of the limiting essential-node ratio")
print("(counting only essential nodes with at most N keys below them):")
for N in (100, 800, 5000):
    a = indnum_alphas(N)
    lo, hi = indnum_mean_bounds(N, a)
    print(f"  N = {N:5d}: ({lo:.5f}, {hi:.5f})  width {hi - lo:.2e} <= 1/(2 N log 2) = {1 / (2 * N * math.log(2)):.2e}")
print("about 60.3% of all nodes are essential; the matching number is the")
print("complementary share, node count minus the independence number.")
