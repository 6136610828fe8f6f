"""The exact law of a random k-key patricia trie.

The probability that k i.i.d. keys produce a given shape T is

    P(T) = k! * prod_{leaves} p_path * prod_{internal w} 1/(1 - rho(k_w)),

and conditioned on the shape, each node's common prefix is an independent
string with a Geom_0(1 - rho(k_w)) length.  Both statements are checked
against simulation here.
"""

import math

import numpy as np

from triefringe import SourceDistribution, enumerate_patricia_shapes, shape_probability, shape_string
from triefringe.simulation import sample_patricia_roots

d = SourceDistribution((0.5, 0.5))
k, reps = 4, 50_000

shapes = enumerate_patricia_shapes(k, 2)
print(f"all {len(shapes)} patricia shapes with {k} keys, binary symmetric source:")
idx, prefix_len = sample_patricia_roots(d, k, reps, master_seed=20240808, shapes=shapes)
for j, s in enumerate(shapes):
    p = shape_probability(s, d)
    freq = float(np.mean(idx == j))
    se = math.sqrt(p * (1 - p) / reps)
    print(f"  {shape_string(s):28s} exact {p:.4f}   MC {freq:.4f} ({(freq - p) / se:+.2f} se)")
print(f"  total exact mass: {sum(shape_probability(s, d) for s in shapes):.12f}")

q = 1 - d.rho(k)
print()
print(f"root prefix length vs Geom_0(1-rho({k})) = Geom_0({q:.4f}):")
for ell in range(4):
    emp = float(np.mean(prefix_len == ell))
    print(f"  P(len={ell}): empirical {emp:.4f}   exact {(1 - q) ** ell * q:.4f}")
