"""Scalar invariants of memoryless sources.

Every downstream constant is built from four numbers per source: the
entropy H, the coentropy J (equal to H for binary alphabets), the
collision probabilities rho(k), and the lattice period d_p of the
character log-probabilities.
"""

from triefringe import SourceDistribution

sources = {
    "binary symmetric": SourceDistribution((0.5, 0.5)),
    "binary 0.3/0.7": SourceDistribution((0.3, 0.7)),
    "uniform ternary": SourceDistribution.uniform(3),
    "dyadic (1/2,1/4,1/4)": SourceDistribution((0.5, 0.25, 0.25)),
    "binary 1/4,3/4": SourceDistribution((0.25, 0.75)),
}

print(f"{'source':22s} {'H':>9s} {'J':>9s} {'rho(2)':>9s} {'rho(5)':>9s} {'d_p':>9s}")
for name, d in sources.items():
    print(
        f"{name:22s} {d.entropy():9.6f} {d.coentropy():9.6f}"
        f" {d.rho(2):9.6f} {d.rho(5):9.6f} {d.periodicity():9.6f}"
    )

print()
print("d_p = log 2 marks a lattice source (all log p_a are multiples of log 2);")
print("d_p = 0 marks a dense group, e.g. log(1/4) / log(3/4) is irrational:")
print("  continued fraction of the ratio never terminates ->", SourceDistribution((0.25, 0.75)).periodicity())

print()
print("rho(k) is the probability that k independent keys share their first")
print("character; it decays geometrically:")
d = SourceDistribution((0.3, 0.7))
for k in range(1, 8):
    print(f"  rho({k}) = {d.rho(k):.6f}")
