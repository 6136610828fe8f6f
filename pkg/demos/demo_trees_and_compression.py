"""Tries, patricia tries, prefix compression, and fringe subtrees.

Builds the five-key reference tree pair, prints both structures, and shows
that compressing the trie and building the patricia trie directly agree.
"""

from triefringe import (
    build_patricia,
    build_trie,
    compress,
    evaluate_additive,
    fringe,
    independence_number,
    matching_number,
    phi_geq,
    phi_k,
)

KEYS = ["1000", "1001", "1010", "1100", "1101"]


def render(tree):
    lines = []
    for path, node in sorted(tree.paths()):
        pad = "  " * len(path)
        label = "".join(map(str, node.prefix)) if getattr(node, "prefix", ()) else ""
        kind = f"leaf key={KEYS[node.key_index]}" if node.is_leaf else f"internal[{node.leaf_count} keys]"
        lines.append(f"{pad}{''.join(map(str, path)) or 'root'}: {kind}" + (f" prefix={label}" if label else ""))
    return "\n".join(lines)


trie = build_trie(KEYS, m=2)
pat = build_patricia(KEYS, m=2)

print("trie of", KEYS, f"({trie.node_count()} nodes, note the unary chain):")
print(render(trie))
print()
print(f"patricia trie ({pat.node_count()} nodes = 2*5-1, no unary nodes):")
print(render(pat))
print()
print("compress(trie) == build_patricia(keys):", compress(trie) == pat)

sub = fringe(pat, (1,))
print()
print("fringe at path '1' re-roots the subtree and clears its prefix:")
print(f"  {sub.leaf_count()} leaves, root prefix {sub.root.prefix!r}")

print()
print("additive functionals in one pass:")
print("  fringes with 2 keys   :", evaluate_additive(phi_k(2), pat))
print("  internal nodes (>=2)  :", evaluate_additive(phi_geq(2), pat))
print("  independence number   :", independence_number(pat))
print("  matching number       :", matching_number(pat))
