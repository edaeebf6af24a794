"""
Reordering noun phrases
=======================

Determiner, number, adjective and noun children of every NP are rearranged
into a target order. Children outside those four categories keep their slot.
"""

from implang import nptree as N
from implang.fixtures import NP_EXAMPLE_TREE

tree = N.parse_tree(NP_EXAMPLE_TREE)
ptb = N.CategoryMap.preset("ptb")
print(" ".join(tree.leaves()))

# second column: (how common the order is across languages, allowed by theory)
for order in N.PATTERNS:
    out = N.reorder_np(tree, N.NpPattern.parse(order), ptb)
    typology, theory = N.ATTESTATION[order]
    print(f"{order:<6} {typology:<5} {theory:<4} {' '.join(out.leaves())}")

# random order: a seeded permutation of the words under classified children
for seed in (1, 2):
    out = N.reorder_np(tree, N.NpPattern.parse("random"), ptb, seed=seed)
    print(f"random seed={seed}: {' '.join(out.leaves())}")

# category maps are plain text, one section per category
print(N.CategoryMap.preset("vit").dumps())
