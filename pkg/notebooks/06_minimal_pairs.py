"""
Minimal pairs and the GenScore difference
=========================================

Two models are trained: one on attested NP order and one on a rare order.
Each scores both strings of every minimal pair.
"""

import random

from implang import ngram_lm as L
from implang import nptree as N
from implang.evaluate import minimal_pairs as G

ptb = N.CategoryMap.preset("ptb")
dets, adjs, nouns = ["the", "a", "this"], ["big", "red", "old", "small"], ["dog", "car", "tree", "house"]
rnd = random.Random(0)
trees = []
for _ in range(400):
    d, a, n = rnd.choice(dets), rnd.choice(adjs), rnd.choice(nouns)
    trees.append(N.parse_tree(f"(S (NP (DT {d}) (JJ {a}) (NN {n})) (VP (VBD stood)))"))

attested = [" ".join(t.leaves()) for t in trees]
unattested = [" ".join(N.reorder_np(t, N.NpPattern.parse("Nnda"), ptb).leaves()) for t in trees]
print(attested[0], "|", unattested[0])

m_att = L.train(attested[:300], order=3, unk_threshold=1)
m_unatt = L.train(unattested[:300], order=3, unk_threshold=1)

pairs = []
for i in range(300, 400):
    s_att, s_unatt = attested[i], unattested[i]
    pairs.append(G.MinimalPair(
        i, s_att, s_unatt,
        (L.score(m_att, s_att).logprob, L.score(m_att, s_unatt).logprob),
        (L.score(m_unatt, s_unatt).logprob, L.score(m_unatt, s_att).logprob),
    ))

res = G.genscore(pairs)
print(res.to_tsv())  # both models prefer their own order, so the difference is 0
