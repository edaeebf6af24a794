import math

import pytest

from implang import ngram_lm as L
from implang.evaluate import minimal_pairs as G
from implang.errors import ArgumentError


def pair(i, att, unatt):
    return G.MinimalPair(i, f"the dog {i}", f"dog the {i}", att, unatt)


def test_hand_counted_fractions():
    pairs = [
        pair(0, (-1.0, -2.0), (-1.0, -2.0)),  # att yes, unatt yes
        pair(1, (-3.0, -2.0), (-1.0, -2.0)),  # att no, unatt yes
        pair(2, (-2.0, -2.0), (-5.0, -2.0)),  # att tie, unatt no
        pair(3, (-1.0, -4.0), (-2.0, -2.0)),  # att yes, unatt tie
    ]
    r = G.genscore(pairs)
    assert (r.genscore_att, r.genscore_unatt) == (0.5, 0.5)
    assert r.delta == 0.0
    assert r.indicators_att == (1, 0, 0, 1)
    assert r.indicators_unatt == (1, 1, 0, 0)
    assert (r.ties_att, r.ties_unatt) == (1, 1)


def test_non_finite_pairs_excluded():
    pairs = [pair(0, (-1.0, -2.0), (-3.0, -2.0)), pair(1, (-math.inf, -2.0), (-1.0, -2.0))]
    r = G.genscore(pairs)
    assert r.n == 1 and r.excluded == 1 and r.delta == 1.0


def test_empty_rejected():
    with pytest.raises(ArgumentError):
        G.genscore([])


def test_identical_strings_rejected():
    with pytest.raises(ArgumentError):
        G.MinimalPair(0, "a b", "a  b")


def test_antisymmetry_under_role_swap():
    pairs = [pair(0, (-1.0, -2.0), (-1.0, -3.0)), pair(1, (-2.0, -1.0), (-4.0, -3.0)),
             pair(2, (-1.0, -1.5), (-2.0, -1.0))]
    swapped = [G.MinimalPair(p.id, p.s_unatt, p.s_att, p.logp_unatt_model, p.logp_att_model)
               for p in pairs]
    assert G.genscore(swapped).delta == -G.genscore(pairs).delta


def test_attach_scores_joins_on_variant():
    pairs = [G.MinimalPair(7, "a b c", "b a c")]
    att = [L.ScoreRecord(7, "identity", -1.0, 4), L.ScoreRecord(7, "np:Nnda", -3.0, 4)]
    unatt = [L.ScoreRecord(7, "identity", -2.5, 4), L.ScoreRecord(7, "np:Nnda", -2.0, 4)]
    (p,) = G.attach_scores(pairs, att, unatt, "identity", "np:Nnda")
    assert p.logp_att_model == (-1.0, -3.0)
    assert p.logp_unatt_model == (-2.0, -2.5)
    assert G.genscore([p]).delta == 0.0
