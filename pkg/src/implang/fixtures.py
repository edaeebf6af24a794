"""Bundled and synthetic fixtures used by the tests and the notebooks."""

from __future__ import annotations

import gzip
from importlib import resources

import numpy as np

from .evaluate.separability import ATTESTED, IMPOSSIBLE, TrajectoryMatrix
from .rng import SplitMix64

CHECKPOINTS = tuple(range(100, 1300, 100))
SEEDS = (1, 2, 3)

# "She enjoyed the three fantastically interesting books a lot ." under the
# Penn Treebank tag set; "a lot" is an adverbial NP, not a plain NP
NP_EXAMPLE_TREE = (
    "(ROOT (S (NP (PRP She)) (VP (VBD enjoyed) (NP (DT the) (CD three) "
    "(ADJP (RB fantastically) (JJ interesting)) (NNS books)) (NP-ADV (DT a) (NN lot))) (. .)))"
)
NP_EXAMPLE_SENTENCE = "She enjoyed the three fantastically interesting books a lot ."
NP_EXAMPLE_EXPECTED = {
    "Nnda": "She enjoyed books three the fantastically interesting a lot .",
    "anNd": "She enjoyed fantastically interesting three books the a lot .",
    "daNn": "She enjoyed the fantastically interesting books three a lot .",
    "dnaN": "She enjoyed the three fantastically interesting books a lot .",
    "dnNa": "She enjoyed the three books fantastically interesting a lot .",
}


def natural_english() -> list[str]:
    """About 10k English sentences (150k word and punctuation tokens).

    Harvested from Python and scientific-library docstrings by
    ``tools/build_natural_fixture.py``; one pre-tokenized sentence per line.
    """
    raw = resources.files("implang").joinpath("data", "natural_en.txt.gz").read_bytes()
    return gzip.decompress(raw).decode("utf-8").splitlines()


def separable_trajectories(n_attested: int = 30, n_impossible: int = 30, seed: int = 2024) -> TrajectoryMatrix:
    """Perplexity-like learning curves, 12 checkpoints x 3 seeds.

    Attested curves start and end lower than impossible ones, with a gap
    wide enough that the classes are linearly separable.
    """
    rng = SplitMix64(seed)
    steps = np.array(CHECKPOINTS, dtype=float)
    rows, labels, langs, variants = [], [], [], []
    for cls, count, (lo, hi) in ((ATTESTED, n_attested, (20.0, 60.0)),
                                 (IMPOSSIBLE, n_impossible, (110.0, 220.0))):
        for i in range(count):
            floor = lo + (hi - lo) * rng.random()
            start = 800.0 + 400.0 * rng.random()
            decay = 250.0 + 150.0 * rng.random()
            feats = []
            for step in steps:
                base = floor + (start - floor) * np.exp(-(step - 100.0) / decay)
                for _ in SEEDS:
                    feats.append(base * (1.0 + 0.04 * (rng.random() - 0.5)))
            rows.append(feats)
            labels.append(cls)
            langs.append(f"l{len(langs):02d}")
            variants.append("identity" if cls == ATTESTED else f"impossible{i % 9}")
    columns = tuple(f"ppl@{c}_s{s}" for c in CHECKPOINTS for s in SEEDS)
    return TrajectoryMatrix(tuple(langs), tuple(variants), tuple(labels),
                            np.round(np.array(rows), 6), columns)
