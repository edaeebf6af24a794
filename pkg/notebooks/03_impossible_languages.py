"""
Sequence perturbations
======================

Each perturbation is an index permutation. The deterministic ones depend
only on the sentence length, so applying the inverse recovers the input.
"""

from implang import perturb as P
from implang import tokenize as T

words = "the quick brown fox jumps over the lazy dog today".split()

for text in ["identity", "reverse_full", "shuffle_even_odd", "shuffle_local:w=2",
             "shuffle_local:w=3", "shuffle_deterministic:s=21", "shuffle_nondeterministic:s=21"]:
    spec = P.parse_spec(text)
    out = P.apply(spec, words, sentence_id=0)
    tag = "recoverable" if spec.recoverable else "not recoverable"
    print(f"{P.format_spec(spec):<32} {' '.join(out)}   [{tag}]")
    if spec.recoverable:
        assert P.recover(spec, out) == words

# same length, same permutation
spec = P.parse_spec("shuffle_deterministic:s=84")
print(P.permutation_for(spec, 5), P.permutation_for(spec, 5))

# boundary markers stay where they are
print(P.apply(P.parse_spec("reverse_full"), [T.BOS, "a", "b", "c", T.EOS]))

# subword units: marks travel with their units, so the text can be rebuilt
bpe = T.train_bpe(["lower lowest newer newest wider widest"] * 4, vocab_size=30)
spec = P.parse_spec("reverse_full:unit=token")
scrambled = P.perturb_text(spec, "newest lower widest", bpe)
print(scrambled, "->", P.recover_text(spec, scrambled))
