"""
Tokenizers and token counts per word
====================================

A small BPE vocabulary is trained on bundled English text and compared
with whitespace and character tokenizers.
"""

from implang import tokenize as T
from implang.fixtures import natural_english

text = natural_english()
train, held_out = text[:-500], text[-500:]

print("vocab heuristic for this corpus:", T.vocab_heuristic(train))

bpe = T.train_bpe(train, vocab_size=800)
print("first merges:", bpe.merges[:8])

seq = bpe.encode(held_out[0])
print(held_out[0])
print(seq.to_marked())  # word-initial units carry a mark
assert seq.detokenize() == held_out[0]

for name, tok in [("whitespace", T.whitespace_tokenizer()), ("bpe", bpe),
                  ("character", T.character_tokenizer())]:
    print(f"{name:>10}  TCW = {float(T.tcw(tok, held_out)):.3f}")
