"""Sequence-level impossible-language perturbations and their inverses.

Every perturbation is a permutation of the content units of a sentence.
Except for ``shuffle_nondeterministic``, each permutation depends only on
the spec and the sequence length, so it can be undone exactly.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

from .corpus import ParallelCorpus
from .errors import ArgumentError, UnsupportedRecoveryError
from .rng import (
    DOMAIN_SHUFFLE_DETERMINISTIC,
    DOMAIN_SHUFFLE_LOCAL,
    DOMAIN_SHUFFLE_NONDETERMINISTIC,
    inverse,
    keyed_permutation,
)
from .tokenize import BOS, EOS, TokenSequence, Tokenizer, detokenize_marked

log = logging.getLogger(__name__)

IDENTITY = "identity"
REVERSE_FULL = "reverse_full"
SHUFFLE_LOCAL = "shuffle_local"
SHUFFLE_EVEN_ODD = "shuffle_even_odd"
SHUFFLE_DETERMINISTIC = "shuffle_deterministic"
SHUFFLE_NONDETERMINISTIC = "shuffle_nondeterministic"

KINDS = (
    IDENTITY,
    REVERSE_FULL,
    SHUFFLE_LOCAL,
    SHUFFLE_EVEN_ODD,
    SHUFFLE_DETERMINISTIC,
    SHUFFLE_NONDETERMINISTIC,
)
SEEDED_KINDS = (SHUFFLE_LOCAL, SHUFFLE_DETERMINISTIC, SHUFFLE_NONDETERMINISTIC)

WORD_UNIT = "word"
TOKEN_UNIT = "token"


def default_unit(kind: str) -> str:
    return WORD_UNIT if kind in (IDENTITY, REVERSE_FULL) else TOKEN_UNIT


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    window: int | None = None
    seed: int = 0
    unit: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown perturbation {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        if self.kind == SHUFFLE_LOCAL:
            if self.window is None or self.window < 1:
                raise ArgumentError("shuffle_local needs a window w >= 1")
        elif self.window is not None:
            raise ArgumentError(f"window only applies to shuffle_local, not {self.kind}")
        if self.seed and self.kind not in SEEDED_KINDS:
            raise ArgumentError(f"seed only applies to shuffle kinds, not {self.kind}")
        if self.unit is None:
            object.__setattr__(self, "unit", default_unit(self.kind))
        if self.unit not in (WORD_UNIT, TOKEN_UNIT):
            raise ArgumentError(f"unit must be word or token, got {self.unit!r}")

    @property
    def recoverable(self) -> bool:
        return self.kind != SHUFFLE_NONDETERMINISTIC

    def __str__(self) -> str:
        return format_spec(self)

    @classmethod
    def parse(cls, text: str) -> "PerturbationSpec":
        return parse_spec(text)


def parse_spec(text: str) -> PerturbationSpec:
    """Parse ``kind[:key=value...]`` with keys ``w``, ``s`` and ``unit``."""
    kind, *params = text.strip().split(":")
    kwargs: dict = {}
    for p in params:
        key, sep, value = p.partition("=")
        if not sep:
            raise ArgumentError(f"bad parameter {p!r} in perturbation {text!r}")
        try:
            if key == "w":
                kwargs["window"] = int(value)
            elif key == "s":
                kwargs["seed"] = int(value)
            elif key == "unit":
                kwargs["unit"] = value
            else:
                raise ArgumentError(f"unknown parameter {key!r} in perturbation {text!r}")
        except ValueError as exc:
            if isinstance(exc, ArgumentError):
                raise
            raise ArgumentError(f"bad value for {key!r} in perturbation {text!r}") from None
    return PerturbationSpec(kind, **kwargs)


def format_spec(spec: PerturbationSpec) -> str:
    parts = [spec.kind]
    if spec.kind == SHUFFLE_LOCAL:
        parts.append(f"w={spec.window}")
    if spec.kind in (SHUFFLE_DETERMINISTIC, SHUFFLE_NONDETERMINISTIC) or (
        spec.kind == SHUFFLE_LOCAL and spec.seed
    ):
        parts.append(f"s={spec.seed}")
    if spec.unit != default_unit(spec.kind):
        parts.append(f"unit={spec.unit}")
    return ":".join(parts)


# -- permutations --------------------------------------------------------

def _local_permutation(n: int, w: int, seed: int) -> list[int]:
    perm = []
    for widx, start in enumerate(range(0, n, w)):
        length = min(w, n - start)
        if w == 2:
            block = [1, 0] if length == 2 else [0]
        else:
            block = keyed_permutation(length, DOMAIN_SHUFFLE_LOCAL, seed, length, widx)
        perm.extend(start + k for k in block)
    return perm


def permutation_for(spec: PerturbationSpec, n: int, sentence_id: int = 0) -> list[int]:
    """Index permutation ``perm`` with ``out[k] = seq[perm[k]]``."""
    if spec.kind == SHUFFLE_NONDETERMINISTIC:
        return keyed_permutation(n, DOMAIN_SHUFFLE_NONDETERMINISTIC, spec.seed, sentence_id)
    return list(_length_keyed(spec, n, False))


@lru_cache(maxsize=8192)
def _length_keyed(spec: PerturbationSpec, n: int, invert: bool) -> tuple[int, ...]:
    # everything except the nondeterministic shuffle depends on (spec, n) only
    if invert:
        return tuple(inverse(list(_length_keyed(spec, n, False))))
    return tuple(_fixed_permutation(spec, n))


def _fixed_permutation(spec: PerturbationSpec, n: int) -> list[int]:
    kind = spec.kind
    if kind == IDENTITY:
        return list(range(n))
    if kind == REVERSE_FULL:
        return list(range(n - 1, -1, -1))
    if kind == SHUFFLE_EVEN_ODD:
        return list(range(0, n, 2)) + list(range(1, n, 2))
    if kind == SHUFFLE_LOCAL:
        return _local_permutation(n, spec.window, spec.seed)
    if kind == SHUFFLE_DETERMINISTIC:
        return keyed_permutation(n, DOMAIN_SHUFFLE_DETERMINISTIC, spec.seed, n)
    raise AssertionError(kind)


def _content_bounds(units) -> tuple[int, int]:
    lo, hi = 0, len(units)
    if hi and units[0] == BOS:
        lo = 1
    if hi > lo and units[hi - 1] == EOS:
        hi -= 1
    return lo, hi


def _permute(seq, perm, lo):
    return [seq[lo + p] for p in perm]


def _reorder(spec, seq, sentence_id, invert):
    if isinstance(seq, TokenSequence):
        units = seq.units
    else:
        units = tuple(seq)
    lo, hi = _content_bounds(units)
    if spec.kind == SHUFFLE_NONDETERMINISTIC:
        perm = permutation_for(spec, hi - lo, sentence_id)
    else:
        perm = _length_keyed(spec, hi - lo, invert)
    new_units = units[:lo] + tuple(_permute(units, perm, lo)) + units[hi:]
    if not isinstance(seq, TokenSequence):
        return list(new_units)
    word_map = seq.word_map
    if word_map is not None:
        word_map = word_map[:lo] + tuple(_permute(word_map, perm, lo)) + word_map[hi:]
    return TokenSequence(new_units, seq.kind, word_map)


def apply(spec: PerturbationSpec, seq, sentence_id: int = 0):
    """Perturb a sequence of units.

    ``seq`` may be a :class:`TokenSequence` (word map is permuted along) or a
    plain list of strings. Leading ``<s>`` and trailing ``</s>`` stay put.
    ``sentence_id`` only matters for ``shuffle_nondeterministic``.
    """
    return _reorder(spec, seq, sentence_id, invert=False)


def recover(spec: PerturbationSpec, seq, sentence_id: int = 0):
    if not spec.recoverable:
        raise UnsupportedRecoveryError(f"{spec.kind} has no inverse")
    return _reorder(spec, seq, sentence_id, invert=True)


# -- corpora -------------------------------------------------------------

def _units_for(spec: PerturbationSpec, text: str, tokenizer: Tokenizer | None) -> TokenSequence:
    if spec.unit == WORD_UNIT:
        return TokenSequence.from_words(text)
    return tokenizer.encode(text)


def perturb_text(spec: PerturbationSpec, text: str, tokenizer: Tokenizer | None = None,
                 sentence_id: int = 0) -> str:
    """Perturb one sentence.

    Word-unit output is space-joined words. Token-unit output is the
    ``▁``-marked unit serialization, so the units survive a round trip
    through a text file.
    """
    seq = _units_for(spec, text, tokenizer)
    if spec.unit == WORD_UNIT:
        return " ".join(apply(spec, seq, sentence_id).units)
    # marks are attached before permuting so they travel with their unit
    return " ".join(apply(spec, seq.marked_units(), sentence_id))


def recover_text(spec: PerturbationSpec, text: str, sentence_id: int = 0) -> str:
    if spec.unit == WORD_UNIT:
        return " ".join(recover(spec, text.split(), sentence_id))
    units = recover(spec, text.split(), sentence_id)
    return detokenize_marked(" ".join(units))


def _perturb_chunk(args):
    spec, tokenizer, items = args
    return [(i, perturb_text(spec, t, tokenizer, i)) for i, t in items]


def perturb_corpus(spec: PerturbationSpec, corpus: ParallelCorpus, lang: str,
                   tokenizer: Tokenizer | None = None, workers: int = 1) -> ParallelCorpus:
    if lang not in corpus.languages:
        raise ArgumentError(f"language {lang!r} not in corpus {list(corpus.languages)}")
    if spec.kind == IDENTITY and spec.unit == WORD_UNIT:
        return corpus
    if spec.unit == TOKEN_UNIT and tokenizer is None:
        raise ArgumentError(f"{format_spec(spec)} works on tokens and needs a tokenizer")
    items = [(r.id, r.text) for r in corpus.records[lang]]
    if workers > 1 and len(items) > 1000:
        size = -(-len(items) // (workers * 4))
        chunks = [(spec, tokenizer, items[k:k + size]) for k in range(0, len(items), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [pair for chunk in pool.map(_perturb_chunk, chunks) for pair in chunk]
    else:
        results = _perturb_chunk((spec, tokenizer, items))
    return corpus.replace_texts(lang, dict(results))


def recover_corpus(spec: PerturbationSpec, corpus: ParallelCorpus, lang: str) -> ParallelCorpus:
    if spec.kind == IDENTITY and spec.unit == WORD_UNIT:
        return corpus
    texts = {r.id: recover_text(spec, r.text, r.id) for r in corpus.records[lang]}
    return corpus.replace_texts(lang, texts)


def with_unit(spec: PerturbationSpec, unit: str) -> PerturbationSpec:
    return replace(spec, unit=unit)
