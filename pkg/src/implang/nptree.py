"""Bracketed constituency trees and Universal-20 NP reordering.

NP children are classified as determiner (``D``), number (``n``), adjective
(``A``) or noun (``N``) by their root label, using a per-treebank
:class:`CategoryMap`. A pattern such as ``dnNa`` then rewrites the slots
held by classified children in pattern order; everything else stays where
it was.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import TEST, ParallelCorpus
from .errors import AlignmentError, ArgumentError, DataError, FormatError, TreeParseError
from .rng import DOMAIN_NP_RANDOM, keyed_permutation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple["Tree", ...] = ()
    word: str | None = None

    def __post_init__(self):
        if (self.word is None) == (not self.children):
            raise ArgumentError("a node has either children or a leaf word, not both")

    @property
    def is_leaf(self) -> bool:
        return self.word is not None

    def leaves(self) -> list[str]:
        if self.word is not None:
            return [self.word]
        out: list[str] = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def __str__(self) -> str:
        if self.word is not None:
            return f"({self.label} {self.word})"
        inner = " ".join(str(c) for c in self.children)
        return f"({self.label} {inner})" if self.label else f"( {inner})"


def _tokens(line: str):
    i, n = 0, len(line)
    while i < n:
        c = line[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c, i
            i += 1
        else:
            j = i
            while j < n and not line[j].isspace() and line[j] not in "()":
                j += 1
            yield line[i:j], i
            i = j


def parse_tree(line: str) -> Tree:
    """Parse one bracketed tree such as ``(NP (DT the) (NN cat))``.

    An unlabeled outermost bracket, as in ``( (S ...))``, is accepted.
    """
    toks = list(_tokens(line))
    if not toks:
        raise TreeParseError("empty input", 0)
    pos = 0

    def node() -> Tree:
        nonlocal pos
        tok, off = toks[pos]
        if tok != "(":
            raise TreeParseError(f"expected '(' but found {tok!r}", off)
        pos += 1
        if pos >= len(toks):
            raise TreeParseError("unbalanced brackets", len(line))
        label = ""
        tok, off_label = toks[pos]
        if tok not in "()":
            label = tok
            pos += 1
        if pos >= len(toks):
            raise TreeParseError("unbalanced brackets", len(line))
        tok, off2 = toks[pos]
        if tok == ")":
            raise TreeParseError("empty node", off)
        if tok != "(":
            word = tok
            pos += 1
            if pos >= len(toks):
                raise TreeParseError("unbalanced brackets", len(line))
            tok, off3 = toks[pos]
            if tok != ")":
                raise TreeParseError("leaf with children", off3)
            pos += 1
            if not label:
                raise TreeParseError("leaf without label", off)
            return Tree(label, (), word)
        children = []
        while True:
            if pos >= len(toks):
                raise TreeParseError("unbalanced brackets", len(line))
            tok, off4 = toks[pos]
            if tok == ")":
                pos += 1
                break
            if tok != "(":
                raise TreeParseError("leaf with children", off4)
            children.append(node())
        return Tree(label, tuple(children))

    tree = node()
    if pos != len(toks):
        raise TreeParseError("trailing material after tree", toks[pos][1])
    return tree


# -- category maps -------------------------------------------------------

CATEGORIES = ("det", "num", "adj", "noun")
SYMBOLS = {"D": "det", "n": "num", "A": "adj", "N": "noun"}
PRESETS = ("ptb", "vit", "ctb", "cintil")
PRESET_LANGUAGE = {"en": "ptb", "it": "vit", "zh": "ctb", "pt": "cintil"}


def norm_label(label: str) -> str:
    return label.upper()


@dataclass(frozen=True)
class CategoryMap:
    det: frozenset[str]
    num: frozenset[str]
    adj: frozenset[str]
    noun: frozenset[str]
    np_labels: frozenset[str]

    def __post_init__(self):
        for name in (*CATEGORIES, "np_labels"):
            object.__setattr__(self, name, frozenset(norm_label(x) for x in getattr(self, name)))
        for i, a in enumerate(CATEGORIES):
            for b in CATEGORIES[i + 1:]:
                overlap = getattr(self, a) & getattr(self, b)
                if overlap:
                    raise ArgumentError(f"category sets {a} and {b} overlap on {sorted(overlap)}")

    def category(self, label: str) -> str | None:
        lab = norm_label(label)
        for name in CATEGORIES:
            if lab in getattr(self, name):
                return name
        return None

    def is_np(self, label: str) -> bool:
        return norm_label(label) in self.np_labels

    @classmethod
    def parse(cls, text: str, source="<string>") -> "CategoryMap":
        sections: dict[str, set[str]] = {}
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                name = line[1:].strip().lower()
                if name not in (*CATEGORIES, "np"):
                    raise FormatError(f"unknown section {line!r}", source, lineno)
                current = name
                sections.setdefault(name, set())
                continue
            if current is None:
                raise FormatError("label before any section header", source, lineno)
            sections[current].add(line)
        missing = [s for s in ("np", *CATEGORIES) if s not in sections]
        if missing:
            raise FormatError(f"missing sections {missing}", source)
        return cls(
            det=sections["det"], num=sections["num"], adj=sections["adj"],
            noun=sections["noun"], np_labels=sections["np"],
        )

    @classmethod
    def load(cls, path) -> "CategoryMap":
        return cls.parse(Path(path).read_text(encoding="utf-8"), path)

    @classmethod
    def preset(cls, name: str) -> "CategoryMap":
        name = PRESET_LANGUAGE.get(name, name)
        if name not in PRESETS:
            raise ArgumentError(f"unknown category map preset {name!r}; choose from {PRESETS}")
        text = resources.files("implang").joinpath("category_maps", f"{name}.txt").read_text("utf-8")
        return cls.parse(text, name)

    def dumps(self) -> str:
        out = []
        for name in ("np", *CATEGORIES):
            labels = self.np_labels if name == "np" else getattr(self, name)
            out.append(f"#{name}")
            out.extend(sorted(labels))
        return "\n".join(out) + "\n"


# -- patterns ------------------------------------------------------------

RANDOM = "random"
PATTERNS = ("Nnda", "anNd", "daNn", "dnaN", "dnNa")
# per order: (how widespread across languages, allowed by theory)
ATTESTATION = {
    "Nnda": ("no", "no"),
    "anNd": ("no", "no"),
    "daNn": ("few", "yes"),
    "dnaN": ("many", "yes"),
    "dnNa": ("many", "yes"),
    RANDOM: ("no", "no"),
}


@dataclass(frozen=True)
class NpPattern:
    """An order over the four categories, or the random control.

    ``order`` is a 4-letter string over ``d n a N`` (case-sensitive for the
    two ``n``s: lower ``n`` is number, upper ``N`` is noun), e.g. ``"dnNa"``.
    """

    order: str

    def __post_init__(self):
        if self.order == RANDOM:
            return
        normalized = "".join({"d": "D", "a": "A"}.get(c, c) for c in self.order)
        if sorted(normalized) != sorted("DnAN"):
            raise ArgumentError(f"pattern {self.order!r} must use each of d, n, a, N once")

    @property
    def is_random(self) -> bool:
        return self.order == RANDOM

    def rank(self) -> dict[str, int]:
        sym = {"d": "det", "D": "det", "n": "num", "a": "adj", "A": "adj", "N": "noun"}
        return {sym[c]: i for i, c in enumerate(self.order)}

    def __str__(self) -> str:
        return f"np:{self.order}"

    @classmethod
    def parse(cls, text: str) -> "NpPattern":
        text = text.strip()
        if text.startswith("np:"):
            text = text[3:]
        if text in ("random", "np_random"):
            return cls(RANDOM)
        if text.startswith("perturb_"):
            text = text[len("perturb_"):]
        return cls(text)


def reorder_np(tree: Tree, pattern: NpPattern, cmap: CategoryMap, seed: int = 0,
               sentence_id: int = 0) -> Tree:
    """Rewrite every NP of ``tree`` bottom-up.

    Pattern case: classified children are stably sorted by pattern rank and
    written back into the slots classified children occupied, as whole
    subtrees. Random case: the leaf words under classified children are
    permuted across their own leaf slots, keyed by ``(seed, sentence_id,
    np_index)`` where NPs are numbered in post-order.
    """
    counter = [0]
    rank = None if pattern.is_random else pattern.rank()

    def visit(node: Tree) -> Tree:
        if node.is_leaf:
            return node
        children = tuple(visit(c) for c in node.children)
        if not cmap.is_np(node.label):
            return node if children == node.children else Tree(node.label, children)
        np_index = counter[0]
        counter[0] += 1
        cats = [cmap.category(c.label) for c in children]
        slots = [i for i, cat in enumerate(cats) if cat is not None]
        if len(slots) < 2 and rank is not None:
            return Tree(node.label, children)
        if rank is not None:
            ordered = sorted(slots, key=lambda i: (rank[cats[i]], i))
            new = list(children)
            for slot, src in zip(slots, ordered):
                new[slot] = children[src]
            return Tree(node.label, tuple(new))
        words = [w for i in slots for w in children[i].leaves()]
        perm = keyed_permutation(len(words), DOMAIN_NP_RANDOM, seed, sentence_id, np_index)
        it = iter(words[p] for p in perm)
        new = list(children)
        for i in slots:
            new[i] = _refill(children[i], it)
        return Tree(node.label, tuple(new))

    return visit(tree)


def _refill(node: Tree, words) -> Tree:
    if node.is_leaf:
        return Tree(node.label, (), next(words))
    return Tree(node.label, tuple(_refill(c, words) for c in node.children))


# -- corpora -------------------------------------------------------------

def read_trees(path) -> list[Tree | None]:
    """One tree per line; unparseable lines come back as ``None``."""
    trees: list[Tree | None] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                trees.append(parse_tree(line))
            except TreeParseError as exc:
                log.warning("%s:%d: %s", path, lineno, exc)
                trees.append(None)
    return trees


def trees_by_id(corpus: ParallelCorpus, lang: str, trees: list) -> dict[int, Tree | None]:
    """Pair a tree file (line order = ascending id) with corpus ids."""
    ids = sorted(corpus.ids)
    if len(trees) != len(ids):
        raise AlignmentError(f"{len(trees)} trees for {len(ids)} corpus records")
    return dict(zip(ids, trees))


def perturb_np_corpus(corpus: ParallelCorpus, lang: str, trees: Mapping[int, Tree | None],
                      pattern: NpPattern, cmap: CategoryMap,
                      seed: int = 0) -> tuple[ParallelCorpus, list[int]]:
    """Replace ``lang`` texts by their reordered leaves.

    Returns the new corpus and the ids that were skipped (missing tree or
    leaves not matching the record's words). Skipped records keep their
    original text so alignment and ids are untouched.
    """
    texts = {}
    skipped = []
    for r in corpus.records[lang]:
        tree = trees.get(r.id)
        if tree is None or tree.leaves() != r.text.split():
            skipped.append(r.id)
            continue
        texts[r.id] = " ".join(reorder_np(tree, pattern, cmap, seed, r.id).leaves())
    if skipped:
        log.warning("perturb_np_corpus: skipped %d records with missing or mismatched trees", len(skipped))
    return corpus.replace_texts(lang, texts), skipped


def extract_minimal_pairs(attested: ParallelCorpus, perturbed: ParallelCorpus, lang: str,
                          split: str | None = TEST):
    """Minimal pairs for ids whose word sequence changed.

    Pairs come back in id order; ``split=None`` takes every id.
    """
    from .evaluate.minimal_pairs import MinimalPair

    if attested.ids != perturbed.ids:
        raise AlignmentError("attested and perturbed corpora have different ids")
    pairs = []
    for a, p in zip(attested.iter_records(lang), perturbed.records[lang]):
        if split is not None and attested.split_of(a.id) != split:
            continue
        if a.text.split() != p.text.split():
            pairs.append(MinimalPair(a.id, a.text, p.text))
    return pairs


def write_pairs(pairs, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(f"{p.id}\t{p.s_att}\t{p.s_unatt}\n")


def read_pairs(path):
    from .evaluate.minimal_pairs import MinimalPair

    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError("expected id, attested, perturbed", path, lineno)
            try:
                pairs.append(MinimalPair(int(parts[0]), parts[1], parts[2]))
            except ValueError as exc:
                raise FormatError(str(exc), path, lineno) from None
    return pairs


def check_leaves(tree: Tree, text: str) -> None:
    if tree.leaves() != text.split():
        raise DataError("tree leaves do not match the sentence words")
