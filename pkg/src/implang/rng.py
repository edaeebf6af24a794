"""Deterministic pseudo-random permutations.

Every randomized step in the toolkit draws from SplitMix64 so that corpora,
splits and shuffles can be regenerated bit-exactly in any language.

Seed derivation
---------------
A stream is keyed by a tuple of integers ``(domain, *parts)``.
Starting from ``state = 0``, each part ``p`` is folded in as::

    state = finalize(state ^ (p mod 2**64))

where ``finalize`` is the SplitMix64 output function (add the golden gamma
``0x9E3779B97F4A7C15``, then the two xor-shift-multiply rounds). The final
``state`` seeds a SplitMix64 generator.

Fisher-Yates
------------
``permutation(n, rng)`` starts from the identity ``[0, 1, ..., n-1]`` and for
``i = n-1`` down to ``1`` swaps positions ``i`` and ``j`` where
``j = (rng.next_u64() * (i + 1)) >> 64``. The result ``perm`` is applied as
``out[k] = seq[perm[k]]``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# domain tags keep streams for different purposes apart
DOMAIN_SHUFFLE_DETERMINISTIC = 1
DOMAIN_SHUFFLE_LOCAL = 2
DOMAIN_SHUFFLE_NONDETERMINISTIC = 3
DOMAIN_SPLIT = 4
DOMAIN_NP_RANDOM = 5
DOMAIN_CV_FOLDS = 6
DOMAIN_SVM = 7
DOMAIN_LABELS = 8


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def finalize(x: int) -> int:
    """SplitMix64 output function applied to ``x + gamma``."""
    return _mix((x + GOLDEN_GAMMA) & MASK64)


def derive_seed(*parts: int) -> int:
    state = 0
    for p in parts:
        # negative parts wrap as two's complement
        state = finalize(state ^ (p & MASK64))
    return state


class SplitMix64:
    """Minimal SplitMix64 generator (Steele, Lea & Flood 2014)."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _mix(self.state)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / float(1 << 53)

    @classmethod
    def from_parts(cls, *parts: int) -> "SplitMix64":
        return cls(derive_seed(*parts))


def permutation(n: int, rng: SplitMix64) -> list[int]:
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.randbelow(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def keyed_permutation(n: int, *parts: int) -> list[int]:
    """Permutation of ``range(n)`` from a fresh stream keyed by ``parts``."""
    return permutation(n, SplitMix64.from_parts(*parts))


def inverse(perm: list[int]) -> list[int]:
    inv = [0] * len(perm)
    for k, p in enumerate(perm):
        inv[p] = k
    return inv
