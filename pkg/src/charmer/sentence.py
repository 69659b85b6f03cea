"""Sentence algebra: edit distance, expansion/contraction and edit balls.

Sentences are plain ``str`` objects treated as sequences of Unicode scalar
values. A reserved sentinel character (U+0000) lets insertions and deletions
be expressed as single-position replacements of the *expanded* sentence,
which interleaves the sentinel before, between and after every character.
Replacing a real character with the sentinel encodes a deletion; replacing a
sentinel slot with a real character encodes an insertion.

All expanded-position indices in this module are 1-based and range over
``[1, 2*len(s) + 1]``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

XI = "\x00"  # reserved sentinel; rejected in every input sentence
L_MAX = 1024  # default maximum sentence length in scalar values


class SentenceError(ValueError):
    pass


class BallBudgetError(RuntimeError):
    """An edit-ball enumeration would exceed its candidate budget."""


def check_sentence(s: str, l_max: int = L_MAX) -> str:
    if XI in s:
        raise SentenceError("sentence contains the reserved sentinel U+0000")
    if len(s) > l_max:
        raise SentenceError(f"sentence length {len(s)} exceeds maximum {l_max}")
    return s


@dataclass(frozen=True)
class Alphabet:
    """Finite character set plus the sentinel and the probe test character."""

    chars: tuple[str, ...]
    special: str = XI
    test_char: str = " "

    def __post_init__(self):
        ordered = tuple(sorted(set(self.chars)))
        object.__setattr__(self, "chars", ordered)
        if any(len(c) != 1 for c in ordered):
            raise SentenceError("alphabet entries must be single scalar values")
        if self.special in ordered:
            raise SentenceError("sentinel must not be a member of the alphabet")
        if self.test_char == self.special:
            raise SentenceError("test character must differ from the sentinel")

    @classmethod
    def from_texts(cls, texts, test_char: str = " ") -> "Alphabet":
        chars = set()
        for t in texts:
            chars.update(t)
        chars.discard(XI)
        return cls(chars=tuple(chars), test_char=test_char)

    def replacement_chars(self) -> tuple[str, ...]:
        """Candidate characters in canonical order: sorted alphabet, then sentinel."""
        return self.chars + (self.special,)

    def fingerprint(self) -> str:
        payload = "".join(self.chars).encode("utf-8") + b"\x00" + self.test_char.encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions and replacements."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def expand(s: str) -> str:
    """Interleave the sentinel before, between and after every character."""
    if XI in s:
        raise SentenceError("cannot expand a sentence containing the sentinel")
    return XI + XI.join(s) + XI if s else XI


def contract(e: str) -> str:
    """Remove every occurrence of the sentinel, preserving order."""
    return e.replace(XI, "")


def single_edit(s: str, i: int, c: str) -> str:
    """Replace position ``i`` of the expanded sentence with ``c`` and contract.

    The result is always within edit distance 1 of ``s``.
    """
    e = expand(s)
    if not 1 <= i <= len(e):
        raise SentenceError(f"position {i} out of range [1, {len(e)}]")
    return contract(e[: i - 1] + c + e[i:])


def generate_neighbors(s: str, alphabet: Alphabet) -> list[str]:
    """All distinct sentences reachable by one expanded-position replacement.

    Returned in canonical order (position ascending, then alphabet order,
    sentinel last), deduplicated keeping the first occurrence. Contains ``s``
    itself whenever every character of ``s`` lies in the alphabet.
    """
    e = expand(s)
    out: list[str] = []
    seen: set[str] = set()
    for i in range(1, len(e) + 1):
        head, tail = e[: i - 1], e[i:]
        for c in alphabet.replacement_chars():
            cand = contract(head + c + tail)
            if cand not in seen:
                seen.add(cand)
                out.append(cand)
    return out


def enumerate_ball(s: str, alphabet: Alphabet, k: int, budget: int = 1_000_000) -> list[str]:
    """All sentences within edit distance ``k`` of ``s`` over the alphabet.

    Breadth-first expansion of single edits; refuses with BallBudgetError when
    the enumeration would exceed ``budget`` distinct candidates. Returns a
    sorted list for determinism.
    """
    if k < 1:
        raise SentenceError("edit radius k must be >= 1")
    seen = {s}
    frontier = [s]
    for _ in range(k):
        fresh = []
        for t in frontier:
            for nb in generate_neighbors(t, alphabet):
                if nb not in seen:
                    seen.add(nb)
                    fresh.append(nb)
                    if len(seen) > budget:
                        raise BallBudgetError(
                            f"edit ball exceeds candidate budget of {budget}"
                        )
        frontier = fresh
    return sorted(seen)


def ball_size_bounds(sentence_len: int, alphabet_size: int, k: int) -> tuple[int, int]:
    """Lower and upper bounds on the size of the radius-``k`` edit ball.

    For a single-character alphabet the ball size is exactly ``2k + 1``
    (assuming the sentence is at least ``k`` long), so both bounds collapse.
    """
    if alphabet_size < 1:
        raise SentenceError("alphabet size must be >= 1")
    if k < 1:
        raise SentenceError("edit radius k must be >= 1")
    if alphabet_size == 1:
        return 2 * k + 1, 2 * k + 1
    g = alphabet_size
    lower = (g ** (k + 1) - 1) // (g - 1)
    upper = (g + 1) ** k * (2 * (sentence_len + k) - 1) ** k
    return lower, upper
