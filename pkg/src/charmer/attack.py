"""Greedy character-level attack: position selection, candidate search, loop.

Each iteration probes every expanded position with a test character to rank
positions by loss impact, builds every single-edit candidate at the top
positions, scores them in one batch and moves to the highest-loss candidate.
Position importances are recomputed against the current sentence after every
accepted edit.

Tie-breaking everywhere is lowest index first: positions are ranked stably
and candidates are generated in canonical order (position ascending, then
alphabet order, sentinel last), so the first maximum wins.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .oracle import CountingOracle, Oracle, cw_loss
from .sentence import XI, Alphabet, contract, expand, levenshtein

_LOWER_ENGLISH = frozenset("abcdefghijklmnopqrstuvwxyz")


@dataclass(frozen=True)
class PjcConstraints:
    """Word-recognition attack restrictions; a word is a maximal run of
    non-space characters."""

    repeat: bool = False  # never perturb the same word twice
    first: bool = False  # never perturb the first character of a word
    last: bool = False  # never perturb the last character of a word
    length: bool = False  # never perturb words shorter than 4 characters
    loweng: bool = False  # only perturb lowercase English letters

    FLAG_NAMES = ("repeat", "first", "last", "length", "loweng")

    @classmethod
    def all_enabled(cls) -> "PjcConstraints":
        return cls(True, True, True, True, True)

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "PjcConstraints":
        names = [n.strip().lower() for n in names if n.strip()]
        unknown = set(names) - set(cls.FLAG_NAMES)
        if unknown:
            raise ValueError(f"unknown constraint flags: {sorted(unknown)}")
        return cls(**{n: True for n in names})

    def any(self) -> bool:
        return self.repeat or self.first or self.last or self.length or self.loweng


@dataclass
class AttackConfig:
    alphabet: Alphabet
    n: int = 20  # candidate positions per iteration; 1 = fast mode
    k: int = 10  # maximum number of greedy edits
    constraints: PjcConstraints = field(default_factory=PjcConstraints)
    segment_preselect: Optional[int] = None  # restrict edits to the top-m segments
    budget: Optional[int] = None  # maximum scored sentences
    seed: int = 0  # used only by the random-position baseline

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be >= 1")


@dataclass
class TraceStep:
    position: Optional[int]
    char: Optional[str]
    loss: float


@dataclass
class AttackOutcome:
    original: str
    adversarial: str
    success: bool
    edits_used: int
    final_loss: Optional[float]
    queries: int
    elapsed: float
    trace: list[TraceStep]


def word_spans(s: str) -> list[tuple[int, int]]:
    """1-based inclusive (start, end) character spans of maximal non-space runs."""
    spans = []
    start = None
    for idx, ch in enumerate(s, start=1):
        if ch != " ":
            if start is None:
                start = idx
        elif start is not None:
            spans.append((start, idx - 1))
            start = None
    if start is not None:
        spans.append((start, len(s)))
    return spans


def _owner_word(spans: list[tuple[int, int]], i: int) -> Optional[int]:
    # a word over chars [a, b] owns expanded positions 2a-1 .. 2b+1
    for w, (a, b) in enumerate(spans):
        if 2 * a - 1 <= i <= 2 * b + 1:
            return w
    return None


class EditHistory:
    """Tracks which words were already perturbed, following spans through edits."""

    def __init__(self):
        self.edited: set[int] = set()

    def record(self, old_sentence: str, position: int, char: str, new_sentence: str) -> None:
        if new_sentence == old_sentence:
            return
        old_spans = word_spans(old_sentence)
        new_spans = word_spans(new_sentence)
        even = position % 2 == 0
        if even:
            p = position // 2  # edited character index
            delta = -1 if char == XI else 0
        else:
            p = position // 2  # insertion after this character index
            delta = 1  # char == XI on an odd slot is a no-op, caught above

        def shift(x: int) -> Optional[int]:
            if delta == -1:
                if x == p:
                    return None  # deleted
                return x if x < p else x - 1
            if delta == 1:
                return x if x <= p else x + 1
            return x

        # surviving character images of old edited words plus the touched word
        touched = _owner_word(old_spans, position)
        marked_chars: set[int] = set()
        for w in self.edited | ({touched} if touched is not None else set()):
            a, b = old_spans[w]
            for x in range(a, b + 1):
                sx = shift(x)
                if sx is not None:
                    marked_chars.add(sx)
        if delta == 1:
            marked_chars.add(p + 1)  # the inserted character
        elif delta == 0:
            marked_chars.add(p)  # the replaced character

        self.edited = {
            w
            for w, (a, b) in enumerate(new_spans)
            if any(a <= x <= b for x in marked_chars)
        }


def pjc_violates(
    s: str,
    i: int,
    c: str,
    constraints: PjcConstraints,
    edited_words: set[int] | frozenset[int] = frozenset(),
    spans: Optional[list[tuple[int, int]]] = None,
) -> bool:
    """Whether replacing expanded position ``i`` with ``c`` breaks a constraint.

    Edits that leave the sentence unchanged never violate anything; callers
    are expected to skip the check for those.
    """
    if spans is None:
        spans = word_spans(s)
    even = i % 2 == 0
    if constraints.loweng:
        if even and s[i // 2 - 1] not in _LOWER_ENGLISH:
            return True
        if c != XI and c not in _LOWER_ENGLISH:
            return True
    w = _owner_word(spans, i)
    if w is not None:
        a, b = spans[w]
        if constraints.first and i in (2 * a - 1, 2 * a):
            return True
        if constraints.last and i in (2 * b, 2 * b + 1):
            return True
        if constraints.length and (b - a + 1) < 4:
            return True
        if constraints.repeat and w in edited_words:
            return True
    return False


def candidate_edits(
    s: str,
    positions: Sequence[int],
    alphabet: Alphabet,
    constraints: Optional[PjcConstraints] = None,
    history: Optional[EditHistory] = None,
) -> list[tuple[str, int, str]]:
    """Deduplicated (candidate, position, char) triples in canonical order.

    Positions are sorted ascending so the candidate order is independent of
    the ranking that produced them; a sentence rejected at one parametrization
    may still enter through another.
    """
    e = expand(s)
    spans = word_spans(s)
    edited = history.edited if history is not None else frozenset()
    filtering = constraints is not None and constraints.any()
    out: list[tuple[str, int, str]] = []
    seen: set[str] = set()
    for i in sorted(set(positions)):
        if not 1 <= i <= len(e):
            raise ValueError(f"position {i} out of range [1, {len(e)}]")
        head, tail = e[: i - 1], e[i:]
        for c in alphabet.replacement_chars():
            cand = contract(head + c + tail)
            if cand in seen:
                continue
            if filtering and cand != s and pjc_violates(s, i, c, constraints, edited, spans):
                continue
            seen.add(cand)
            out.append((cand, i, c))
    return out


def build_candidates(
    s: str,
    positions: Sequence[int],
    alphabet: Alphabet,
    constraints: Optional[PjcConstraints] = None,
    history: Optional[EditHistory] = None,
) -> list[str]:
    return [cand for cand, _, _ in candidate_edits(s, positions, alphabet, constraints, history)]


def select_positions(
    oracle: Oracle,
    s: str,
    y: int,
    n: int,
    test_char: str = " ",
    allowed: Optional[set[int]] = None,
) -> list[int]:
    """Rank expanded positions by the loss of a one-character probe edit.

    Probes replace the position with the test character, or with the sentinel
    when the test character already sits there. Issues exactly one scoring per
    probed position (all positions unless ``allowed`` restricts them) and
    returns at most ``n`` indices, highest probe loss first, lowest index on
    ties.
    """
    e = expand(s)
    probes: list[str] = []
    idxs: list[int] = []
    for i in range(1, len(e) + 1):
        if allowed is not None and i not in allowed:
            continue
        c = XI if e[i - 1] == test_char else test_char
        probes.append(contract(e[: i - 1] + c + e[i:]))
        idxs.append(i)
    if not probes:
        return []
    losses = [cw_loss(row, y) for row in oracle.score_batch(probes)]
    order = sorted(range(len(idxs)), key=lambda j: (-losses[j], idxs[j]))
    return [idxs[j] for j in order[:n]]


def preselect_segments(
    oracle: Oracle,
    s: str,
    y: int,
    m: int,
    test_char: str = " ",
) -> set[int]:
    """Expanded positions belonging to the ``m`` most loss-critical segments.

    Each maximal non-space segment is masked wholesale (replaced by the test
    character) and scored; the union of expanded positions touching the top-m
    segments, including their flanking insertion slots, is returned. With at
    most ``m`` segments every position is allowed.
    """
    if m < 1:
        raise ValueError("segment count must be >= 1")
    spans = word_spans(s)
    if len(spans) <= m:
        return set(range(1, 2 * len(s) + 2))
    masked = [s[: a - 1] + test_char + s[b:] for a, b in spans]
    losses = [cw_loss(row, y) for row in oracle.score_batch(masked)]
    order = sorted(range(len(spans)), key=lambda j: (-losses[j], j))
    allowed: set[int] = set()
    for j in order[:m]:
        a, b = spans[j]
        allowed.update(range(2 * a - 1, 2 * b + 2))
    return allowed


def _greedy_attack(
    oracle: Oracle,
    s: str,
    y: int,
    config: AttackConfig,
    position_picker,
) -> AttackOutcome:
    counting = CountingOracle(oracle)
    start = time.perf_counter()
    cur = s
    trace: list[TraceStep] = []
    history = EditHistory()
    success = False
    final_loss: Optional[float] = None

    def budget_allows(batch_size: int) -> bool:
        return config.budget is None or counting.queries + batch_size <= config.budget

    for _ in range(config.k):
        allowed = None
        if config.segment_preselect is not None:
            n_segments = len(word_spans(cur))
            if n_segments > config.segment_preselect:
                if not budget_allows(n_segments):
                    break
                allowed = preselect_segments(
                    counting, cur, y, config.segment_preselect, config.alphabet.test_char
                )
        positions = position_picker(counting, cur, y, allowed, budget_allows)
        if positions is None:  # budget refused the probe batch
            break
        edits = candidate_edits(cur, positions, config.alphabet, config.constraints, history)
        if not edits:
            break
        if not budget_allows(len(edits)):
            break
        losses = [cw_loss(row, y) for row in counting.score_batch([c for c, _, _ in edits])]
        j = max(range(len(losses)), key=lambda idx: (losses[idx], -idx))
        chosen, pos, char = edits[j]
        history.record(cur, pos, char, chosen)
        cur = chosen
        final_loss = losses[j]
        trace.append(TraceStep(position=pos, char=char, loss=final_loss))
        if final_loss >= 0:
            success = True
            break

    return AttackOutcome(
        original=s,
        adversarial=cur,
        success=success,
        edits_used=len(trace),
        final_loss=final_loss,
        queries=counting.queries,
        elapsed=time.perf_counter() - start,
        trace=trace,
    )


def charmer_attack(oracle: Oracle, s: str, y: int, config: AttackConfig) -> AttackOutcome:
    """Greedy attack with probe-based position pre-selection."""

    def picker(counting, cur, y_, allowed, budget_allows):
        probe_count = len(allowed) if allowed is not None else 2 * len(cur) + 1
        if not budget_allows(probe_count):
            return None
        return select_positions(
            counting, cur, y_, config.n, config.alphabet.test_char, allowed=allowed
        )

    return _greedy_attack(oracle, s, y, config, picker)


def random_position_baseline(oracle: Oracle, s: str, y: int, config: AttackConfig) -> AttackOutcome:
    """Same greedy loop with positions drawn uniformly without replacement."""
    rng = random.Random(config.seed)

    def picker(counting, cur, y_, allowed, budget_allows):
        pool = sorted(allowed) if allowed is not None else list(range(1, 2 * len(cur) + 2))
        return rng.sample(pool, min(config.n, len(pool)))

    return _greedy_attack(oracle, s, y, config, picker)


def exhaustive_k1(oracle: Oracle, s: str, y: int, alphabet: Alphabet) -> tuple[str, float]:
    """Score the full single-edit neighborhood and return the loss maximizer."""
    from .sentence import generate_neighbors

    neighbors = generate_neighbors(s, alphabet)
    losses = [cw_loss(row, y) for row in oracle.score_batch(neighbors)]
    j = max(range(len(losses)), key=lambda idx: (losses[idx], -idx))
    return neighbors[j], losses[j]
