"""Synthetic keyword corpus for desk-scale verification runs.

Two balanced classes whose label is carried by a single sentiment keyword
embedded among neutral filler words; linearly separable for the builtin
n-gram classifier, and deterministic for a given seed.
"""

from __future__ import annotations

import random

from .harness import DatasetRecord

POSITIVE_KEYWORDS = ("good", "great", "sweet", "solid", "fun")
NEGATIVE_KEYWORDS = ("bad", "awful", "sour", "weak", "dull")
FILLER_WORDS = (
    "the",
    "movie",
    "plot",
    "story",
    "it",
    "was",
    "felt",
    "very",
    "quite",
    "really",
    "rather",
    "overall",
    "acting",
    "scene",
    "script",
    "pace",
)


def make_keyword_corpus(n: int, seed: int = 0, start_id: int = 0) -> list[DatasetRecord]:
    """Label 1 sentences carry a positive keyword, label 0 a negative one."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        label = i % 2
        keyword = rng.choice(POSITIVE_KEYWORDS if label else NEGATIVE_KEYWORDS)
        words = [rng.choice(FILLER_WORDS) for _ in range(rng.randint(3, 6))]
        words.insert(rng.randint(0, len(words)), keyword)
        records.append(
            DatasetRecord(id=str(start_id + i), text=" ".join(words), label=label)
        )
    return records
