"""Self-contained property suites runnable from the command line.

Each suite re-derives its expected values from an independent reference
(full-matrix distance table, active-set quadratic program, exhaustive
neighborhood scan) rather than trusting the implementation under test.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from .attack import AttackConfig, charmer_attack, exhaustive_k1
from .classifier import BuiltinOracle, TrainConfig, train_builtin
from .pga import project_simplex
from .sentence import Alphabet, contract, expand, levenshtein
from .synth import make_keyword_corpus

SUITES = ("sentence-space", "projection", "equivalence")


def reference_levenshtein(a: str, b: str) -> int:
    """Independent full-matrix distance table (not the two-row production path)."""
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return d[len(a)][len(b)]


def reference_simplex_projection(u_hat: np.ndarray) -> np.ndarray:
    """Active-set search: try every support and keep the feasible KKT point."""
    m = len(u_hat)
    best = None
    best_dist = None
    for r in range(1, m + 1):
        for support in itertools.combinations(range(m), r):
            lam = (sum(u_hat[i] for i in support) - 1.0) / r
            u = np.zeros(m)
            feasible = True
            for i in range(m):
                if i in support:
                    u[i] = u_hat[i] - lam
                    if u[i] < -1e-12:
                        feasible = False
                        break
                elif u_hat[i] - lam > 1e-12:
                    feasible = False
                    break
            if feasible:
                dist = float(np.sum((u - u_hat) ** 2))
                if best_dist is None or dist < best_dist:
                    best, best_dist = u, dist
    assert best is not None
    return best


def _random_string(rng: random.Random, chars: str, max_len: int) -> str:
    return "".join(rng.choice(chars) for _ in range(rng.randint(0, max_len)))


def run_sentence_space_suite(samples: int = 1000, seed: int = 0) -> tuple[bool, list[str]]:
    rng = random.Random(seed)
    chars = "abcdefghijklmnop"  # 16 distinct characters
    lines = []
    ok = True
    sentences = [_random_string(rng, chars, 32) for _ in range(samples)]
    for s in sentences:
        e = expand(s)
        if contract(e) != s or len(e) != 2 * len(s) + 1:
            ok = False
            lines.append(f"FAIL round-trip/expansion length on {s!r}")
            break
    for _ in range(samples):
        a, b, c = (rng.choice(sentences) for _ in range(3))
        dab, dba = levenshtein(a, b), levenshtein(b, a)
        ref = reference_levenshtein(a, b)
        checks = (
            dab == ref,
            dab == dba,
            (dab == 0) == (a == b),
            levenshtein(a, c) <= dab + levenshtein(b, c),
            dab >= abs(len(a) - len(b)),
        )
        if not all(checks):
            ok = False
            lines.append(f"FAIL metric axioms on {a!r}, {b!r}, {c!r}")
            break
    lines.append(f"{'PASS' if ok else 'FAIL'} sentence-space: {samples} random sentences")
    return ok, lines


def run_projection_suite(instances: int = 100, seed: int = 0) -> tuple[bool, list[str]]:
    rng = np.random.default_rng(seed)
    ok = True
    lines = []
    for _ in range(instances):
        m = int(rng.integers(1, 5))
        u_hat = rng.normal(0, 2, m)
        got = project_simplex(u_hat)
        ref = reference_simplex_projection(u_hat)
        if np.linalg.norm(got - ref) > 1e-9:
            ok = False
            lines.append(f"FAIL projection mismatch on {u_hat}")
            break
    for _ in range(1000):
        m = int(rng.integers(1, 65))
        u_hat = rng.normal(0, 3, m)
        p = project_simplex(u_hat)
        feasible = np.all(p >= 0) and abs(p.sum() - 1) <= 1e-10
        idem = np.allclose(project_simplex(p), p, atol=1e-10)
        shift = np.allclose(project_simplex(u_hat + rng.normal()), p, atol=1e-9)
        if not (feasible and idem and shift):
            ok = False
            lines.append(f"FAIL projection properties on m={m}")
            break
    lines.append(f"{'PASS' if ok else 'FAIL'} projection: oracle match and properties")
    return ok, lines


def run_equivalence_suite(samples: int = 100, seed: int = 0) -> tuple[bool, list[str]]:
    corpus = make_keyword_corpus(300, seed=seed)
    clf = train_builtin([(r.text, r.label) for r in corpus], TrainConfig(seed=seed))
    oracle = BuiltinOracle(clf)
    alphabet = Alphabet.from_texts(r.text for r in corpus)
    eval_records = make_keyword_corpus(samples, seed=seed + 1)
    ok = True
    lines = []
    for record in eval_records:
        config = AttackConfig(alphabet=alphabet, n=2 * len(record.text) + 1, k=1)
        outcome = charmer_attack(oracle, record.text, record.label, config)
        best_sentence, best_loss = exhaustive_k1(oracle, record.text, record.label, alphabet)
        if outcome.adversarial != best_sentence or abs(outcome.final_loss - best_loss) > 1e-12:
            ok = False
            lines.append(f"FAIL equivalence on record {record.id}: {record.text!r}")
            break
    lines.append(
        f"{'PASS' if ok else 'FAIL'} equivalence: full-width single-edit attack "
        f"matches the exhaustive scan on {samples} samples"
    )
    return ok, lines


def run_suite(name: str) -> tuple[bool, list[str]]:
    if name == "sentence-space":
        return run_sentence_space_suite()
    if name == "projection":
        return run_projection_suite()
    if name == "equivalence":
        return run_equivalence_suite()
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
