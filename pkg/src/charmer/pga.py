"""Projected gradient ascent over convex mixtures of edit-ball candidates.

Relaxes the discrete candidate choice to weights on the probability simplex:
the classifier is evaluated on the convex mixture of candidate feature rows,
the weights follow the loss gradient and are projected back onto the simplex
after every step, and the candidate with the largest final weight is taken
as the attack sentence. Requires the builtin classifier, which exposes exact
mixture gradients; remote oracles do not.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

import numpy as np

from .attack import AttackOutcome, TraceStep
from .classifier import BuiltinClassifier, mixture_loss_and_grad
from .oracle import OracleError, cw_loss
from .sentence import (
    Alphabet,
    BallBudgetError,
    contract,
    enumerate_ball,
    expand,
    levenshtein,
)


class GradientUnavailableError(OracleError):
    """The supplied oracle kind does not expose mixture gradients."""


@dataclass
class PgaConfig:
    step_size: float = 0.1
    iterations: int = 200
    k: int = 2  # edit budget for candidate generation
    candidate_cap: int = 4096  # balls above this are subsampled deterministically
    seed: int = 0
    ball_budget: int = 200_000

    def __post_init__(self):
        if self.step_size <= 0 or self.iterations < 1:
            raise ValueError("step_size must be > 0 and iterations >= 1")


def project_simplex(u_hat) -> np.ndarray:
    """Euclidean projection onto {u : u_i >= 0, sum(u) = 1}.

    Sorted-threshold method: the projection is max(u_hat - lam, 0) for the
    unique lam making the result sum to one, which is exactly the KKT system
    of the underlying quadratic program.
    """
    u_hat = np.asarray(u_hat, dtype=np.float64)
    if u_hat.ndim != 1 or u_hat.size < 1:
        raise ValueError("expected a nonempty 1-d vector")
    if not np.all(np.isfinite(u_hat)):
        raise ValueError("projection input must be finite")
    desc = np.sort(u_hat)[::-1]
    css = np.cumsum(desc) - 1.0
    rho = np.nonzero(desc - css / np.arange(1, u_hat.size + 1) > 0)[0][-1]
    lam = css[rho] / (rho + 1.0)
    return np.maximum(u_hat - lam, 0.0)


def _sample_ball(s: str, alphabet: Alphabet, k: int, cap: int, seed: int) -> list[str]:
    """Seeded sample of S_k(s, Γ) by composing k random single edits.

    Used when full enumeration would exceed the ball budget; every walk of k
    single edits stays within distance k of the start, so membership in the
    ball is preserved. The original sentence is always included.
    """
    rng = random.Random(seed)
    out = {s}
    chars = alphabet.replacement_chars()
    attempts = cap * 20
    while len(out) < cap and attempts > 0:
        attempts -= 1
        t = s
        for _ in range(k):
            e = expand(t)
            i = rng.randrange(len(e))
            t = contract(e[:i] + rng.choice(chars) + e[i + 1 :])
        out.add(t)
    return sorted(out)


def pga_attack(
    classifier: BuiltinClassifier,
    s: str,
    y: int,
    config: PgaConfig,
    alphabet: Alphabet,
) -> AttackOutcome:
    if not isinstance(classifier, BuiltinClassifier):
        raise GradientUnavailableError(
            "projected gradient ascent needs the builtin classifier; "
            "this oracle kind has no mixture gradients"
        )
    start = time.perf_counter()
    try:
        candidates = enumerate_ball(s, alphabet, config.k, budget=config.ball_budget)
        if len(candidates) > config.candidate_cap:
            rng = random.Random(config.seed)
            candidates = sorted(rng.sample(candidates, config.candidate_cap))
    except BallBudgetError:
        candidates = _sample_ball(
            s, alphabet, config.k, config.candidate_cap, config.seed
        )
    m = len(candidates)
    features = classifier.features(candidates)

    u = np.full(m, 1.0 / m)
    trace: list[TraceStep] = []
    for _ in range(config.iterations):
        loss, grad = mixture_loss_and_grad(classifier, features, u, y)
        trace.append(TraceStep(position=None, char=None, loss=loss))
        u = project_simplex(u + config.step_size * grad)

    j = int(np.argmax(u))  # first maximum on ties
    adversarial = candidates[j]
    final_loss = cw_loss(classifier.logits([adversarial])[0].tolist(), y)
    return AttackOutcome(
        original=s,
        adversarial=adversarial,
        success=final_loss >= 0,
        edits_used=levenshtein(s, adversarial),
        final_loss=final_loss,
        queries=1,
        elapsed=time.perf_counter() - start,
        trace=trace,
    )
