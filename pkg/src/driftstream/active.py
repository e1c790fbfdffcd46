"""Label-selection strategies and the budget ledger.

All strategies expose ``decide(p) -> bool`` where ``p`` is a probability
vector over classes; whether a wanted label is actually bought is settled
afterwards by :func:`budget_gate`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from .naive_bayes import NaiveBayes


class InvalidDistribution(ValueError):
    pass


def entropy_uncertainty(p: Sequence[float]) -> float:
    """Entropy of ``p`` normalized by log K, so the result lies in [0, 1]."""
    k = len(p)
    if k < 2:
        raise InvalidDistribution("need at least two classes")
    total = 0.0
    h = 0.0
    for pi in p:
        if pi < 0.0 or pi != pi:
            raise InvalidDistribution(f"negative or NaN probability {pi}")
        total += pi
        if pi > 0.0:
            h -= pi * math.log(pi)
    if abs(total - 1.0) > 1e-9:
        raise InvalidDistribution(f"probabilities sum to {total}, not 1")
    return min(1.0, max(0.0, h / math.log(k)))


def random_strategy(budget: float, rng: random.Random) -> bool:
    """Label iff a uniform draw is at most the budget."""
    return budget > 0.0 and rng.random() <= budget


class VarUncertainty:
    """Variable-threshold uncertainty sampling on normalized entropy.

    Labels when the certainty 1 - EM falls below a threshold that shrinks
    by a factor (1 - step) after each request and widens by (1 + step)
    otherwise.
    """

    def __init__(self, step: float = 0.01, theta: float = 1.0):
        if not 0.0 < step < 1.0:
            raise ValueError(f"step must lie in (0, 1), got {step}")
        if theta <= 0.0:
            raise ValueError("theta must be positive")
        self.step = step
        self.theta = theta

    def decide(self, p: Sequence[float]) -> bool:
        certainty = 1.0 - entropy_uncertainty(p)
        if certainty < self.theta:
            self.theta *= 1.0 - self.step
            return True
        self.theta *= 1.0 + self.step
        return False


def var_uncertainty(state: VarUncertainty, p: Sequence[float]) -> tuple[bool, VarUncertainty]:
    return state.decide(p), state


class SplitStrategy:
    """Random labeling on a delta-fraction of the stream, variable uncertainty on the rest.

    ``drift_hook`` (if given) is called whenever the random branch is
    taken; only that branch is meant to drive change detection.
    """

    def __init__(self, delta: float = 0.05, budget: float = 0.05, step: float = 0.01,
                 rng: Optional[random.Random] = None,
                 drift_hook: Optional[Callable[[], None]] = None):
        if not 0.0 <= delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {delta}")
        if not 0.0 <= budget <= 1.0:
            raise ValueError(f"budget must lie in [0, 1], got {budget}")
        self.delta = delta
        self.budget = budget
        self.inner = VarUncertainty(step)
        self.rng = rng if rng is not None else random.Random()
        self.drift_hook = drift_hook
        self.last_branch: Optional[str] = None

    @property
    def theta(self) -> float:
        return self.inner.theta

    def decide(self, p: Sequence[float]) -> bool:
        if self.rng.random() < self.delta:
            self.last_branch = "random"
            if self.drift_hook is not None:
                self.drift_hook()
            return random_strategy(self.budget, self.rng)
        self.last_branch = "uncertainty"
        return self.inner.decide(p)


def split_strategy(state: SplitStrategy, p: Sequence[float]) -> tuple[bool, SplitStrategy]:
    return state.decide(p), state


# ---------------------------------------------------------------- baselines


class BaselineKind(str, Enum):
    FIXED = "fixed"
    VARIABLE = "variable"
    RANDOM_VAR = "random_var"
    SEL_SAMPLING = "sel_sampling"


class FixedUncertainty:
    def __init__(self, threshold: float = 0.9):
        self.threshold = threshold

    def decide(self, p: Sequence[float]) -> bool:
        return max(p) < self.threshold


class MaxPosteriorVarUncertainty:
    """Variable threshold on the maximum posterior.

    With ``randomize`` the threshold is multiplied per decision by a draw
    from Normal(1, 1) truncated to (0, inf).
    """

    def __init__(self, step: float = 0.01, theta: float = 1.0,
                 randomize: bool = False, rng: Optional[random.Random] = None):
        if not 0.0 < step < 1.0:
            raise ValueError(f"step must lie in (0, 1), got {step}")
        self.step = step
        self.theta = theta
        self.randomize = randomize
        self.rng = rng if rng is not None else random.Random()

    def _threshold(self) -> float:
        if not self.randomize:
            return self.theta
        eta = 0.0
        while eta <= 0.0:
            eta = self.rng.gauss(1.0, 1.0)
        return self.theta * eta

    def decide(self, p: Sequence[float]) -> bool:
        if max(p) < self._threshold():
            self.theta *= 1.0 - self.step
            return True
        self.theta *= 1.0 + self.step
        return False


class SelectiveSampling:
    """Label with probability b / (b + margin) between the two top posteriors."""

    def __init__(self, b: float = 1.0, rng: Optional[random.Random] = None):
        self.b = b
        self.rng = rng if rng is not None else random.Random()

    def decide(self, p: Sequence[float]) -> bool:
        top = sorted(p, reverse=True)
        margin = top[0] - top[1]
        return self.rng.random() < self.b / (self.b + margin)


def make_baseline(kind: BaselineKind | str, rng: random.Random, threshold: float = 0.9,
                  step: float = 0.01, b: float = 1.0):
    kind = BaselineKind(kind)
    if kind is BaselineKind.FIXED:
        return FixedUncertainty(threshold)
    if kind is BaselineKind.VARIABLE:
        return MaxPosteriorVarUncertainty(step)
    if kind is BaselineKind.RANDOM_VAR:
        return MaxPosteriorVarUncertainty(step, randomize=True, rng=rng)
    return SelectiveSampling(b, rng)


def baseline_decide(strategy, posteriors: Sequence[float]) -> bool:
    return strategy.decide(posteriors)


# ---------------------------------------------------------------- budget


@dataclass
class BudgetLedger:
    """Seen/labeled counters enforcing the labeling budget."""

    budget: float
    seen: int = 0
    labeled: int = 0

    def __post_init__(self):
        if not 0.0 <= self.budget <= 1.0:
            raise ValueError(f"budget must lie in [0, 1], got {self.budget}")

    def observe(self) -> None:
        self.seen += 1

    def gate(self, want_label: bool) -> bool:
        if not want_label or self.seen == 0 or self.labeled >= self.budget * self.seen:
            return False
        self.labeled += 1
        return True

    @property
    def fraction(self) -> float:
        return self.labeled / self.seen if self.seen else 0.0


def budget_gate(ledger: BudgetLedger, want_label: bool) -> bool:
    return ledger.gate(want_label)


class ALUncertainty:
    """A single incremental Naive Bayes driven by one baseline strategy."""

    def __init__(self, schema, kind: BaselineKind | str = BaselineKind.FIXED,
                 budget: float = 0.1, threshold: float = 0.9, step: float = 0.01,
                 seed: int = 0):
        self.kind = BaselineKind(kind)
        self.model = NaiveBayes(schema)
        self.strategy = make_baseline(self.kind, random.Random(seed), threshold, step)
        self.ledger = BudgetLedger(budget)
        self._cache = None

    def _posterior(self, instance) -> list[float]:
        if self._cache is not None and self._cache[0] is instance:
            return self._cache[1]
        p = self.model.predict_proba(instance).tolist()
        self._cache = (instance, p)
        return p

    def predict_one(self, instance) -> int:
        p = self._posterior(instance)
        return p.index(max(p))

    def update(self, instance, oracle) -> bool:
        p = self._posterior(instance)
        self.ledger.observe()
        if not self.ledger.gate(self.strategy.decide(p)):
            return False
        self.model.learn_one(instance, oracle.reveal_label(instance))
        self._cache = None
        return True
