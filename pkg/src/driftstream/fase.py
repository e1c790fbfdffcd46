"""Stacking ensemble with per-learner drift detection, and its active-learning variant.

Each base slot pairs a Naive Bayes learner with a Hoeffding drift
detector. Base predictions form a meta-instance, which a Naive Bayes
meta-learner (with its own detector) turns into the final prediction.
``FASEAL`` only buys labels for instances picked by a split strategy run
on the vote proportions of the meta-instance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .active import BudgetLedger, SplitStrategy, entropy_uncertainty
from .hddm import HDDMA, Status
from .naive_bayes import NaiveBayes
from .stream import AttributeSpec, Instance, LabelOracle, Schema

_NO_NUMERIC = np.empty(0, dtype=np.float64)


@dataclass
class EnsembleConfig:
    n_learners: int = 10
    alpha_warning: float = 0.005
    alpha_drift: float = 0.001
    seed: int = 0
    # each slot learns every labeled instance Poisson(1) times (online bagging)
    bagging: bool = True
    warning_patience: int = 100
    min_samples: int = 50

    def __post_init__(self):
        if self.n_learners < 1:
            raise ValueError("n_learners must be >= 1")


@dataclass
class Decision:
    prediction: int
    labeled: bool


class MetaInstance:
    """Base-learner predictions for one instance, shaped like an all-nominal Instance."""

    __slots__ = ("nominal", "numeric", "complete", "visible_class", "schema")

    def __init__(self, predictions: np.ndarray, label: Optional[int] = None,
                 schema: Optional[Schema] = None):
        self.schema = schema
        self.nominal = predictions
        self.numeric = _NO_NUMERIC
        self.complete = True
        self.visible_class = label

    @property
    def predictions(self) -> np.ndarray:
        return self.nominal

    @property
    def label(self) -> Optional[int]:
        return self.visible_class

    def __len__(self):
        return len(self.nominal)


def meta_schema(schema: Schema, n_learners: int) -> Schema:
    attrs = tuple(AttributeSpec.nominal(f"learner{i + 1}", schema.class_values)
                  for i in range(n_learners))
    return Schema(attrs, schema.class_values)


def vote_proportions(meta: MetaInstance, n_classes: int) -> np.ndarray:
    """Fraction of base learners predicting each class."""
    counts = np.bincount(meta.nominal, minlength=n_classes)
    return counts / len(meta.nominal)


class BaseSlot:
    __slots__ = ("learner", "detector", "background", "rng", "presented", "drifts")

    def __init__(self, learner, detector, rng):
        self.learner = learner
        self.detector = detector
        self.background = None
        self.rng = rng
        self.presented = 0
        self.drifts = 0


class FASE:
    """Supervised stacking ensemble; every instance is labeled and learned."""

    def __init__(self, schema: Schema, config: Optional[EnsembleConfig] = None):
        if schema.n_classes < 2:
            raise ValueError("need at least two classes")
        self.schema = schema
        self.config = config or EnsembleConfig()
        cfg = self.config
        self.n_classes = schema.n_classes
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_learners + 1)
        self.slots = [
            BaseSlot(NaiveBayes(schema), self._detector(), np.random.default_rng(s))
            for s in seeds[:-1]
        ]
        self._aux_seed = seeds[-1]
        self.meta_schema = meta_schema(schema, cfg.n_learners)
        self.meta_learner = NaiveBayes(self.meta_schema)
        self.meta_detector = self._detector()
        self.meta_drifts = 0
        self._cache = None

    def _detector(self) -> HDDMA:
        c = self.config
        return HDDMA(c.alpha_warning, c.alpha_drift, c.warning_patience, c.min_samples)

    @property
    def n_learners(self) -> int:
        return len(self.slots)

    def build_meta_instance(self, instance: Instance) -> MetaInstance:
        preds = np.fromiter((s.learner.predict_one(instance) for s in self.slots),
                            dtype=np.intp, count=len(self.slots))
        return MetaInstance(preds, instance.visible_class, self.meta_schema)

    def _meta_class(self, meta: MetaInstance) -> int:
        if self.meta_learner.total_seen == 0:
            return int(np.argmax(np.bincount(meta.nominal, minlength=self.n_classes)))
        return self.meta_learner.predict_one(meta)

    def _prepare(self, instance: Instance) -> tuple[MetaInstance, int]:
        cache = self._cache
        if cache is not None and cache[0] is instance:
            return cache[1], cache[2]
        meta = self.build_meta_instance(instance)
        cls = self._meta_class(meta)
        self._cache = (instance, meta, cls)
        return meta, cls

    def predict(self, instance: Instance) -> tuple[int, np.ndarray]:
        """Final class and meta-level posterior. Does not touch model state."""
        meta, cls = self._prepare(instance)
        return cls, self.meta_learner.predict_proba(meta)

    def predict_one(self, instance: Instance) -> int:
        return self._prepare(instance)[1]

    def train_on_labeled(self, instance: Instance) -> None:
        """Test-then-train step for one labeled instance."""
        y = instance.visible_class
        if y is None:
            raise ValueError("train_on_labeled needs an instance with a visible label")
        meta, meta_pred = self._prepare(instance)
        bagging = self.config.bagging
        preds = meta.nominal
        for i, slot in enumerate(self.slots):
            status = slot.detector.update(int(preds[i] != y))
            if status is Status.DRIFT:
                slot.learner = slot.background if slot.background is not None else NaiveBayes(self.schema)
                slot.background = None
                slot.drifts += 1
            elif status is Status.WARNING:
                if slot.background is None:
                    slot.background = NaiveBayes(self.schema)
            else:
                slot.background = None
            weight = int(slot.rng.poisson(1.0)) if bagging else 1
            slot.presented += 1
            if weight:
                slot.learner.learn_one(instance, y, weight)
                if slot.background is not None:
                    slot.background.learn_one(instance, y, weight)
        meta.visible_class = y
        if self.meta_detector.update(int(meta_pred != y)) is Status.DRIFT:
            self.meta_learner = NaiveBayes(self.meta_schema)
            self.meta_drifts += 1
        self.meta_learner.learn_one(meta, y)
        self._cache = None

    def update(self, instance: Instance, oracle: LabelOracle) -> bool:
        oracle.reveal_label(instance)
        self.train_on_labeled(instance)
        return True

    def process(self, instance: Instance, oracle: LabelOracle) -> Decision:
        pred = self.predict_one(instance)
        return Decision(pred, self.update(instance, oracle))

    def state(self) -> tuple:
        """Hashable snapshot of every learner and detector."""
        parts = []
        for s in self.slots:
            bg = s.background.state() if s.background is not None else None
            parts.append((s.learner.state(), s.detector.state(), bg))
        parts.append((self.meta_learner.state(), self.meta_detector.state()))
        return tuple(parts)

    @property
    def drift_count(self) -> int:
        return sum(s.drifts for s in self.slots)


class FASEAL(FASE):
    """The ensemble under a label budget, selecting on vote-proportion entropy."""

    def __init__(self, schema: Schema, config: Optional[EnsembleConfig] = None,
                 budget: float = 0.05, delta: float = 0.05, step: float = 0.01):
        super().__init__(schema, config)
        seed = int(self._aux_seed.generate_state(1)[0])
        self.strategy = SplitStrategy(delta, budget, step, rng=random.Random(seed))
        self.ledger = BudgetLedger(budget)

    def votes(self, instance: Instance) -> list[float]:
        meta, _ = self._prepare(instance)
        return vote_proportions(meta, self.n_classes).tolist()

    def uncertainty(self, instance: Instance) -> float:
        return entropy_uncertainty(self.votes(instance))

    def update(self, instance: Instance, oracle: LabelOracle) -> bool:
        """Decide on a label for an already-predicted instance; learn only if bought."""
        p = self.votes(instance)
        self.ledger.observe()
        if not self.ledger.gate(self.strategy.decide(p)):
            return False
        oracle.reveal_label(instance)
        self.train_on_labeled(instance)
        return True


def process_fase_al(ensemble: FASEAL, instance: Instance, oracle: LabelOracle) -> Decision:
    return ensemble.process(instance, oracle)
