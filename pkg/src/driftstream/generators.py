"""Synthetic drifting streams: SEA, STAGGER, LED, AGRAWAL and HYPERPLANE.

Each family exposes numbered concepts (1-based). ``compose_drift`` chains
concepts over a stream with abrupt or sigmoid-mixed gradual transitions,
and ``inject_noise`` applies class or attribute noise.
"""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .stream import AttributeSpec, Instance, InstanceSource, Schema

_EMPTY_INT = np.empty(0, dtype=np.intp)
_EMPTY_FLOAT = np.empty(0, dtype=np.float64)


class InvalidConcept(ValueError):
    pass


class NoiseMode(str, Enum):
    CLASS_FLIP = "class_flip"
    ATTRIBUTE_FLIP = "attribute_flip"


@dataclass(frozen=True)
class NoiseSpec:
    rate: float
    mode: NoiseMode = NoiseMode.CLASS_FLIP

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"noise rate must lie in [0, 1], got {self.rate}")
        object.__setattr__(self, "mode", NoiseMode(self.mode))


@dataclass(frozen=True)
class DriftSpec:
    change_points: tuple[int, ...]
    transition_width: int
    concept_sequence: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "change_points", tuple(int(c) for c in self.change_points))
        object.__setattr__(self, "concept_sequence", tuple(self.concept_sequence))
        cps = self.change_points
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("change points must be strictly increasing")
        if self.transition_width < 0:
            raise ValueError("transition width must be non-negative")
        if len(self.concept_sequence) != len(cps) + 1:
            raise ValueError("concept_sequence needs exactly one more entry than change_points")


# ---------------------------------------------------------------- SEA

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)
SEA_SCHEMA = Schema(
    tuple(AttributeSpec.numeric(f"attrib{i}") for i in (1, 2, 3)),
    ("0", "1"),
)


def sea_label(a1: float, a2: float, threshold: float) -> int:
    """Class 1 iff a1 + a2 <= threshold."""
    return 1 if a1 + a2 <= threshold else 0


# ---------------------------------------------------------------- STAGGER

STAGGER_SCHEMA = Schema(
    (
        AttributeSpec.nominal("size", ("small", "medium", "large")),
        AttributeSpec.nominal("color", ("red", "green", "blue")),
        AttributeSpec.nominal("shape", ("circle", "square", "triangle")),
    ),
    ("false", "true"),
)


def stagger_label(size: int, color: int, shape: int, concept: int) -> int:
    if concept == 1:
        return int(size == 0 and color == 0)
    if concept == 2:
        return int(color == 1 or shape == 0)
    if concept == 3:
        return int(size == 1 or size == 2)
    raise InvalidConcept(f"STAGGER concept {concept} (expected 1-3)")


# ---------------------------------------------------------------- LED

LED_SEGMENTS = (
    (1, 1, 1, 0, 1, 1, 1),
    (0, 0, 1, 0, 0, 1, 0),
    (1, 0, 1, 1, 1, 0, 1),
    (1, 0, 1, 1, 0, 1, 1),
    (0, 1, 1, 1, 0, 1, 0),
    (1, 1, 0, 1, 0, 1, 1),
    (1, 1, 0, 1, 1, 1, 1),
    (1, 0, 1, 0, 0, 1, 0),
    (1, 1, 1, 1, 1, 1, 1),
    (1, 1, 1, 1, 0, 1, 1),
)
LED_N_ATTRIBUTES = 24
LED_N_CONCEPTS = 4
LED_SCHEMA = Schema(
    tuple(AttributeSpec.nominal(f"att{i + 1}", ("0", "1")) for i in range(LED_N_ATTRIBUTES)),
    tuple(str(d) for d in range(10)),
)


def led_relevant_positions(concept: int) -> tuple[int, ...]:
    """Attribute positions carrying segments 1..7 under a concept.

    Concept c moves the 7-segment block 7*(c-1) positions to the right,
    wrapping around the 24 attributes.
    """
    if not 1 <= concept <= LED_N_CONCEPTS:
        raise InvalidConcept(f"LED concept {concept} (expected 1-{LED_N_CONCEPTS})")
    shift = 7 * (concept - 1)
    return tuple((shift + s) % LED_N_ATTRIBUTES for s in range(7))


# ---------------------------------------------------------------- AGRAWAL

AGRAWAL_SCHEMA = Schema(
    (
        AttributeSpec.numeric("salary"),
        AttributeSpec.numeric("commission"),
        AttributeSpec.numeric("age"),
        AttributeSpec.nominal("elevel", tuple(str(i) for i in range(5))),
        AttributeSpec.nominal("car", tuple(str(i) for i in range(1, 21))),
        AttributeSpec.nominal("zipcode", tuple(str(i) for i in range(9))),
        AttributeSpec.numeric("hvalue"),
        AttributeSpec.numeric("hyears"),
        AttributeSpec.numeric("loan"),
    ),
    ("groupA", "groupB"),
)


def agrawal_label(salary: float, age: float, elevel: int, function: int) -> int:
    """Group A (class 0) / group B (class 1) for classification functions 1-4."""
    if function == 1:
        a = age < 40 or age >= 60
    elif function == 2:
        if age < 40:
            a = 50000 <= salary <= 100000
        elif age < 60:
            a = 75000 <= salary <= 125000
        else:
            a = 25000 <= salary <= 75000
    elif function == 3:
        if age < 40:
            a = elevel in (0, 1)
        elif age < 60:
            a = elevel in (1, 2, 3)
        else:
            a = elevel in (2, 3, 4)
    elif function == 4:
        if age < 40:
            if elevel in (0, 1):
                a = 25000 <= salary <= 75000
            else:
                a = 50000 <= salary <= 100000
        elif age < 60:
            if elevel in (1, 2, 3):
                a = 50000 <= salary <= 100000
            else:
                a = 75000 <= salary <= 125000
        elif elevel in (2, 3, 4):
            a = 50000 <= salary <= 100000
        else:
            a = 25000 <= salary <= 75000
    else:
        raise InvalidConcept(f"AGRAWAL function {function} (expected 1-4)")
    return 0 if a else 1


# ---------------------------------------------------------------- HYPERPLANE

HYPERPLANE_N_ATTRIBUTES = 10
HYPERPLANE_SCHEMA = Schema(
    tuple(AttributeSpec.numeric(f"att{i + 1}") for i in range(HYPERPLANE_N_ATTRIBUTES)),
    ("0", "1"),
)


def hyperplane_weights(seed: int, concept: int) -> np.ndarray:
    if concept < 1:
        raise InvalidConcept(f"HYPERPLANE concept {concept} (expected >= 1)")
    return np.random.default_rng([seed, concept]).random(HYPERPLANE_N_ATTRIBUTES)


# ---------------------------------------------------------------- concepts

FAMILIES = ("sea", "stagger", "led", "agrawal", "hyperplane")
N_CONCEPTS = {"sea": 4, "stagger": 3, "led": LED_N_CONCEPTS, "agrawal": 4, "hyperplane": 4}
SCHEMAS = {
    "sea": SEA_SCHEMA,
    "stagger": STAGGER_SCHEMA,
    "led": LED_SCHEMA,
    "agrawal": AGRAWAL_SCHEMA,
    "hyperplane": HYPERPLANE_SCHEMA,
}
DEFAULT_NOISE = {
    "sea": NoiseSpec(0.1, NoiseMode.CLASS_FLIP),
    "stagger": NoiseSpec(0.0, NoiseMode.CLASS_FLIP),
    "led": NoiseSpec(0.1, NoiseMode.ATTRIBUTE_FLIP),
    "agrawal": NoiseSpec(0.1, NoiseMode.CLASS_FLIP),
    "hyperplane": NoiseSpec(0.1, NoiseMode.CLASS_FLIP),
}


@dataclass
class ConceptGenerator:
    """Draws noise-free instances from one concept of one family."""

    family: str
    concept_id: int
    seed: int = 0
    schema: Schema = field(init=False)

    def __post_init__(self):
        self.family = self.family.lower()
        if self.family not in FAMILIES:
            raise InvalidConcept(f"unknown generator family {self.family!r}")
        self.schema = SCHEMAS[self.family]
        if self.family == "sea":
            if not 1 <= self.concept_id <= 4:
                raise InvalidConcept(f"SEA concept {self.concept_id} (expected 1-4)")
            self._threshold = SEA_THRESHOLDS[self.concept_id - 1]
        elif self.family == "stagger":
            if not 1 <= self.concept_id <= 3:
                raise InvalidConcept(f"STAGGER concept {self.concept_id} (expected 1-3)")
        elif self.family == "led":
            self._relevant = led_relevant_positions(self.concept_id)
            irrelevant = set(range(LED_N_ATTRIBUTES)) - set(self._relevant)
            self._irrelevant = tuple(sorted(irrelevant))
        elif self.family == "agrawal":
            if not 1 <= self.concept_id <= 4:
                raise InvalidConcept(f"AGRAWAL function {self.concept_id} (expected 1-4)")
        else:
            self._weights = hyperplane_weights(self.seed, self.concept_id)
            self._half = float(self._weights.sum()) / 2.0
        self._draw = getattr(self, f"_draw_{self.family}")

    def draw(self, rng: random.Random) -> Instance:
        return self._draw(rng)

    def _draw_sea(self, rng):
        r = rng.random
        a1, a2, a3 = 10.0 * r(), 10.0 * r(), 10.0 * r()
        x = np.array((a1, a2, a3))
        return Instance(SEA_SCHEMA, _EMPTY_INT, x, sea_label(a1, a2, self._threshold))

    def _draw_stagger(self, rng):
        ri = rng.randrange
        size, color, shape = ri(3), ri(3), ri(3)
        y = stagger_label(size, color, shape, self.concept_id)
        return Instance(STAGGER_SCHEMA, np.array((size, color, shape), dtype=np.intp), _EMPTY_FLOAT, y)

    def _draw_led(self, rng):
        digit = rng.randrange(10)
        bits = [0] * LED_N_ATTRIBUTES
        for pos, seg in zip(self._relevant, LED_SEGMENTS[digit]):
            bits[pos] = seg
        getbits = rng.getrandbits
        for pos in self._irrelevant:
            bits[pos] = getbits(1)
        return Instance(LED_SCHEMA, np.array(bits, dtype=np.intp), _EMPTY_FLOAT, digit)

    def _draw_agrawal(self, rng):
        r, ri = rng.random, rng.randrange
        salary = 20000.0 + 130000.0 * r()
        commission = 0.0 if salary >= 75000 else 10000.0 + 65000.0 * r()
        age = float(20 + ri(61))
        elevel = ri(5)
        car = ri(20)
        zipcode = ri(9)
        hvalue = (9 - zipcode) * 100000.0 * (0.5 + r())
        hyears = float(1 + ri(30))
        loan = r() * 500000.0
        y = agrawal_label(salary, age, elevel, self.concept_id)
        return Instance(
            AGRAWAL_SCHEMA,
            np.array((elevel, car, zipcode), dtype=np.intp),
            np.array((salary, commission, age, hvalue, hyears, loan)),
            y,
        )

    def _draw_hyperplane(self, rng):
        r = rng.random
        x = np.array([r() for _ in range(HYPERPLANE_N_ATTRIBUTES)])
        y = 1 if float(x @ self._weights) >= self._half else 0
        return Instance(HYPERPLANE_SCHEMA, _EMPTY_INT, x, y)


def generate(family: str, concept_id: int, rng: random.Random, seed: int = 0) -> Instance:
    """Draw one noise-free instance from ``family``/``concept_id``."""
    return ConceptGenerator(family, concept_id, seed).draw(rng)


def inject_noise(instance: Instance, spec: NoiseSpec, rng: random.Random) -> Instance:
    """Return a noisy copy of ``instance`` (the input is left untouched)."""
    if spec.rate <= 0.0:
        return instance
    if spec.mode is NoiseMode.CLASS_FLIP:
        if rng.random() >= spec.rate:
            return instance
        k = instance.schema.n_classes
        other = rng.randrange(k - 1)
        if other >= instance.true_class:
            other += 1
        return instance.with_class(other)
    codes = instance.nominal.tolist()
    r = rng.random
    rate = spec.rate
    for j in _binary_positions(instance.schema):
        if codes[j] >= 0 and r() < rate:
            codes[j] = 1 - codes[j]
    return Instance(instance.schema, np.array(codes, dtype=np.intp), instance.numeric,
                    instance.true_class, complete=instance.complete)


@functools.lru_cache(maxsize=64)
def _binary_positions(schema: Schema) -> tuple[int, ...]:
    return tuple(int(j) for j in np.flatnonzero(schema.nominal_sizes == 2))


def transition_probability(t: int, change_point: int, width: int) -> float:
    """Probability that position ``t`` draws from the incoming concept.

    Abrupt (width 0) switches at the change point. Otherwise a sigmoid
    1 / (1 + exp(-4 (t - t0) / w)), clamped to exactly 0/1 once
    |t - t0| >= 2w where it is within 3.4e-4 of its limit.
    """
    if width == 0:
        return 1.0 if t >= change_point else 0.0
    d = t - change_point
    if d <= -2 * width:
        return 0.0
    if d >= 2 * width:
        return 1.0
    return 1.0 / (1.0 + math.exp(-4.0 * d / width))


def compose_drift(
    base: Sequence[ConceptGenerator],
    spec: DriftSpec,
    length: Optional[int],
    rng: random.Random,
    noise: Optional[NoiseSpec] = None,
) -> InstanceSource:
    """Chain concept generators into one drifting stream.

    ``base`` holds the generators in concept_sequence order. At each
    position the active concept is found by walking the change points:
    the stream advances past change point i with its transition
    probability and stops at the first one not taken.
    """
    if len(base) != len(spec.concept_sequence):
        raise ValueError("need one generator per entry of concept_sequence")
    schema = base[0].schema
    if any(g.schema != schema for g in base):
        raise ValueError("all concepts must share a schema")
    cps = spec.change_points
    width = spec.transition_width
    draws = [g.draw for g in base]

    def gen():
        t = 0
        r = rng.random
        while True:
            idx = 0
            for cp in cps:
                p = transition_probability(t, cp, width)
                if p >= 1.0 or (p > 0.0 and r() < p):
                    idx += 1
                else:
                    break
            inst = draws[idx](rng)
            if noise is not None:
                inst = inject_noise(inst, noise, rng)
            t += 1
            yield inst

    return InstanceSource(schema, gen(), length)


def concept_stream(
    family: str,
    concept_id: int,
    length: Optional[int],
    seed: int,
    noise: Optional[NoiseSpec] = None,
) -> InstanceSource:
    """Stationary stream from a single concept."""
    spec = DriftSpec((), 0, (concept_id,))
    return compose_drift([ConceptGenerator(family, concept_id, seed)], spec,
                         length, random.Random(seed), noise)


def default_concepts(family: str, n: int) -> tuple[int, ...]:
    """Concept ids in listed order, cycling when a family has fewer than n."""
    k = N_CONCEPTS[family]
    return tuple(1 + i % k for i in range(n))


SCENARIOS = ("nodrift", "abrupt", "gradual")
FULL_LENGTH = 1_000_000
FULL_TRANSITION_WIDTH = 1000


def scenario_stream(
    family: str,
    scenario: str,
    length: int,
    seed: int,
    noise: Optional[NoiseSpec] = None,
    transition_width: Optional[int] = None,
) -> InstanceSource:
    """One of the synthetic experiment scenarios.

    Drift scenarios place three change points at 25/50/75 % of ``length``.
    Gradual transitions default to 1000 instances at full length and are
    scaled proportionally for shorter streams.
    """
    family = family.lower()
    if family not in FAMILIES:
        raise InvalidConcept(f"unknown generator family {family!r}")
    if noise is None:
        noise = DEFAULT_NOISE[family]
    if scenario == "nodrift":
        spec = DriftSpec((), 0, default_concepts(family, 1))
    elif scenario in ("abrupt", "gradual"):
        cps = tuple(length * q // 4 for q in (1, 2, 3))
        if scenario == "abrupt":
            width = 0
        elif transition_width is not None:
            width = transition_width
        else:
            width = max(1, round(FULL_TRANSITION_WIDTH * length / FULL_LENGTH))
        spec = DriftSpec(cps, width, default_concepts(family, 4))
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    base = [ConceptGenerator(family, c, seed) for c in spec.concept_sequence]
    return compose_drift(base, spec, length, random.Random(seed), noise)
