"""Instance/schema data model, pull-based streams and the label oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

MISSING = None


class SchemaViolation(ValueError):
    """A record does not conform to its schema."""


class EndOfStream(Exception):
    """Raised by ``next_instance`` once a bounded stream is exhausted."""


@dataclass(frozen=True)
class AttributeSpec:
    """One attribute declaration. ``values`` is None for numeric attributes."""

    name: str
    values: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.values is not None:
            object.__setattr__(self, "values", tuple(self.values))
            if len(set(self.values)) != len(self.values):
                raise SchemaViolation(f"duplicate nominal values in attribute {self.name!r}")
            if len(self.values) < 2:
                raise SchemaViolation(f"nominal attribute {self.name!r} needs at least 2 values")

    @property
    def is_nominal(self) -> bool:
        return self.values is not None

    @property
    def kind(self) -> str:
        return "nominal" if self.is_nominal else "numeric"

    @classmethod
    def numeric(cls, name: str) -> "AttributeSpec":
        return cls(name)

    @classmethod
    def nominal(cls, name: str, values: Sequence[str]) -> "AttributeSpec":
        return cls(name, tuple(values))


@dataclass(frozen=True)
class Schema:
    attributes: tuple[AttributeSpec, ...]
    class_values: tuple[str, ...]
    # derived layout, filled in __post_init__
    nominal_positions: np.ndarray = field(init=False, repr=False, compare=False)
    numeric_positions: np.ndarray = field(init=False, repr=False, compare=False)
    nominal_sizes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "class_values", tuple(self.class_values))
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaViolation("attribute names must be unique")
        if len(set(self.class_values)) != len(self.class_values):
            raise SchemaViolation("class values must be unique")
        nom = [i for i, a in enumerate(self.attributes) if a.is_nominal]
        num = [i for i, a in enumerate(self.attributes) if not a.is_nominal]
        object.__setattr__(self, "nominal_positions", np.array(nom, dtype=np.intp))
        object.__setattr__(self, "numeric_positions", np.array(num, dtype=np.intp))
        sizes = [len(self.attributes[i].values) for i in nom]
        object.__setattr__(self, "nominal_sizes", np.array(sizes, dtype=np.intp))

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def n_classes(self) -> int:
        return len(self.class_values)

    @property
    def n_nominal(self) -> int:
        return len(self.nominal_positions)

    @property
    def n_numeric(self) -> int:
        return len(self.numeric_positions)

    def attribute_index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise KeyError(name)

    def class_index(self, label: str) -> int:
        try:
            return self.class_values.index(label)
        except ValueError:
            raise SchemaViolation(f"unknown class value {label!r}") from None

    def instance(self, values: Sequence, true_class: int) -> "Instance":
        """Build a validated instance from a full attribute vector.

        Numeric cells are floats, nominal cells are value indices, and
        ``None`` marks a missing value.
        """
        if len(values) != self.n_attributes:
            raise SchemaViolation(
                f"expected {self.n_attributes} values, got {len(values)}"
            )
        if not 0 <= true_class < self.n_classes:
            raise SchemaViolation(f"class index {true_class} out of range")
        nominal = np.empty(self.n_nominal, dtype=np.intp)
        numeric = np.empty(self.n_numeric, dtype=np.float64)
        complete = True
        for j, pos in enumerate(self.nominal_positions):
            v = values[pos]
            if v is None:
                nominal[j] = -1
                complete = False
                continue
            if v != int(v) or not 0 <= v < self.nominal_sizes[j]:
                raise SchemaViolation(
                    f"nominal index {v!r} invalid for attribute "
                    f"{self.attributes[pos].name!r}"
                )
            nominal[j] = int(v)
        for j, pos in enumerate(self.numeric_positions):
            v = values[pos]
            if v is None:
                numeric[j] = math.nan
                complete = False
            else:
                numeric[j] = float(v)
                if math.isnan(numeric[j]):
                    complete = False
        return Instance(self, nominal, numeric, int(true_class), complete=complete)


class Instance:
    """One stream example.

    Attribute values are stored split by kind: ``nominal`` holds value
    indices (-1 for missing) and ``numeric`` holds floats (NaN for missing).
    ``true_class`` is ground truth known to the harness; learners must only
    read ``visible_class``, which stays None until the oracle reveals it.
    """

    __slots__ = ("schema", "nominal", "numeric", "true_class", "visible_class", "complete")

    def __init__(self, schema, nominal, numeric, true_class, visible_class=None, complete=True):
        self.schema = schema
        self.nominal = nominal
        self.numeric = numeric
        self.true_class = true_class
        self.visible_class = visible_class
        self.complete = complete

    @property
    def values(self) -> list:
        out: list = [None] * self.schema.n_attributes
        for j, pos in enumerate(self.schema.nominal_positions):
            code = int(self.nominal[j])
            out[pos] = None if code < 0 else code
        for j, pos in enumerate(self.schema.numeric_positions):
            x = float(self.numeric[j])
            out[pos] = None if math.isnan(x) else x
        return out

    def with_class(self, true_class: int) -> "Instance":
        return Instance(self.schema, self.nominal, self.numeric, true_class,
                        complete=self.complete)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.true_class == other.true_class
            and self.visible_class == other.visible_class
            and np.array_equal(self.nominal, other.nominal)
            and np.array_equal(self.numeric, other.numeric, equal_nan=True)
        )

    __hash__ = None

    def __repr__(self):
        return f"Instance(values={self.values}, true_class={self.true_class})"


class InstanceSource:
    """Pull-based, single-pass stream of instances over a fixed schema."""

    def __init__(self, schema: Schema, instances: Iterable[Instance], length: Optional[int] = None):
        self.schema = schema
        self.length = length
        self._it = iter(instances)
        self.position = 0

    def next_instance(self) -> Instance:
        if self.length is not None and self.position >= self.length:
            raise EndOfStream
        try:
            inst = next(self._it)
        except StopIteration:
            raise EndOfStream from None
        schema = getattr(inst, "schema", None)
        if schema is not self.schema and schema != self.schema:
            raise SchemaViolation(f"record {self.position} does not match the stream schema")
        self.position += 1
        return inst

    def __iter__(self) -> Iterator[Instance]:
        while True:
            try:
                yield self.next_instance()
            except EndOfStream:
                return

    @classmethod
    def from_factory(cls, schema: Schema, draw: Callable[[], Instance], length: Optional[int]):
        def gen():
            while True:
                yield draw()
        return cls(schema, gen(), length)


def next_instance(stream: InstanceSource) -> Instance:
    return stream.next_instance()


class LabelOracle:
    """Hands out instances from a source and reveals true labels on request."""

    def __init__(self, source: Optional[InstanceSource] = None):
        self.source = source
        self.query_count = 0

    def __iter__(self):
        if self.source is None:
            return iter(())
        return iter(self.source)

    def reveal_label(self, instance: Instance) -> int:
        self.query_count += 1
        instance.visible_class = instance.true_class
        return instance.true_class


def reveal_label(oracle: LabelOracle, instance: Instance) -> int:
    return oracle.reveal_label(instance)
