import math
import random
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftstream.naive_bayes import VARIANCE_FLOOR, NaiveBayes, SchemaMismatch, learn_one, predict_proba
from driftstream.stream import AttributeSpec, Schema

from oracles import brute_force_posterior


def nominal_schema(sizes, n_classes):
    attrs = tuple(AttributeSpec.nominal(f"a{i}", [f"v{j}" for j in range(s)]) for i, s in enumerate(sizes))
    return Schema(attrs, tuple(f"c{k}" for k in range(n_classes)))


@st.composite
def discrete_datasets(draw, allow_missing=False):
    sizes = draw(st.lists(st.integers(2, 3), min_size=1, max_size=3))
    k = draw(st.integers(2, 3))
    cell = lambda s: st.integers(0, s - 1) | st.none() if allow_missing else st.integers(0, s - 1)
    row = st.tuples(*[cell(s) for s in sizes])
    rows = draw(st.lists(row, max_size=100))
    labels = draw(st.lists(st.integers(0, k - 1), min_size=len(rows), max_size=len(rows)))
    query = draw(row)
    return nominal_schema(sizes, k), rows, labels, query


def fit(schema, rows, labels):
    model = NaiveBayes(schema)
    for r, y in zip(rows, labels):
        model.learn_one(schema.instance(list(r), y), y)
    return model


def test_fresh_model_counts_one_instance():
    schema = nominal_schema([2], 3)
    model = learn_one(NaiveBayes(schema), schema.instance([1], 0), 0)
    assert model.class_counts.tolist() == [1, 0, 0]
    assert model.total_seen == 1


def test_untrained_model_is_uniform():
    schema = nominal_schema([2, 3], 3)
    p = predict_proba(NaiveBayes(schema), schema.instance([0, 2], 0))
    np.testing.assert_allclose(p, [1 / 3] * 3)


def test_hand_computed_posterior(binary_schema):
    # A seen 3 times with v1, B once with v2, query v1
    model = fit(binary_schema, [(0,), (0,), (0,), (1,)], [0, 0, 0, 1])
    p = model.predict_proba(binary_schema.instance([0], 0))
    a = (4 / 6) * (4 / 5)
    b = (2 / 6) * (1 / 3)
    np.testing.assert_allclose(p, [a / (a + b), b / (a + b)], rtol=1e-12)
    np.testing.assert_allclose(p, [0.8276, 0.1724], atol=5e-5)


@settings(max_examples=1000)
@given(discrete_datasets())
def test_matches_brute_force_oracle(data):
    schema, rows, labels, query = data
    model = fit(schema, rows, labels)
    expected = brute_force_posterior(rows, labels, schema, list(query))
    got = model.predict_proba(schema.instance(list(query), 0))
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=0)


@settings(max_examples=300)
@given(discrete_datasets(allow_missing=True))
def test_missing_values_skipped_like_the_oracle(data):
    schema, rows, labels, query = data
    model = fit(schema, rows, labels)
    expected = brute_force_posterior(rows, labels, schema, list(query))
    got = model.predict_proba(schema.instance(list(query), 0))
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=0)


@settings(max_examples=1000)
@given(discrete_datasets(allow_missing=True))
def test_probabilities_normalized_and_counters_consistent(data):
    schema, rows, labels, query = data
    model = fit(schema, rows, labels)
    p = model.predict_proba(schema.instance(list(query), 0))
    assert abs(p.sum() - 1.0) <= 1e-9
    assert np.all((p > 0) & (p < 1))
    assert model.class_counts.sum() == model.total_seen
    for a in range(len(schema.attributes)):
        for c in range(schema.n_classes):
            missing = sum(1 for r, y in zip(rows, labels) if y == c and r[a] is None)
            assert model.nominal_counts[a, :, c].sum() == model.class_counts[c] - missing


@settings(max_examples=200)
@given(discrete_datasets(), st.randoms(use_true_random=False))
def test_learning_order_does_not_matter(data, rnd):
    schema, rows, labels, _ = data
    pairs = list(zip(rows, labels))
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    a = fit(schema, *zip(*pairs)) if pairs else NaiveBayes(schema)
    b = fit(schema, *zip(*shuffled)) if pairs else NaiveBayes(schema)
    assert a.state() == b.state()


def mixed_schema():
    return Schema((AttributeSpec.numeric("x"), AttributeSpec.nominal("n", ("p", "q")),
                   AttributeSpec.numeric("z")), ("a", "b"))


def test_gaussian_posterior_matches_oracle():
    rng = random.Random(3)
    schema = mixed_schema()
    rows, labels = [], []
    for _ in range(200):
        y = rng.randrange(2)
        rows.append((rng.gauss(y, 1.0), rng.randrange(2), rng.gauss(3 * y, 2.0)))
        labels.append(y)
    model = fit(schema, rows, labels)
    for _ in range(50):
        q = [rng.gauss(0.5, 2), rng.randrange(2), rng.gauss(1.5, 3)]
        expected = brute_force_posterior(rows, labels, schema, q)
        np.testing.assert_allclose(model.predict_proba(schema.instance(q, 0)), expected, rtol=1e-9)


def test_gaussian_stats_order_independent():
    rng = random.Random(5)
    schema = mixed_schema()
    data = [((rng.uniform(-1e3, 1e3), rng.randrange(2), rng.random()), rng.randrange(2)) for _ in range(300)]
    a = fit(schema, *zip(*data))
    rng.shuffle(data)
    b = fit(schema, *zip(*data))
    assert np.array_equal(a.class_counts, b.class_counts)
    assert np.array_equal(a.nominal_counts, b.nominal_counts)
    for x, y in zip(a.gaussian_parameters(), b.gaussian_parameters()):
        np.testing.assert_allclose(x, y, rtol=1e-9)


def test_constant_attribute_hits_variance_floor():
    schema = mixed_schema()
    model = fit(schema, [(1.0, 0, 2.0)] * 5 + [(3.0, 1, 2.0)] * 5, [0] * 5 + [1] * 5)
    _, var = model.gaussian_parameters()
    assert np.all(var >= VARIANCE_FLOOR)
    p = model.predict_proba(schema.instance([1.0, 0, 2.0], 0))
    assert np.isfinite(p).all() and p[0] > 0.99


def test_log_space_survives_many_attributes():
    schema = nominal_schema([2] * 500, 2)
    rng = random.Random(0)
    rows = [tuple(rng.randrange(2) for _ in range(500)) for _ in range(40)]
    model = fit(schema, rows, [i % 2 for i in range(40)])
    p = model.predict_proba(schema.instance(list(rows[0]), 0))
    assert np.isfinite(p).all() and abs(p.sum() - 1) < 1e-9


def test_argmax_ties_go_to_lowest_class():
    schema = nominal_schema([2], 3)
    model = fit(schema, [(0,), (0,)], [1, 2])
    assert model.predict_one(schema.instance([0], 0)) == 1
    assert NaiveBayes(schema).predict_one(schema.instance([0], 0)) == 0


def test_schema_mismatch():
    model = NaiveBayes(nominal_schema([2], 2))
    foreign = nominal_schema([2, 2], 2).instance([0, 0], 0)
    with pytest.raises(SchemaMismatch):
        model.learn_one(foreign, 0)
    with pytest.raises(SchemaMismatch):
        model.predict_proba(foreign)
    with pytest.raises(SchemaMismatch):
        model.learn_one(nominal_schema([2], 2).instance([0], 0), 7)


def test_per_instance_cost_flat_in_stream_position():
    schema = mixed_schema()
    rng = random.Random(1)
    insts = [schema.instance([rng.random(), rng.randrange(2), rng.random()], rng.randrange(2))
             for _ in range(40000)]
    model = NaiveBayes(schema)

    def timed(chunk):
        t = time.perf_counter()
        for inst in chunk:
            model.predict_one(inst)
            model.learn_one(inst, inst.true_class)
        return time.perf_counter() - t

    timed(insts[:1000])  # warm the compiled kernels
    early = min(timed(insts[i:i + 2000]) for i in range(1000, 9000, 2000))
    late = min(timed(insts[i:i + 2000]) for i in range(30000, 38000, 2000))
    assert late / early < 1.5
