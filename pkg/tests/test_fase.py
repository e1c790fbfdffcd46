import numpy as np
import pytest

from driftstream.active import entropy_uncertainty
from driftstream.evaluation import run_prequential
from driftstream.fase import (FASE, FASEAL, EnsembleConfig, MetaInstance, meta_schema,
                              process_fase_al, vote_proportions)
from driftstream.generators import SCHEMAS, concept_stream, scenario_stream, stagger_label
from driftstream.hddm import Status
from driftstream.stream import LabelOracle

STAGGER = SCHEMAS["stagger"]


def labeled(inst):
    inst.visible_class = inst.true_class
    return inst


def test_untrained_ensemble_predicts_class_zero_uniformly():
    ens = FASE(SCHEMAS["led"])
    inst = next(iter(scenario_stream("led", "nodrift", 1, 0)))
    meta = ens.build_meta_instance(inst)
    assert meta.predictions.tolist() == [0] * 10
    cls, proba = ens.predict(inst)
    assert cls == 0
    np.testing.assert_allclose(proba, [0.1] * 10)


def test_hand_trained_slots_disagree():
    ens = FASE(STAGGER, EnsembleConfig(n_learners=4))
    # slots 0 and 1 only ever saw class "false", slots 2 and 3 only "true"
    sample = STAGGER.instance([0, 0, 0], 0)
    for i, slot in enumerate(ens.slots):
        for _ in range(5):
            slot.learner.learn_one(sample, 0 if i < 2 else 1)
    meta = ens.build_meta_instance(sample)
    assert meta.predictions.tolist() == [0, 0, 1, 1]
    np.testing.assert_allclose(vote_proportions(meta, 2), [0.5, 0.5])


@pytest.mark.parametrize("n", [1, 3, 10, 17])
def test_meta_instance_arity(n):
    ens = FASE(STAGGER, EnsembleConfig(n_learners=n, seed=n))
    for inst in concept_stream("stagger", 1, 50, n):
        assert len(ens.build_meta_instance(inst)) == n
        ens.train_on_labeled(labeled(inst))
    assert len(ens.slots) == n
    ms = meta_schema(STAGGER, n)
    assert ms.n_nominal == n and all(a.values == STAGGER.class_values for a in ms.attributes)


def test_vote_proportions():
    meta = MetaInstance(np.array([0] * 7 + [1] * 3))
    np.testing.assert_allclose(vote_proportions(meta, 2), [0.7, 0.3])
    unanimous = vote_proportions(MetaInstance(np.array([2] * 10)), 3)
    assert unanimous.tolist() == [0, 0, 1] and entropy_uncertainty(unanimous) == 0
    spread = vote_proportions(MetaInstance(np.arange(10) % 5), 5)
    assert entropy_uncertainty(spread) == pytest.approx(1.0)


def test_stagger_concept_one_is_learned():
    ens = FASE(STAGGER, EnsembleConfig(seed=1))
    stream = iter(concept_stream("stagger", 1, 11_000, 1))
    for _ in range(10_000):
        ens.train_on_labeled(labeled(next(stream)))
    held_out = list(stream)
    acc = np.mean([ens.predict_one(i) == i.true_class for i in held_out])
    assert acc >= 0.99


def test_predict_is_read_only():
    ens = FASE(STAGGER, EnsembleConfig(seed=2))
    for inst in concept_stream("stagger", 2, 300, 2):
        before = ens.state()
        ens.predict(inst)
        ens.predict_one(inst)
        assert ens.state() == before
        ens.train_on_labeled(labeled(inst))


def test_abrupt_switch_triggers_base_drift():
    ens = FASE(STAGGER, EnsembleConfig(seed=0))
    first = list(concept_stream("stagger", 1, 5000, 0))
    second = list(concept_stream("stagger", 2, 2000, 1))
    for inst in first:
        ens.train_on_labeled(labeled(inst))
    assert ens.drift_count == 0
    for inst in second:
        ens.train_on_labeled(labeled(inst))
    assert ens.drift_count >= 1


@pytest.mark.slow
def test_stationary_stream_rarely_resets():
    clean = 0
    for seed in range(100):
        ens = FASE(STAGGER, EnsembleConfig(seed=seed))
        for inst in scenario_stream("stagger", "nodrift", 10_000, seed):
            ens.train_on_labeled(labeled(inst))
        clean += ens.drift_count + ens.meta_drifts == 0
    assert clean >= 95


def test_counter_contract_without_bagging():
    ens = FASE(STAGGER, EnsembleConfig(seed=3, bagging=False))
    k = 700
    for inst in concept_stream("stagger", 1, k, 3):
        ens.train_on_labeled(labeled(inst))
    assert all(s.learner.total_seen == k for s in ens.slots)
    assert ens.meta_learner.total_seen == k


def test_counter_contract_with_bagging():
    ens = FASE(STAGGER, EnsembleConfig(seed=3))
    k = 2000
    for inst in concept_stream("stagger", 1, k, 3):
        ens.train_on_labeled(labeled(inst))
    assert all(s.presented == k for s in ens.slots)
    seen = [s.learner.total_seen for s in ens.slots]
    # Poisson(1) multiplicities: mean k, sd sqrt(k)
    assert all(abs(x - k) < 6 * np.sqrt(k) for x in seen)
    assert len(set(seen)) > 1


def test_background_only_during_warning():
    ens = FASE(SCHEMAS["sea"], EnsembleConfig(seed=4))
    for inst in scenario_stream("sea", "abrupt", 20_000, 4):
        ens.train_on_labeled(labeled(inst))
        for slot in ens.slots:
            if slot.background is not None:
                assert slot.detector.status is Status.WARNING


def test_zero_budget_never_mutates():
    ens = FASEAL(STAGGER, EnsembleConfig(seed=5), budget=0.0)
    fresh = FASEAL(STAGGER, EnsembleConfig(seed=5), budget=0.0).state()
    result = run_prequential(scenario_stream("stagger", "nodrift", 3000, 5), ens)
    assert ens.state() == fresh
    assert result.labeled_fraction == 0.0
    untrained = np.mean([i.true_class == 0 for i in scenario_stream("stagger", "nodrift", 3000, 5)])
    assert result.overall_accuracy == pytest.approx(untrained)


def test_unlabeled_instances_leave_state_untouched():
    ens = FASEAL(SCHEMAS["sea"], EnsembleConfig(seed=6))
    oracle = LabelOracle()
    unlabeled = 0
    for inst in scenario_stream("sea", "nodrift", 5000, 6):
        before = ens.state()
        decision = process_fase_al(ens, inst, oracle)
        if not decision.labeled:
            unlabeled += 1
            assert ens.state() == before
            assert inst.visible_class is None
    assert unlabeled > 4000
    assert oracle.query_count == 5000 - unlabeled


def test_full_budget_reduces_to_supervised():
    stream_a = scenario_stream("sea", "abrupt", 4000, 7)
    stream_b = scenario_stream("sea", "abrupt", 4000, 7)
    al = FASEAL(SCHEMAS["sea"], EnsembleConfig(seed=7), budget=1.0, delta=1.0)
    sup = FASE(SCHEMAS["sea"], EnsembleConfig(seed=7))
    ra = run_prequential(stream_a, al, record_predictions=True)
    rb = run_prequential(stream_b, sup, record_predictions=True)
    assert ra.predictions == rb.predictions
    assert ra.n_labeled == 4000
    assert al.state() == sup.state()


def test_train_requires_label():
    ens = FASE(STAGGER)
    with pytest.raises(ValueError):
        ens.train_on_labeled(STAGGER.instance([0, 0, 0], 1))


def test_ensemble_needs_a_learner():
    with pytest.raises(ValueError):
        EnsembleConfig(n_learners=0)
