"""Test for mapping-based and impact-based estimation."""

from __future__ import annotations

import random

import pytest

from pyontoevolution.const import IMPACT_CELL_KEYS
from pyontoevolution.exceptions import (
    PyOntoEvolutionConfigError,
    PyOntoEvolutionPredictionError,
)
from pyontoevolution.models import (
    CurrentChanges,
    EstimationMethod,
    EvolutionHistory,
    PredictionMethod,
    TransitionRecord,
    WeightKind,
    WeightVector,
)
from pyontoevolution.prediction import (
    ie_aggregate_irs,
    ie_beta,
    ie_predict,
    make_weights,
    me_predict,
    predict,
    round_half_up,
    undefined_cells,
)

from tests.conftest import FakeScenario


def _record(rng: random.Random, pos: int) -> TransitionRecord:
    return TransitionRecord(
        old_label=pos,
        new_label=pos + 1,
        add_count=rng.randint(0, 50),
        del_count=rng.randint(0, 20),
        ext_count=rng.randint(0, 80),
        red_count=rng.randint(0, 30),
        rev_count=rng.randint(0, 30),
        impact_ratios={
            key: None if rng.random() < 0.15 else rng.random() for key in IMPACT_CELL_KEYS
        },
        mapping_size=rng.randint(50, 500),
    )


def _random_history(seed: int) -> EvolutionHistory:
    rng = random.Random(seed)
    return EvolutionHistory(
        transitions=[_record(rng, pos) for pos in range(1, rng.randint(2, 6))],
        current=CurrentChanges(
            ext_count=rng.randint(0, 80),
            red_count=rng.randint(0, 30),
            rev_count=rng.randint(0, 30),
        ),
    )


@pytest.mark.parametrize(
    ("value", "expected"),
    [(0.0, 0), (0.49, 0), (0.5, 1), (1.5, 2), (2.5, 3), (14.03, 14), (3.51, 4)],
)
def test_round_half_up(value: float, expected: int):
    """Test halves round up."""
    assert round_half_up(value) == expected


def test_make_weights():
    """Test avg and quadratic weights."""
    assert make_weights(4, "avg").weights == pytest.approx([0.25] * 4)
    assert make_weights(2, WeightKind.QUADRATIC).weights == pytest.approx([1 / 5, 4 / 5])
    assert make_weights(3, "w2").weights == pytest.approx([1 / 14, 4 / 14, 9 / 14])
    assert make_weights(1, "w2").weights == [1.0]

    with pytest.raises(PyOntoEvolutionPredictionError):
        make_weights(0, "avg")
    with pytest.raises(ValueError):
        make_weights(2, "w3")


def test_weight_vector_validation():
    """Test unnormalized and negative weights are rejected."""
    with pytest.raises(PyOntoEvolutionConfigError):
        WeightVector(kind=WeightKind.AVG, weights=[0.5, 0.6])
    with pytest.raises(PyOntoEvolutionConfigError):
        WeightVector(kind=WeightKind.AVG, weights=[1.5, -0.5])


def test_me_worked_example(fake_scenario: FakeScenario):
    """Test ME with both weightings on the worked history."""
    history = fake_scenario.worked_history()

    quadratic = me_predict(history, make_weights(2, "w2"))
    assert quadratic.method == EstimationMethod.ME
    assert quadratic.h == 3
    assert quadratic.add_estimate == pytest.approx(12.0)
    assert quadratic.add_rounded == 12
    assert quadratic.del_estimate == pytest.approx(4.4)
    assert quadratic.del_rounded == 4

    average = predict(history, PredictionMethod.ME_AVG)
    assert average.add_rounded == 15
    assert average.del_rounded == 5


def test_ie_worked_example(fake_scenario: FakeScenario):
    """Test IE-w2 on the worked history."""
    history = fake_scenario.worked_history()

    prediction = predict(history, "IE-w2")

    assert prediction.method == EstimationMethod.IE
    assert prediction.weight_kind == WeightKind.QUADRATIC
    assert prediction.aggregated_irs is not None
    assert prediction.aggregated_irs["ext_add"] == pytest.approx(0.38)
    assert prediction.aggregated_irs["red_add"] == pytest.approx(0.02)
    assert prediction.aggregated_irs["rev_add"] == pytest.approx(0.12)
    assert prediction.aggregated_irs["red_del"] == pytest.approx(0.26)
    assert prediction.beta_add == pytest.approx((20 / 22 + 10 / 13) / 2)
    assert prediction.beta_del == pytest.approx(0.9)
    assert prediction.add_estimate == pytest.approx(16.72 * (20 / 22 + 10 / 13) / 2)
    assert prediction.add_rounded == 14
    assert prediction.del_estimate == pytest.approx(3.24)
    assert prediction.del_rounded == 3
    assert prediction.fallback is False
    assert prediction.warnings == []


def test_ie_avg_worked_example(fake_scenario: FakeScenario):
    """Test IE-avg on the worked history."""
    prediction = predict(fake_scenario.worked_history(), PredictionMethod.IE_AVG)

    assert prediction.add_estimate == pytest.approx(16.0 * (20 / 22 + 10 / 13) / 2)
    assert prediction.add_rounded == 13
    assert prediction.del_estimate == pytest.approx(3.51)
    assert prediction.del_rounded == 4


def test_aggregate_renormalizes_undefined_cells():
    """Test weights are renormalized over transitions defining a cell."""
    ratios = [0.2, None, 0.6]
    history = EvolutionHistory(
        transitions=[
            TransitionRecord(
                old_label=pos,
                new_label=pos + 1,
                add_count=5,
                del_count=1,
                ext_count=10,
                red_count=0,
                rev_count=0,
                impact_ratios={"ext_add": ratio},
            )
            for pos, ratio in enumerate(ratios, start=1)
        ]
    )

    aggregated = ie_aggregate_irs(history, make_weights(3, "w2"))

    assert aggregated["ext_add"] == pytest.approx((0.2 * 1 + 0.6 * 9) / 10)
    assert aggregated["red_add"] == 0.0
    assert undefined_cells(history) == [key for key in IMPACT_CELL_KEYS if key != "ext_add"]


def test_ie_falls_back_to_me(fake_scenario: FakeScenario):
    """Test an undefined beta falls back to ME for that side only."""
    history = fake_scenario.worked_history()
    for record in history.transitions:
        record.impact_ratios["ext_del"] = None
        record.impact_ratios["red_del"] = None
        record.impact_ratios["rev_del"] = None

    prediction = predict(history, "IE-w2")

    assert ie_beta(history, "del") is None
    assert prediction.beta_del is None
    assert prediction.fallback is True
    assert prediction.del_estimate == pytest.approx(4.4)
    assert prediction.add_rounded == 14
    assert "beta undefined for del, using ME" in prediction.warnings
    assert "impact cell red_del undefined" in prediction.warnings


def test_prediction_errors(fake_scenario: FakeScenario):
    """Test empty histories, mismatched weights and missing current counts."""
    history = fake_scenario.worked_history()

    with pytest.raises(PyOntoEvolutionPredictionError):
        me_predict(EvolutionHistory(transitions=[]), make_weights(1, "avg"))
    with pytest.raises(PyOntoEvolutionPredictionError):
        me_predict(history, make_weights(3, "avg"))

    history.current = None
    with pytest.raises(PyOntoEvolutionPredictionError):
        ie_predict(history, make_weights(2, "avg"))


@pytest.mark.parametrize("seed", range(200))
def test_me_convex_combination(seed: int):
    """Test ME estimates lie between the smallest and largest observation."""
    history = _random_history(seed)
    adds = [record.add_count for record in history.transitions]
    dels = [record.del_count for record in history.transitions]

    for kind in WeightKind:
        prediction = me_predict(history, make_weights(len(adds), kind))
        assert min(adds) - 1e-9 <= prediction.add_estimate <= max(adds) + 1e-9
        assert min(dels) - 1e-9 <= prediction.del_estimate <= max(dels) + 1e-9


@pytest.mark.parametrize("seed", range(200))
def test_me_linear(seed: int):
    """Test scaling all observations scales the ME estimate."""
    history = _random_history(seed)
    scaled = EvolutionHistory(
        transitions=[
            TransitionRecord(
                old_label=record.old_label,
                new_label=record.new_label,
                add_count=record.add_count * 3,
                del_count=record.del_count * 3,
                ext_count=record.ext_count,
                red_count=record.red_count,
                rev_count=record.rev_count,
            )
            for record in history.transitions
        ]
    )
    weights = make_weights(len(history.transitions), "w2")

    original = me_predict(history, weights)
    tripled = me_predict(scaled, weights)

    assert tripled.add_estimate == pytest.approx(3 * original.add_estimate)
    assert tripled.del_estimate == pytest.approx(3 * original.del_estimate)


@pytest.mark.parametrize("seed", range(200))
def test_single_transition_weightings_agree(seed: int):
    """Test avg and w2 coincide for h=2."""
    history = _random_history(seed)
    history.transitions = history.transitions[:1]

    assert history.h == 2
    assert predict(history, "ME-avg").add_estimate == predict(history, "ME-w2").add_estimate
    assert predict(history, "ME-avg").del_estimate == predict(history, "ME-w2").del_estimate
    assert predict(history, "IE-avg").add_estimate == pytest.approx(
        predict(history, "IE-w2").add_estimate
    )
    assert predict(history, "IE-avg").del_estimate == pytest.approx(
        predict(history, "IE-w2").del_estimate
    )


@pytest.mark.parametrize("seed", range(200))
def test_ie_reproduces_single_transition(seed: int):
    """Test IE returns the observed counts when the current changes repeat them."""
    history = _random_history(seed)
    record = history.transitions[0]
    history.transitions = [record]
    history.current = CurrentChanges(
        ext_count=record.ext_count,
        red_count=record.red_count,
        rev_count=record.rev_count,
    )

    prediction = predict(history, "IE-w2")

    assert prediction.add_estimate == pytest.approx(record.add_count)
    assert prediction.del_estimate == pytest.approx(record.del_count)
    for ratio in prediction.aggregated_irs.values():
        assert 0.0 <= ratio <= 1.0


@pytest.mark.parametrize("seed", range(200))
def test_ie_non_negative(seed: int):
    """Test IE estimates are never negative."""
    history = _random_history(seed)

    for method in (PredictionMethod.IE_AVG, PredictionMethod.IE_W2):
        prediction = predict(history, method)
        assert prediction.add_estimate >= 0.0
        assert prediction.del_estimate >= 0.0
        assert prediction.add_rounded >= 0
