"""Mapping-based (ME) and impact-based (IE) estimation of mapping changes."""

from __future__ import annotations

from collections.abc import Mapping
import logging
import math

import numpy as np

from .const import IMPACT_CELL_KEYS, MAPPING_CHANGE_CLASSES, ONTOLOGY_CHANGE_CLASSES
from .exceptions import PyOntoEvolutionPredictionError
from .models import (
    EstimationMethod,
    EvolutionHistory,
    Prediction,
    PredictionMethod,
    WeightKind,
    WeightVector,
)

_LOGGER = logging.getLogger(__name__)


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero for non-negatives."""
    return math.floor(value + 0.5)


def make_weights(n: int, kind: WeightKind | str) -> WeightVector:
    """Return n normalized weights, oldest transition first."""
    kind = WeightKind(kind)
    if n <= 0:
        msg = f"Cannot weight {n} transitions"
        raise PyOntoEvolutionPredictionError(msg)

    if kind == WeightKind.AVG:
        weights = np.full(n, 1.0 / n)
    else:
        squares = np.arange(1, n + 1, dtype=float) ** 2
        weights = squares / squares.sum()

    return WeightVector(kind=kind, weights=weights.tolist())


def _check(history: EvolutionHistory, weights: WeightVector) -> None:
    if not history.transitions:
        msg = "Prediction needs at least one historical transition"
        raise PyOntoEvolutionPredictionError(msg)
    if len(weights) != len(history.transitions):
        msg = (
            f"{len(weights)} weights given for "
            f"{len(history.transitions)} historical transitions"
        )
        raise PyOntoEvolutionPredictionError(msg)


def _weighted_actuals(
    history: EvolutionHistory, weights: WeightVector, mapping_change: str
) -> float:
    actuals = np.array(
        [record.actual_of(mapping_change) for record in history.transitions],
        dtype=float,
    )
    return float(np.dot(np.array(weights.weights), actuals))


def me_predict(history: EvolutionHistory, weights: WeightVector) -> Prediction:
    """Estimate |Add| and |Del| as weighted sums of the observed counts."""
    _check(history, weights)
    add_estimate = _weighted_actuals(history, weights, "add")
    del_estimate = _weighted_actuals(history, weights, "del")

    return Prediction(
        method=EstimationMethod.ME,
        weight_kind=weights.kind,
        h=history.h,
        add_estimate=add_estimate,
        del_estimate=del_estimate,
        add_rounded=round_half_up(add_estimate),
        del_rounded=round_half_up(del_estimate),
    )


def undefined_cells(history: EvolutionHistory) -> list[str]:
    """Return impact cells undefined in every historical transition."""
    return [
        key
        for key in IMPACT_CELL_KEYS
        if all(record.impact_ratios.get(key) is None for record in history.transitions)
    ]


def ie_aggregate_irs(
    history: EvolutionHistory, weights: WeightVector
) -> dict[str, float]:
    """Aggregate the observed impact ratios per cell.

    Weights are renormalized over the transitions where a cell is defined.
    A cell undefined everywhere aggregates to 0.
    """
    _check(history, weights)
    vector = np.array(weights.weights)
    aggregated: dict[str, float] = {}

    for key in IMPACT_CELL_KEYS:
        ratios = [record.impact_ratios.get(key) for record in history.transitions]
        defined = np.array([ratio is not None for ratio in ratios])
        values = np.array([ratio or 0.0 for ratio in ratios], dtype=float)
        total = float(vector[defined].sum())
        if total <= 0.0:
            _LOGGER.warning("Impact cell %s undefined over the whole history", key)
            aggregated[key] = 0.0
            continue
        aggregated[key] = float(np.dot(vector[defined], values[defined]) / total)

    return aggregated


def raw_estimate(
    impact_ratios: Mapping[str, float | None],
    counts: dict[str, int],
    mapping_change: str,
) -> float:
    """Return sum over ext/red/rev of IR(cls, mapping_change) * |cls|."""
    return sum(
        (impact_ratios.get(f"{cls}_{mapping_change}") or 0.0) * counts[cls]
        for cls in ONTOLOGY_CHANGE_CLASSES
    )


def ie_beta(history: EvolutionHistory, mapping_change: str = "add") -> float | None:
    """Return the mean ratio of actual to raw estimated counts, None if never defined."""
    ratios = []
    for record in history.transitions:
        counts = {cls: record.count_of(cls) for cls in ONTOLOGY_CHANGE_CLASSES}
        raw = raw_estimate(record.impact_ratios, counts, mapping_change)
        if raw > 0:
            ratios.append(record.actual_of(mapping_change) / raw)

    if not ratios:
        return None

    return float(np.mean(ratios))


def ie_predict(history: EvolutionHistory, weights: WeightVector) -> Prediction:
    """Estimate |Add| and |Del| from current ontology changes and aggregated impact."""
    _check(history, weights)
    if history.current is None:
        msg = "Impact-based estimation needs the current ontology change counts"
        raise PyOntoEvolutionPredictionError(msg)

    aggregated = ie_aggregate_irs(history, weights)
    warnings = [f"impact cell {key} undefined" for key in undefined_cells(history)]
    counts = {cls: history.current.count_of(cls) for cls in ONTOLOGY_CHANGE_CLASSES}

    estimates: dict[str, float] = {}
    betas: dict[str, float | None] = {}
    fallback = False
    for mapping_change in MAPPING_CHANGE_CLASSES:
        beta = ie_beta(history, mapping_change)
        betas[mapping_change] = beta
        if beta is None:
            fallback = True
            warnings.append(f"beta undefined for {mapping_change}, using ME")
            _LOGGER.warning(
                "No transition with a positive raw %s estimate, falling back to ME",
                mapping_change,
            )
            estimates[mapping_change] = _weighted_actuals(history, weights, mapping_change)
        else:
            estimates[mapping_change] = max(
                0.0, beta * raw_estimate(aggregated, counts, mapping_change)
            )

    return Prediction(
        method=EstimationMethod.IE,
        weight_kind=weights.kind,
        h=history.h,
        add_estimate=estimates["add"],
        del_estimate=estimates["del"],
        add_rounded=round_half_up(estimates["add"]),
        del_rounded=round_half_up(estimates["del"]),
        beta_add=betas["add"],
        beta_del=betas["del"],
        aggregated_irs=aggregated,
        fallback=fallback,
        warnings=warnings,
    )


def predict(history: EvolutionHistory, method: PredictionMethod | str) -> Prediction:
    """Run one prediction method with weights sized to the history."""
    method = PredictionMethod(method)
    weights = make_weights(len(history.transitions), method.weight_kind)
    if method.estimation == EstimationMethod.ME:
        return me_predict(history, weights)

    return ie_predict(history, weights)
