"""Prequential (test-then-train) evaluation under a label budget."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from itertools import islice
from statistics import fmean
from typing import Iterable, Optional, Protocol, Sequence, TextIO

from .stream import Instance, InstanceSource, LabelOracle

logger = logging.getLogger(__name__)

RESULT_FIELDS = ("dataset", "scenario", "algorithm", "seed", "length", "budget",
                 "accuracy", "labeled_fraction", "runtime_s")
CURVE_FIELDS = ("dataset", "algorithm", "seed", "position", "window_accuracy")


class StreamLearner(Protocol):
    def predict_one(self, instance: Instance) -> int: ...

    def update(self, instance: Instance, oracle: LabelOracle) -> bool: ...


class EvaluationError(RuntimeError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass
class PrequentialResult:
    overall_accuracy: float
    windowed_accuracy: list[tuple[int, float]]
    labeled_fraction: float
    runtime_seconds: float
    seed: Optional[int] = None
    n_instances: int = 0
    n_labeled: int = 0
    predictions: Optional[list[int]] = field(default=None, repr=False)


def default_window(length: int) -> int:
    if length >= 1_000_000:
        return 10_000
    return max(length // 100, 100)


def run_prequential(
    stream: InstanceSource | Iterable[Instance],
    learner: StreamLearner,
    length: Optional[int] = None,
    window: Optional[int] = None,
    seed: Optional[int] = None,
    record_predictions: bool = False,
) -> PrequentialResult:
    """Test-then-train over a stream.

    Each instance is scored against its true class before the learner may
    request its label. Only time spent inside the learner counts towards
    ``runtime_seconds``.
    """
    if length is None:
        length = getattr(stream, "length", None)
    if window is None:
        window = default_window(length) if length else 1000
    if window < 1:
        raise ValueError("window must be >= 1")
    oracle = LabelOracle(stream if isinstance(stream, InstanceSource) else None)
    clock = time.perf_counter
    correct = 0
    in_window = 0
    n = 0
    elapsed = 0.0
    curve: list[tuple[int, float]] = []
    preds: Optional[list[int]] = [] if record_predictions else None
    predict, update = learner.predict_one, learner.update
    for inst in stream if length is None else islice(stream, length):
        try:
            t0 = clock()
            y_hat = predict(inst)
            t1 = clock()
            hit = y_hat == inst.true_class
            update(inst, oracle)
            elapsed += (t1 - t0) + (clock() - t1)
        except Exception as exc:
            raise EvaluationError(f"learner failed at instance {n}: {exc}") from exc
        n += 1
        if hit:
            correct += 1
            in_window += 1
        if preds is not None:
            preds.append(y_hat)
        if n % window == 0:
            curve.append((n, in_window / window))
            in_window = 0
    return PrequentialResult(
        overall_accuracy=correct / n if n else 0.0,
        windowed_accuracy=curve,
        labeled_fraction=oracle.query_count / n if n else 0.0,
        runtime_seconds=elapsed,
        seed=seed,
        n_instances=n,
        n_labeled=oracle.query_count,
        predictions=preds,
    )


def aggregate_runs(results: Sequence[PrequentialResult]) -> tuple[float, float]:
    """Mean accuracy and mean runtime over repeated runs."""
    if not results:
        raise EmptyInput("aggregate_runs needs at least one result")
    return (fmean(r.overall_accuracy for r in results),
            fmean(r.runtime_seconds for r in results))


def result_row(result: PrequentialResult, dataset: str, scenario: str,
               algorithm: str, budget: float) -> dict:
    return {
        "dataset": dataset,
        "scenario": scenario,
        "algorithm": algorithm,
        "seed": result.seed,
        "length": result.n_instances,
        "budget": f"{budget:g}",
        "accuracy": f"{result.overall_accuracy:.6f}",
        "labeled_fraction": f"{result.labeled_fraction:.6f}",
        "runtime_s": f"{result.runtime_seconds:.3f}",
    }


def curve_rows(result: PrequentialResult, dataset: str, algorithm: str) -> list[dict]:
    return [
        {"dataset": dataset, "algorithm": algorithm, "seed": result.seed,
         "position": pos, "window_accuracy": f"{acc:.6f}"}
        for pos, acc in result.windowed_accuracy
    ]


def write_csv(rows: Iterable[dict], fields: Sequence[str], out: TextIO, header: bool = True) -> None:
    writer = csv.DictWriter(out, fieldnames=list(fields), lineterminator="\n")
    if header:
        writer.writeheader()
    for row in rows:
        writer.writerow(row)


def csv_text(rows: Iterable[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, fields, buf)
    return buf.getvalue()


def read_results(f: TextIO) -> list[dict]:
    reader = csv.DictReader(f)
    missing = set(RESULT_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"result CSV lacks columns: {sorted(missing)}")
    rows = []
    for row in reader:
        row["accuracy"] = float(row["accuracy"])
        row["labeled_fraction"] = float(row["labeled_fraction"])
        row["runtime_s"] = float(row["runtime_s"])
        row["length"] = int(row["length"])
        row["budget"] = float(row["budget"])
        rows.append(row)
    return rows
