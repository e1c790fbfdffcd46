"""Hoeffding-bound drift detection (A-test) over a 0/1 error stream."""

from __future__ import annotations

import math
from enum import IntEnum


class Status(IntEnum):
    IN_CONTROL = 0
    WARNING = 1
    DRIFT = 2


def hoeffding_bound(n: int, alpha: float) -> float:
    """One-sample Hoeffding deviation sqrt(ln(1/alpha) / (2n))."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(math.log(1.0 / alpha) / (2.0 * n))


def two_sample_bound(n1: int, n2: int, alpha: float) -> float:
    return math.sqrt(math.log(1.0 / alpha) * (1.0 / n1 + 1.0 / n2) / 2.0)


class HDDMA:
    """Error-increase detector with warning and drift confidence levels.

    The detector keeps the running totals of the error stream and a cut
    point: the prefix whose mean plus Hoeffding bound is smallest. Each
    update compares the mean of the errors after the cut against the mean
    before it with a two-sample bound. Warnings are sticky and clear only
    after ``warning_patience`` consecutive in-control evaluations. A drift
    resets the detector.

    No test is run until both sides of the cut hold ``min_samples``
    observations; without this guard the constantly restarting suffix is
    tested at tiny sizes over and over and false alarms pile up.
    """

    def __init__(self, alpha_warning: float = 0.005, alpha_drift: float = 0.001,
                 warning_patience: int = 100, min_samples: int = 50):
        if not 0.0 < alpha_drift < 1.0 or not 0.0 < alpha_warning < 1.0:
            raise ValueError("confidence levels must lie in (0, 1)")
        if alpha_drift > alpha_warning:
            raise ValueError("alpha_drift must not exceed alpha_warning")
        self.alpha_warning = alpha_warning
        self.alpha_drift = alpha_drift
        self.warning_patience = warning_patience
        self.min_samples = max(1, min_samples)
        self._log_w = math.log(1.0 / alpha_warning)
        self._log_d = math.log(1.0 / alpha_drift)
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.total = 0.0
        self.n_cut = 0
        self.total_cut = 0.0
        self._cut_score = math.inf
        self.status = Status.IN_CONTROL
        self._calm_steps = 0

    def state(self) -> tuple:
        return (self.n, self.total, self.n_cut, self.total_cut, self.status, self._calm_steps)

    def _test(self) -> Status:
        m = self.n - self.n_cut
        if m < self.min_samples or self.n_cut < self.min_samples:
            return Status.IN_CONTROL
        diff = (self.total - self.total_cut) / m - self.total_cut / self.n_cut
        if diff <= 0.0:
            return Status.IN_CONTROL
        scale = 0.5 * (1.0 / self.n_cut + 1.0 / m)
        diff2 = diff * diff
        if diff2 >= self._log_d * scale:
            return Status.DRIFT
        if diff2 >= self._log_w * scale:
            return Status.WARNING
        return Status.IN_CONTROL

    def update(self, error: int | bool) -> Status:
        if error not in (0, 1):
            raise ValueError(f"error must be 0 or 1, got {error!r}")
        self.n += 1
        self.total += error
        score = self.total / self.n + math.sqrt(self._log_w / (2.0 * self.n))
        if score <= self._cut_score:
            self.n_cut = self.n
            self.total_cut = self.total
            self._cut_score = score
        raw = self._test()
        if raw is Status.DRIFT:
            self.reset()
            return Status.DRIFT
        if raw is Status.WARNING:
            self.status = Status.WARNING
            self._calm_steps = 0
        elif self.status is Status.WARNING:
            self._calm_steps += 1
            if self._calm_steps >= self.warning_patience:
                self.status = Status.IN_CONTROL
                self._calm_steps = 0
        return self.status


def update(detector: HDDMA, error: int) -> Status:
    return detector.update(error)
