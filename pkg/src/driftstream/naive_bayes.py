"""Incremental Naive Bayes for nominal and numeric attributes.

Nominal likelihoods and class priors use add-one (Laplace) smoothing;
numeric attributes use one Gaussian per class maintained with a weighted
Welford update. Scoring happens in log space from cached tables that are
rebuilt lazily after the model changes.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .stream import Instance, Schema

VARIANCE_FLOOR = 1e-9
_LOG_2PI = math.log(2.0 * math.pi)


class SchemaMismatch(ValueError):
    pass


@numba.njit(cache=True, nogil=True)
def _joint_log_likelihood(log_prior, nom_table, codes, gauss, x, out):
    # gauss[0] = log-normalizer, gauss[1] = mean, gauss[2] = 1 / (2 var)
    n_classes = log_prior.shape[0]
    for k in range(n_classes):
        s = log_prior[k]
        for a in range(codes.shape[0]):
            c = codes[a]
            if c >= 0:
                s += nom_table[a, c, k]
        for a in range(x.shape[0]):
            v = x[a]
            if v == v:  # NaN marks a missing value
                d = v - gauss[1, a, k]
                s += gauss[0, a, k] - d * d * gauss[2, a, k]
        out[k] = s


@numba.njit(cache=True, nogil=True)
def _argmax_joint_log_likelihood(log_prior, nom_table, codes, gauss, x):
    best = 0
    best_score = -np.inf
    for k in range(log_prior.shape[0]):
        s = log_prior[k]
        for a in range(codes.shape[0]):
            c = codes[a]
            if c >= 0:
                s += nom_table[a, c, k]
        for a in range(x.shape[0]):
            v = x[a]
            if v == v:
                d = v - gauss[1, a, k]
                s += gauss[0, a, k] - d * d * gauss[2, a, k]
        if s > best_score:
            best_score = s
            best = k
    return best


class NaiveBayes:
    """Incremental Naive Bayes classifier over a fixed schema.

    Space is O(n_attr * n_value * n_class); learning and scoring one
    instance are O(n_attr * n_class).
    """

    def __init__(self, schema: Schema):
        self.schema = schema
        k = schema.n_classes
        n_nom = schema.n_nominal
        n_num = schema.n_numeric
        max_v = int(schema.nominal_sizes.max()) if n_nom else 1
        self._rows = np.arange(n_nom, dtype=np.intp)
        self._sizes = schema.nominal_sizes.astype(np.float64)
        self.class_counts = np.zeros(k)
        self.nominal_counts = np.zeros((n_nom, max_v, k))
        self.nominal_totals = np.zeros((n_nom, k))
        self.gauss_count = np.zeros((n_num, k))
        self.gauss_mean = np.zeros((n_num, k))
        self.gauss_m2 = np.zeros((n_num, k))
        self.total_seen = 0.0
        self._dirty = True
        self._log_prior = self._nom_table = self._gauss = None

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    def _check(self, instance: Instance):
        if getattr(instance, "schema", None) is self.schema:
            return
        if (instance.nominal.shape[0] != self.nominal_totals.shape[0]
                or instance.numeric.shape[0] != self.gauss_count.shape[0]):
            raise SchemaMismatch("instance layout does not match the model schema")

    def learn_one(self, instance: Instance, label: int | None = None, weight: float = 1.0) -> None:
        """Update all counters with one labeled instance.

        ``label`` defaults to the instance's visible class. ``weight`` acts
        as an integer multiplicity (online bagging) and may be fractional.
        """
        self._check(instance)
        y = instance.visible_class if label is None else label
        if y is None:
            raise ValueError("learn_one needs a label")
        if not 0 <= y < self.n_classes:
            raise SchemaMismatch(f"class index {y} out of range")
        if weight <= 0:
            return
        self.class_counts[y] += weight
        self.total_seen += weight
        codes = instance.nominal
        if codes.shape[0]:
            if instance.complete:
                self.nominal_counts[self._rows, codes, y] += weight
                self.nominal_totals[:, y] += weight
            else:
                present = codes >= 0
                rows = self._rows[present]
                self.nominal_counts[rows, codes[present], y] += weight
                self.nominal_totals[rows, y] += weight
        x = instance.numeric
        if x.shape[0]:
            if instance.complete:
                rows = slice(None)
            else:
                rows = ~np.isnan(x)
                x = x[rows]
            n_old = self.gauss_count[rows, y]
            n_new = n_old + weight
            mean = self.gauss_mean[rows, y]
            delta = x - mean
            mean_new = mean + delta * (weight / n_new)
            self.gauss_m2[rows, y] += weight * delta * (x - mean_new)
            self.gauss_mean[rows, y] = mean_new
            self.gauss_count[rows, y] = n_new
        self._dirty = True

    def gaussian_parameters(self) -> tuple[np.ndarray, np.ndarray]:
        """Per (attribute, class) mean and floored variance used for scoring.

        A class with no observations of an attribute borrows the pooled
        mean; a class with fewer than two borrows the pooled variance (or 1.0
        when the pool is also too small).
        """
        n = self.gauss_count
        n_all = n.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            pooled_mean = np.where(n_all > 0, (self.gauss_mean * n).sum(axis=1) / n_all, 0.0)
            # pooled M2 via the parallel-variance combination
            within = self.gauss_m2.sum(axis=1)
            between = (n * (self.gauss_mean - pooled_mean[:, None]) ** 2).sum(axis=1)
            pooled_var = np.where(n_all > 1, (within + between) / (n_all - 1), 1.0)
            mean = np.where(n > 0, self.gauss_mean, pooled_mean[:, None])
            var = np.where(n > 1, self.gauss_m2 / (n - 1), pooled_var[:, None])
        return mean, np.maximum(var, VARIANCE_FLOOR)

    def _rebuild(self):
        k = self.n_classes
        self._log_prior = np.log(self.class_counts + 1.0) - math.log(self.total_seen + k)
        if self._nom_table is None or self.nominal_counts.shape[0]:
            denom = np.log(self.nominal_totals + self._sizes[:, None])
            self._nom_table = np.log(self.nominal_counts + 1.0) - denom[:, None, :]
        gauss = np.zeros((3,) + self.gauss_count.shape)
        if self.gauss_count.shape[0]:
            mean, var = self.gaussian_parameters()
            # attributes nobody has observed yet contribute nothing
            seen = (self.gauss_count.sum(axis=1) > 0)[:, None]
            gauss[0] = np.where(seen, -0.5 * (_LOG_2PI + np.log(var)), 0.0)
            gauss[1] = mean
            gauss[2] = np.where(seen, 0.5 / var, 0.0)
        self._gauss = gauss
        self._dirty = False

    def joint_log_likelihood(self, instance: Instance) -> np.ndarray:
        self._check(instance)
        if self._dirty:
            self._rebuild()
        out = np.empty(self.n_classes)
        _joint_log_likelihood(self._log_prior, self._nom_table, instance.nominal,
                              self._gauss, instance.numeric, out)
        return out

    def predict_proba(self, instance: Instance) -> np.ndarray:
        if self.total_seen == 0:
            self._check(instance)
            return np.full(self.n_classes, 1.0 / self.n_classes)
        jll = self.joint_log_likelihood(instance)
        p = np.exp(jll - jll.max())
        return p / p.sum()

    def predict_one(self, instance: Instance) -> int:
        """Most probable class; ties go to the lowest class index."""
        self._check(instance)
        if self._dirty:
            self._rebuild()
        return _argmax_joint_log_likelihood(self._log_prior, self._nom_table, instance.nominal,
                                            self._gauss, instance.numeric)

    def state(self) -> tuple:
        """Snapshot of every counter, for equality checks."""
        return (
            self.total_seen,
            self.class_counts.tobytes(),
            self.nominal_counts.tobytes(),
            self.nominal_totals.tobytes(),
            self.gauss_count.tobytes(),
            self.gauss_mean.tobytes(),
            self.gauss_m2.tobytes(),
        )


def learn_one(model: NaiveBayes, instance: Instance, label: int | None = None) -> NaiveBayes:
    model.learn_one(instance, label)
    return model


def predict_proba(model: NaiveBayes, instance: Instance) -> np.ndarray:
    return model.predict_proba(instance)
