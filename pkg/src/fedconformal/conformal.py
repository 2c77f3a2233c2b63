"""Split-conformal primitives.

Conformity scores, finite-sample-corrected quantile calibration, and the
three prediction-set constructors:

* adaptive (``aps_*``): calibrate on the cumulative descending-sorted
  probability mass through the true class; at test time keep the longest
  descending-order prefix whose cumulative mass stays within the
  calibrated budget q-hat.
* raw-threshold (``lac_*``): calibrate on 1 minus the true-class
  probability; at test time keep every class scoring strictly above
  1 - q-hat.
* naive: no calibration at all; keep adding classes until cumulative
  mass reaches 1 - alpha.

All functions are pure: no shared mutable state, safe to call from any
number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCalibrationError, ValidationError
from .matrix import ScoreMatrix, check_alpha, check_row

APS = "aps"
LAC = "lac"

# Slack for cumulative-mass comparisons, applied on the inclusive side
# only: float summation can land ulps short of a decimal boundary
# (sum([0.4, 0.3, 0.2]) == 0.8999999999999999) and must not drop a class
# that exact arithmetic would keep.
_CUM_TOL = 1e-12


@dataclass
class ConformityScores:
    """Per-example conformity values in [0, 1] plus the scoring-rule tag."""

    values: np.ndarray
    method: str  # "aps_cumulative" | "lac_residual"


@dataclass
class QuantileEstimate:
    """Calibrated conformity threshold together with its provenance.

    ``level`` is the corrected quantile level ceil((N+1)(1-alpha))/N and
    may exceed 1 for tiny N, in which case ``qhat`` was clamped to the
    maximum conformity score.
    """

    qhat: float
    alpha: float
    n_calibration: int
    level: float
    method: str  # "aps" | "lac"


@dataclass
class PredictionSet:
    """Ordered class indices for one example, descending by score."""

    members: tuple[int, ...]
    example_index: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, label) -> bool:
        return int(label) in self.members


def _descending_order(row: np.ndarray) -> np.ndarray:
    # stable sort on the negated row: ties resolve to the lower class index
    return np.argsort(-row, kind="stable")


def _qhat_value(qhat) -> float:
    q = qhat.qhat if isinstance(qhat, QuantileEstimate) else float(qhat)
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"qhat must be in [0, 1], got {q}")
    return float(q)


def aps_conformity_scores(calib: ScoreMatrix) -> ConformityScores:
    """Cumulative descending-sorted probability mass through each true class.

    For each row, sort the class scores descending and accumulate until
    the true class is included; that cumulative mass is the example's
    conformity score. One-hot rows with the correct label score 1.0.
    """
    labels = calib.require_labels()
    probs = calib.probs
    order = np.argsort(-probs, axis=1, kind="stable")
    sorted_probs = np.take_along_axis(probs, order, axis=1)
    cumulative = np.cumsum(sorted_probs, axis=1)
    rank = np.argmax(order == labels[:, None], axis=1)
    values = cumulative[np.arange(probs.shape[0]), rank]
    return ConformityScores(np.clip(values, 0.0, 1.0), "aps_cumulative")


def lac_conformity_scores(calib: ScoreMatrix) -> ConformityScores:
    """One minus the true-class probability (residual conformity)."""
    labels = calib.require_labels()
    values = 1.0 - calib.probs[np.arange(calib.n_rows), labels]
    return ConformityScores(np.clip(values, 0.0, 1.0), "lac_residual")


def conformity_scores(calib: ScoreMatrix, method: str) -> ConformityScores:
    """Dispatch to the scorer for ``method`` ("aps" or "lac")."""
    if method == APS:
        return aps_conformity_scores(calib)
    if method == LAC:
        return lac_conformity_scores(calib)
    raise ValidationError(f"unknown conformity method {method!r}, expected 'aps' or 'lac'")


def _order_index(n: int, alpha: float) -> int:
    # round before the ceiling: IEEE products like 10 * (1 - 0.1) can land
    # ulps past the intended integer and would tip k one step too high
    return math.ceil(round((n + 1) * (1.0 - alpha), 9))


def quantile_level(n: int, alpha: float) -> float:
    """Finite-sample-corrected quantile level ceil((n+1)(1-alpha))/n.

    May exceed 1 when n < (1-alpha)/alpha; callers clamp to the maximum
    conformity score in that case.
    """
    alpha = check_alpha(alpha)
    if n < 1:
        raise ValidationError(f"calibration size must be >= 1, got {n}")
    return _order_index(n, alpha) / n


def calibrate_quantile(scores: ConformityScores, alpha: float) -> QuantileEstimate:
    """Empirical conformity quantile at the corrected level.

    Returns the k-th smallest conformity score, k = ceil((N+1)(1-alpha)),
    with no interpolation (ties take the higher order statistic). When
    k > N the quantile clamps to the maximum score and prediction sets
    become maximally conservative.
    """
    alpha = check_alpha(alpha)
    values = np.asarray(scores.values, dtype=np.float64)
    n = int(values.shape[0])
    if n == 0:
        raise EmptyCalibrationError("cannot calibrate a quantile on zero conformity scores")
    k = _order_index(n, alpha)
    ordered = np.sort(values)
    qhat = ordered[-1] if k > n else ordered[k - 1]
    method = APS if scores.method == "aps_cumulative" else LAC
    return QuantileEstimate(float(qhat), alpha, n, k / n, method)


def aps_prediction_set(test_row, qhat, example_index: int = 0) -> PredictionSet:
    """Adaptive set: longest descending-order prefix with cumulative mass <= qhat.

    Always returns at least the argmax class. Accepts a QuantileEstimate
    or a bare float in [0, 1].
    """
    row = check_row(test_row)
    q = _qhat_value(qhat)
    order = _descending_order(row)
    cumulative = np.cumsum(row[order])
    k = int(np.count_nonzero(cumulative <= q + _CUM_TOL))
    k = max(k, 1)
    return PredictionSet(tuple(int(c) for c in order[:k]), example_index)


def lac_prediction_set(test_row, qhat, example_index: int = 0) -> PredictionSet:
    """Raw-threshold set: classes scoring strictly above 1 - qhat.

    Falls back to the singleton argmax (lowest index on ties) when no
    class clears the threshold.
    """
    row = check_row(test_row)
    q = _qhat_value(qhat)
    threshold = 1.0 - q
    order = _descending_order(row)
    members = [int(c) for c in order if row[c] > threshold]
    if not members:
        members = [int(np.argmax(row))]
    return PredictionSet(tuple(members), example_index)


def naive_prediction_set(test_row, alpha: float, example_index: int = 0) -> PredictionSet:
    """Uncalibrated set: add classes in descending order until mass reaches 1 - alpha."""
    row = check_row(test_row)
    alpha = check_alpha(alpha)
    order = _descending_order(row)
    cumulative = np.cumsum(row[order])
    k = int(np.count_nonzero(cumulative < (1.0 - alpha) - _CUM_TOL)) + 1
    k = min(k, row.shape[0])
    return PredictionSet(tuple(int(c) for c in order[:k]), example_index)


def class_entropy(row) -> float:
    """Natural-log entropy of one probability row, with 0 log 0 taken as 0."""
    arr = check_row(row)
    nonzero = arr[arr > 0.0]
    return float(-(nonzero * np.log(nonzero)).sum())


def row_entropies(matrix: ScoreMatrix) -> np.ndarray:
    """Natural-log entropy of every row of a score matrix."""
    probs = matrix.probs
    terms = np.where(probs > 0.0, probs * np.log(np.where(probs > 0.0, probs, 1.0)), 0.0)
    return -terms.sum(axis=1)
