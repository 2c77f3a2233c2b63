"""Validated score matrices: per-example class-probability rows plus optional labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidRowError,
    LabelOutOfRangeError,
    MissingLabelsError,
    ValidationError,
)

# Rows whose probabilities sum further than this from 1 are rejected at
# ingestion, never renormalized.
SIMPLEX_ATOL = 1e-6


def check_alpha(alpha: float) -> float:
    """Validate a miscoverage level, returning it as a float."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in the open interval (0, 1), got {alpha}")
    return alpha


def check_row(row) -> np.ndarray:
    """Validate one probability row against the simplex invariants."""
    arr = np.asarray(row, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidRowError("a probability row must be a 1-D vector with at least 2 classes")
    if not np.all(np.isfinite(arr)):
        raise InvalidRowError("probability row contains a non-finite value")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidRowError("probability outside [0, 1]")
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_ATOL:
        raise InvalidRowError(f"row sums to {total!r}, off the simplex by more than {SIMPLEX_ATOL}")
    return arr


@dataclass
class ScoreMatrix:
    """N x C matrix of class probabilities, optionally with true labels.

    Invariants enforced at construction: every entry in [0, 1], every row
    sum within ``SIMPLEX_ATOL`` of 1, and labels (when present) integer
    class indices in [0, C-1], one per row.
    """

    probs: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[1] < 2:
            raise InvalidRowError("probs must be an N x C matrix with C >= 2")
        if not np.all(np.isfinite(probs)):
            bad = int(np.argwhere(~np.isfinite(probs))[0, 0])
            raise InvalidRowError(f"row {bad}: non-finite probability")
        out_of_range = (probs < 0.0) | (probs > 1.0)
        if np.any(out_of_range):
            bad = int(np.argwhere(out_of_range)[0, 0])
            raise InvalidRowError(f"row {bad}: probability outside [0, 1]")
        sums = probs.sum(axis=1)
        off = np.abs(sums - 1.0) > SIMPLEX_ATOL
        if np.any(off):
            bad = int(np.argmax(off))
            raise InvalidRowError(
                f"row {bad}: sums to {float(sums[bad])!r}, off the simplex by more than {SIMPLEX_ATOL}"
            )
        self.probs = probs
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != probs.shape[0]:
                raise ValidationError(
                    f"labels must be one integer per row, got shape {labels.shape} for N={probs.shape[0]}"
                )
            if not np.issubdtype(labels.dtype, np.integer):
                if not np.all(labels == labels.astype(np.int64)):
                    raise LabelOutOfRangeError("labels must be integers")
            labels = labels.astype(np.int64)
            if np.any((labels < 0) | (labels >= probs.shape[1])):
                bad = int(np.argmax((labels < 0) | (labels >= probs.shape[1])))
                raise LabelOutOfRangeError(
                    f"label {int(labels[bad])} at row {bad} outside [0, {probs.shape[1] - 1}]"
                )
            self.labels = labels

    @property
    def n_rows(self) -> int:
        return int(self.probs.shape[0])

    @property
    def n_classes(self) -> int:
        return int(self.probs.shape[1])

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise MissingLabelsError("score matrix has no labels")
        return self.labels

    def take(self, indices) -> "ScoreMatrix":
        """Row subset (copy), preserving labels when present."""
        idx = np.asarray(indices)
        labels = self.labels[idx].copy() if self.labels is not None else None
        return ScoreMatrix(self.probs[idx].copy(), labels)

    def with_labels(self, labels) -> "ScoreMatrix":
        """Same scores, new labels (validated)."""
        return ScoreMatrix(self.probs, labels)
