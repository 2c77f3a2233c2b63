"""Multi-institution calibration: per-client quantiles and their average.

Institutions are simulated in-process; the protocol exchanges nothing but
scalar quantiles, so no transport layer exists here. Label noise is
injected per institution before calibration to stress-test robustness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conformal import APS, LAC, QuantileEstimate, calibrate_quantile, conformity_scores
from .errors import (
    EmptyCalibrationError,
    FederationEmptyError,
    TooFewRowsError,
    ValidationError,
)
from .matrix import ScoreMatrix, check_alpha


@dataclass
class Institution:
    """One simulated institution: a private labeled calibration set plus
    the label-noise setting applied before calibration."""

    id: int
    calibration: ScoreMatrix
    noise_fraction: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.calibration.n_rows == 0:
            raise EmptyCalibrationError(f"institution {self.id}: empty calibration set")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValidationError(
                f"institution {self.id}: noise_fraction must be in [0, 1], got {self.noise_fraction}"
            )


@dataclass
class FederationConfig:
    """K institutions plus the shared miscoverage level and scoring method."""

    institutions: list[Institution]
    alpha: float
    method: str = APS

    def __post_init__(self):
        if not self.institutions:
            raise FederationEmptyError("a federation needs at least one institution")
        self.alpha = check_alpha(self.alpha)
        if self.method not in (APS, LAC):
            raise ValidationError(f"method must be 'aps' or 'lac', got {self.method!r}")
        n_classes = {inst.calibration.n_classes for inst in self.institutions}
        if len(n_classes) != 1:
            raise ValidationError(f"institutions disagree on class count: {sorted(n_classes)}")

    @property
    def n_classes(self) -> int:
        return self.institutions[0].calibration.n_classes


@dataclass
class FederatedQuantile:
    """Arithmetic mean of the per-institution quantiles, plus the parts."""

    qhat_global: float
    per_client: list[QuantileEstimate] = field(repr=False)
    alpha: float = 0.0


def partition_dataset(full: ScoreMatrix, k: int, seed: int) -> list[ScoreMatrix]:
    """Seeded shuffle, then near-equal split into k disjoint score matrices.

    Partition sizes differ by at most one (larger parts first); the union
    of the parts is exactly the input.
    """
    if k < 1:
        raise ValidationError(f"partition count must be >= 1, got {k}")
    if full.n_rows < k:
        raise TooFewRowsError(f"cannot split {full.n_rows} rows into {k} partitions")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(full.n_rows)
    return [full.take(chunk) for chunk in np.array_split(perm, k)]


def inject_label_noise(calib: ScoreMatrix, fraction: float, seed: int) -> ScoreMatrix:
    """Resample labels uniformly over [0, C-1] on a seeded floor(fraction*N)-row subset.

    A resampled label may coincide with the original. Scores are untouched
    and the input matrix is not modified.
    """
    labels = calib.require_labels()
    if not 0.0 <= fraction <= 1.0:
        raise ValidationError(f"noise fraction must be in [0, 1], got {fraction}")
    n = calib.n_rows
    n_noisy = int(fraction * n + 1e-9)  # floor, guarded against float noise like 0.3*100
    out = labels.copy()
    if n_noisy > 0:
        rng = np.random.default_rng(seed)
        rows = rng.choice(n, size=n_noisy, replace=False)
        out[rows] = rng.integers(0, calib.n_classes, size=n_noisy)
    return ScoreMatrix(calib.probs, out)


def local_quantile(inst: Institution, alpha: float, method: str = APS) -> QuantileEstimate:
    """Calibrate one institution: inject its configured noise, score, take the quantile."""
    calib = inst.calibration
    if inst.noise_fraction > 0.0:
        calib = inject_label_noise(calib, inst.noise_fraction, inst.rng_seed)
    return calibrate_quantile(conformity_scores(calib, method), alpha)


def federated_quantile(config: FederationConfig) -> FederatedQuantile:
    """Average the K per-institution quantiles (accumulate, divide by K).

    The reduction is ordered by institution id, so computing the
    per-client quantiles in parallel can never change the result.
    """
    if not config.institutions:
        raise FederationEmptyError("a federation needs at least one institution")
    per_client = [
        local_quantile(inst, config.alpha, config.method) for inst in config.institutions
    ]
    by_id = sorted(zip(config.institutions, per_client), key=lambda pair: pair[0].id)
    total = sum(estimate.qhat for _, estimate in by_id)
    return FederatedQuantile(total / len(per_client), per_client, config.alpha)
