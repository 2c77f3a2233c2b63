"""Synthetic exchangeable score matrices from a Dirichlet generator.

Rows are i.i.d. probability vectors drawn from Dirichlet(concentration *
class_weights); each label is drawn from its own untempered row, and the
emitted scores are the tempered version of the row (p ** (1/temperature),
renormalized). With temperature 1 the reported scores equal the
label-generating distribution, so scores are perfectly calibrated;
temperature < 1 sharpens them, simulating the overconfident-softmax
regime, and temperature > 1 flattens them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpecError
from .matrix import ScoreMatrix


@dataclass
class GeneratorSpec:
    """Knobs for one synthetic draw. All numeric fields must be positive."""

    n_examples: int
    n_classes: int
    concentration: float = 1.0
    temperature: float = 1.0
    class_weights: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_examples < 1:
            raise InvalidSpecError(f"n_examples must be positive, got {self.n_examples}")
        if self.n_classes < 2:
            raise InvalidSpecError(f"n_classes must be >= 2, got {self.n_classes}")
        if not self.concentration > 0.0:
            raise InvalidSpecError(f"concentration must be positive, got {self.concentration}")
        if not self.temperature > 0.0:
            raise InvalidSpecError(f"temperature must be positive, got {self.temperature}")
        if self.class_weights is not None:
            weights = tuple(float(w) for w in self.class_weights)
            if len(weights) != self.n_classes:
                raise InvalidSpecError(
                    f"class_weights has {len(weights)} entries for {self.n_classes} classes"
                )
            if any(w <= 0.0 for w in weights):
                raise InvalidSpecError("class_weights must all be positive")
            self.class_weights = weights


def generate(spec: GeneratorSpec) -> ScoreMatrix:
    """Draw a labeled score matrix per the spec. Bit-identical for equal specs."""
    rng = np.random.default_rng(spec.seed)
    weights = (
        np.ones(spec.n_classes)
        if spec.class_weights is None
        else np.asarray(spec.class_weights, dtype=np.float64)
    )
    rows = rng.dirichlet(spec.concentration * weights, size=spec.n_examples)
    uniforms = rng.random(spec.n_examples)
    labels = (np.cumsum(rows, axis=1) < uniforms[:, None]).sum(axis=1)
    labels = np.minimum(labels, spec.n_classes - 1)
    scores = rows ** (1.0 / spec.temperature)
    scores = scores / scores.sum(axis=1, keepdims=True)
    return ScoreMatrix(scores, labels)


def split_synthetic(
    spec: GeneratorSpec, k: int, calib_per_client: int, n_test: int
) -> tuple[list[ScoreMatrix], ScoreMatrix]:
    """One exchangeable draw of k*calib_per_client + n_test rows, block-partitioned.

    Returns k calibration matrices of ``calib_per_client`` rows each plus a
    test matrix of ``n_test`` rows, disjoint and exhaustive. Rows are
    i.i.d., so block partitioning preserves exchangeability.
    """
    if k < 1 or calib_per_client < 1 or n_test < 1:
        raise InvalidSpecError(
            f"k, calib_per_client and n_test must be positive, got {k}, {calib_per_client}, {n_test}"
        )
    total = k * calib_per_client + n_test
    full = generate(replace(spec, n_examples=total))
    calibs = [
        full.take(np.arange(i * calib_per_client, (i + 1) * calib_per_client))
        for i in range(k)
    ]
    test = full.take(np.arange(k * calib_per_client, total))
    return calibs, test
