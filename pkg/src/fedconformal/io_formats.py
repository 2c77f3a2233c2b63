"""File formats and their strict parsers.

Score-matrix files are delimited text: header ``label,c0,c1,...,c{C-1}``,
then one row per example. The label column holds an integer class index,
with ``-1`` meaning unlabeled (a file is either fully labeled or fully
unlabeled). Probabilities are decimal literals written with full
round-trip precision. Parsing rejects, never repairs: rows off the
simplex by more than 1e-6, out-of-range labels, wrong arity, and mixed
labeledness all fail with the offending line number.

Federation manifests are JSON documents listing the institutions'
score files (with per-institution noise fraction and seed), the test
file, the alpha grid, and the trial seeds. Referenced paths are resolved
relative to the manifest's directory and must exist at load time.

Evaluation reports are JSON with sorted keys and all floats rounded to
6 decimal places, so equal reports serialize to identical bytes and a
parse/serialize cycle is lossless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    LabelOutOfRangeError,
    ParseError,
    SimplexViolationError,
    ValidationError,
)
from .harness import (
    METHODS,
    EvaluationReport,
    ExperimentPlan,
    MethodAlphaResult,
)
from .federation import FederationConfig, Institution
from .matrix import SIMPLEX_ATOL, ScoreMatrix

UNLABELED = -1


# -- score-matrix files --


def read_score_matrix(path) -> ScoreMatrix:
    """Parse and validate a delimited score-matrix file."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    rows = [(i + 1, line) for i, line in enumerate(lines) if line.strip()]
    if not rows:
        raise ParseError(f"{path}: empty file")

    header_line, header = rows[0]
    cells = header.split(",")
    if len(cells) < 3 or cells[0] != "label":
        raise ParseError(f"{path}: header must be 'label,c0,...', got {header!r}", header_line)
    n_classes = len(cells) - 1
    for i, cell in enumerate(cells[1:]):
        if cell != f"c{i}":
            raise ParseError(f"{path}: expected column 'c{i}', got {cell!r}", header_line)
    if len(rows) == 1:
        raise ParseError(f"{path}: no data rows")

    probs = np.empty((len(rows) - 1, n_classes), dtype=np.float64)
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    for out_idx, (line_no, line) in enumerate(rows[1:]):
        cells = line.split(",")
        if len(cells) != n_classes + 1:
            raise ParseError(
                f"{path}: expected {n_classes + 1} fields, got {len(cells)}", line_no
            )
        try:
            label = int(cells[0])
        except ValueError:
            raise ParseError(f"{path}: label {cells[0]!r} is not an integer", line_no) from None
        if label != UNLABELED and not 0 <= label < n_classes:
            raise LabelOutOfRangeError(
                f"{path}: label {label} outside [0, {n_classes - 1}]", line_no
            )
        try:
            values = [float(c) for c in cells[1:]]
        except ValueError:
            raise ParseError(f"{path}: malformed probability in {line!r}", line_no) from None
        if any(not math.isfinite(v) for v in values):
            raise SimplexViolationError(f"{path}: non-finite probability", line_no)
        if any(v < 0.0 or v > 1.0 for v in values):
            raise SimplexViolationError(f"{path}: probability outside [0, 1]", line_no)
        total = math.fsum(values)
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise SimplexViolationError(
                f"{path}: row sums to {total!r}, off the simplex by more than {SIMPLEX_ATOL}",
                line_no,
            )
        probs[out_idx] = values
        labels[out_idx] = label

    unlabeled = labels == UNLABELED
    if unlabeled.all():
        return ScoreMatrix(probs)
    if unlabeled.any():
        bad_line = rows[1:][int(np.argmax(unlabeled))][0]
        raise ParseError(
            f"{path}: mixes labeled and unlabeled rows (first unlabeled row here)", bad_line
        )
    return ScoreMatrix(probs, labels)


def write_score_matrix(matrix: ScoreMatrix, path) -> None:
    """Write a score matrix with full-precision decimal literals."""
    path = Path(path)
    header = "label," + ",".join(f"c{i}" for i in range(matrix.n_classes))
    lines = [header]
    labels = matrix.labels
    for i in range(matrix.n_rows):
        label = UNLABELED if labels is None else int(labels[i])
        lines.append(str(label) + "," + ",".join(repr(float(v)) for v in matrix.probs[i]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- federation manifests --


@dataclass
class ManifestInstitution:
    scores_path: str
    noise_fraction: float = 0.0
    seed: int = 0


@dataclass
class FederationManifest:
    alpha: float
    method: str
    institutions: list[ManifestInstitution]
    test_path: str
    alphas: list[float]
    seeds: list[int]
    entropy_scores_path: str | None = None
    base_dir: Path = Path(".")

    def resolve(self, rel: str) -> Path:
        return (self.base_dir / rel).resolve()


def _require(doc: dict, key: str, path):
    if key not in doc:
        raise ValidationError(f"{path}: manifest missing required key {key!r}")
    return doc[key]


def load_manifest(path) -> FederationManifest:
    """Load and validate a federation manifest; referenced files must exist."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: manifest must be a JSON object")

    raw_insts = _require(doc, "institutions", path)
    if not isinstance(raw_insts, list) or not raw_insts:
        raise ValidationError(f"{path}: 'institutions' must be a non-empty array")
    institutions = []
    for i, entry in enumerate(raw_insts):
        if not isinstance(entry, dict) or "scores_path" not in entry:
            raise ValidationError(f"{path}: institution {i} needs a 'scores_path'")
        institutions.append(
            ManifestInstitution(
                scores_path=str(entry["scores_path"]),
                noise_fraction=float(entry.get("noise_fraction", 0.0)),
                seed=int(entry.get("seed", 0)),
            )
        )

    alpha = float(_require(doc, "alpha", path))
    method = str(_require(doc, "method", path)).lower()
    test_path = str(_require(doc, "test_path", path))
    alphas = [float(a) for a in doc.get("alphas", [alpha])]
    seeds = [int(s) for s in doc.get("seeds", [0])]
    entropy_path = doc.get("entropy_scores_path")

    manifest = FederationManifest(
        alpha=alpha,
        method=method,
        institutions=institutions,
        test_path=test_path,
        alphas=alphas,
        seeds=seeds,
        entropy_scores_path=None if entropy_path is None else str(entropy_path),
        base_dir=path.parent,
    )
    referenced = [inst.scores_path for inst in manifest.institutions] + [manifest.test_path]
    if manifest.entropy_scores_path is not None:
        referenced.append(manifest.entropy_scores_path)
    for rel in referenced:
        if not manifest.resolve(rel).is_file():
            raise ValidationError(f"{path}: referenced file does not exist: {manifest.resolve(rel)}")
    return manifest


def write_manifest(manifest: FederationManifest, path) -> None:
    doc = {
        "alpha": manifest.alpha,
        "method": manifest.method,
        "institutions": [
            {
                "scores_path": inst.scores_path,
                "noise_fraction": inst.noise_fraction,
                "seed": inst.seed,
            }
            for inst in manifest.institutions
        ],
        "test_path": manifest.test_path,
        "alphas": manifest.alphas,
        "seeds": manifest.seeds,
        "entropy_scores_path": manifest.entropy_scores_path,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def manifest_institutions(manifest: FederationManifest) -> list[Institution]:
    """Read every institution's score file into an Institution."""
    institutions = []
    for i, entry in enumerate(manifest.institutions):
        matrix = read_score_matrix(manifest.resolve(entry.scores_path))
        if matrix.labels is None:
            raise ValidationError(
                f"calibration file must be labeled: {manifest.resolve(entry.scores_path)}"
            )
        institutions.append(Institution(i, matrix, entry.noise_fraction, entry.seed))
    return institutions


def manifest_to_plan(manifest: FederationManifest, methods=None) -> ExperimentPlan:
    """Build the comparison plan a manifest describes.

    By default the plan runs all five methods, reporting the naive
    baseline and both conformal families; pass ``methods`` to narrow it.
    """
    institutions = manifest_institutions(manifest)
    federation = FederationConfig(institutions, manifest.alpha, manifest.method)
    test = read_score_matrix(manifest.resolve(manifest.test_path))
    entropy_source = None
    if manifest.entropy_scores_path is not None:
        entropy_source = read_score_matrix(manifest.resolve(manifest.entropy_scores_path))
    return ExperimentPlan(
        federation=federation,
        test=test,
        alphas=sorted(manifest.alphas),
        seeds=list(manifest.seeds),
        methods=tuple(methods) if methods is not None else METHODS,
        entropy_source=entropy_source,
    )


# -- evaluation reports --


def _round_floats(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return round(value, 6)
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def report_to_doc(report: EvaluationReport) -> dict:
    return {
        "metadata": report.metadata,
        "results": [
            {
                "method": r.method,
                "alpha": r.alpha,
                "coverage": r.coverage,
                "std_coverage": r.std_coverage,
                "mean_cardinality": r.mean_cardinality,
                "std_cardinality": r.std_cardinality,
                "entropy_bucket_sizes": {repr(p): v for p, v in r.entropy_bucket_sizes.items()},
                "spearman_rho": r.spearman_rho,
                "degenerate_entropy": r.degenerate_entropy,
            }
            for r in report.results
        ],
    }


def write_report(report: EvaluationReport, path) -> None:
    """Serialize a report deterministically: sorted keys, 6-decimal floats."""
    doc = _round_floats(report_to_doc(report))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def read_report(path) -> EvaluationReport:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    results = [
        MethodAlphaResult(
            method=r["method"],
            alpha=float(r["alpha"]),
            coverage=float(r["coverage"]),
            std_coverage=float(r["std_coverage"]),
            mean_cardinality=float(r["mean_cardinality"]),
            std_cardinality=float(r["std_cardinality"]),
            entropy_bucket_sizes={float(p): float(v) for p, v in r["entropy_bucket_sizes"].items()},
            spearman_rho=float(r["spearman_rho"]),
            degenerate_entropy=bool(r["degenerate_entropy"]),
        )
        for r in doc.get("results", [])
    ]
    return EvaluationReport(results, doc.get("metadata", {}))
