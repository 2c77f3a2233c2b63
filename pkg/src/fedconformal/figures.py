"""Render evaluation-report figures to files.

Three views, mirroring the numbers the report carries: empirical coverage
against the confidence grid (with the ideal diagonal), mean set size
against the confidence grid, and mean set size above entropy percentiles.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import EvaluationReport

_METHOD_STYLE = {
    "naive": dict(color="tab:gray", marker="s"),
    "local_aps": dict(color="tab:blue", marker="o"),
    "federated_aps": dict(color="tab:green", marker="^"),
    "local_lac": dict(color="tab:orange", marker="o", linestyle="--"),
    "federated_lac": dict(color="tab:red", marker="^", linestyle="--"),
}


def _by_method(report: EvaluationReport) -> dict[str, list]:
    grouped: dict[str, list] = {}
    for result in report.results:
        grouped.setdefault(result.method, []).append(result)
    for results in grouped.values():
        results.sort(key=lambda r: r.alpha)
    return grouped


def _confidence_series(results, attr):
    xs = [1.0 - r.alpha for r in results]
    ys = [getattr(r, attr) for r in results]
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    return [xs[i] for i in order], [ys[i] for i in order]


def plot_coverage(report: EvaluationReport, path) -> Path:
    """Coverage by confidence level, one line per method, dashed ideal."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, results in _by_method(report).items():
        xs, ys = _confidence_series(results, "coverage")
        ax.plot(xs, ys, label=method, **_METHOD_STYLE.get(method, {}))
    lo = min(1.0 - r.alpha for r in report.results)
    hi = max(1.0 - r.alpha for r in report.results)
    ax.plot([lo, hi], [lo, hi], linestyle=":", color="black", label="ideal")
    ax.set_xlabel("confidence level (1 - alpha)")
    ax.set_ylabel("empirical coverage")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_cardinality(report: EvaluationReport, path) -> Path:
    """Mean prediction-set size by confidence level, one line per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, results in _by_method(report).items():
        xs, ys = _confidence_series(results, "mean_cardinality")
        ax.plot(xs, ys, label=method, **_METHOD_STYLE.get(method, {}))
    ax.set_xlabel("confidence level (1 - alpha)")
    ax.set_ylabel("mean set size")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_entropy_buckets(report: EvaluationReport, path, alpha: float | None = None) -> Path:
    """Mean set size among rows above each entropy percentile, per method.

    Uses the requested alpha, defaulting to the smallest on the grid
    (the highest-confidence, most differentiated sets).
    """
    alphas = sorted({r.alpha for r in report.results})
    target = alphas[0] if alpha is None else alpha
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, results in _by_method(report).items():
        rows = [r for r in results if r.alpha == target]
        if not rows:
            continue
        buckets = rows[0].entropy_bucket_sizes
        percentiles = sorted(buckets)
        ax.plot(
            percentiles,
            [buckets[p] for p in percentiles],
            label=method,
            **_METHOD_STYLE.get(method, {}),
        )
    ax.set_xlabel("entropy percentile")
    ax.set_ylabel("mean set size above percentile")
    ax.set_title(f"alpha = {target:g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_report_figures(report: EvaluationReport, out_dir) -> list[Path]:
    """Write the three standard figures into ``out_dir``; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        plot_coverage(report, out / "coverage_vs_confidence.png"),
        plot_cardinality(report, out / "cardinality_vs_confidence.png"),
        plot_entropy_buckets(report, out / "set_size_by_entropy_percentile.png"),
    ]
