"""Command-line surface.

Subcommands: calibrate, federate, predict, evaluate, synth, noise, plot.
Exit codes: 0 success, 1 validation/usage error, 2 I/O error. All
randomness flows from explicit --seed flags (default 0, never the clock).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._version import __version__
from .conformal import (
    aps_prediction_set,
    calibrate_quantile,
    conformity_scores,
    lac_prediction_set,
    naive_prediction_set,
)
from .errors import ValidationError
from .federation import FederationConfig, federated_quantile, inject_label_noise
from .harness import METHODS, run_experiment
from .io_formats import (
    FederationManifest,
    ManifestInstitution,
    load_manifest,
    manifest_institutions,
    manifest_to_plan,
    read_report,
    read_score_matrix,
    write_manifest,
    write_report,
    write_score_matrix,
)
from .synth import GeneratorSpec, generate, split_synthetic


class _Parser(argparse.ArgumentParser):
    # usage errors print the subcommand help; exit code is remapped in main()
    def error(self, message):
        sys.stderr.write(f"error: {message}\n\n")
        self.print_help(sys.stderr)
        raise SystemExit(2)


def _csv_floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _csv_ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def cmd_calibrate(args) -> int:
    matrix = read_score_matrix(args.scores)
    estimate = calibrate_quantile(conformity_scores(matrix, args.method), args.alpha)
    print(f"method {estimate.method}")
    print(f"n {estimate.n_calibration}")
    print(f"level {estimate.level!r}")
    print(f"qhat {estimate.qhat!r}")
    return 0


def cmd_federate(args) -> int:
    manifest = load_manifest(args.manifest)
    institutions = manifest_institutions(manifest)
    config = FederationConfig(institutions, manifest.alpha, manifest.method)
    fed = federated_quantile(config)
    print(f"method {config.method}")
    print(f"alpha {config.alpha!r}")
    print(f"n_institutions {len(institutions)}")
    print(f"qhat_global {fed.qhat_global!r}")
    for inst, estimate in zip(institutions, fed.per_client):
        print(
            f"client {inst.id} n {estimate.n_calibration} "
            f"level {estimate.level!r} qhat {estimate.qhat!r}"
        )
    return 0


def cmd_predict(args) -> int:
    matrix = read_score_matrix(args.scores)
    if args.method == "naive":
        if args.alpha is None:
            raise ValidationError("--alpha is required for the naive method")
        sets = [
            naive_prediction_set(matrix.probs[i], args.alpha, i) for i in range(matrix.n_rows)
        ]
    else:
        if args.qhat is None:
            raise ValidationError(f"--qhat is required for the {args.method} method")
        constructor = aps_prediction_set if args.method == "aps" else lac_prediction_set
        sets = [constructor(matrix.probs[i], args.qhat, i) for i in range(matrix.n_rows)]
    lines = [" ".join(str(c) for c in s.members) for s in sets]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)
    return 0


def cmd_evaluate(args) -> int:
    manifest = load_manifest(args.manifest)
    methods = tuple(args.methods.split(",")) if args.methods else None
    plan = manifest_to_plan(manifest, methods)
    report = run_experiment(plan)
    write_report(report, args.out)
    print(f"wrote {args.out}")
    if args.figures_dir:
        from .figures import render_report_figures

        for figure in render_report_figures(report, args.figures_dir):
            print(f"wrote {figure}")
    return 0


def cmd_synth(args) -> int:
    if bool(args.out) == bool(args.out_dir):
        raise ValidationError("choose exactly one of --out (single file) or --out-dir (split)")
    weights = tuple(_csv_floats(args.weights)) if args.weights else None
    if args.out:
        spec = GeneratorSpec(
            n_examples=args.n,
            n_classes=args.classes,
            concentration=args.concentration,
            temperature=args.temperature,
            class_weights=weights,
            seed=args.seed,
        )
        write_score_matrix(generate(spec), args.out)
        print(f"wrote {args.out}")
        return 0

    spec = GeneratorSpec(
        n_examples=1,  # replaced by split_synthetic
        n_classes=args.classes,
        concentration=args.concentration,
        temperature=args.temperature,
        class_weights=weights,
        seed=args.seed,
    )
    calibs, test = split_synthetic(spec, args.clients, args.calib_per_client, args.test)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    noise = _csv_floats(args.noise_fractions) if args.noise_fractions else [0.0] * args.clients
    if len(noise) != args.clients:
        raise ValidationError(
            f"--noise-fractions needs {args.clients} comma-separated values, got {len(noise)}"
        )
    entries = []
    for i, calib in enumerate(calibs):
        name = f"calib_{i}.csv"
        write_score_matrix(calib, out_dir / name)
        print(f"wrote {out_dir / name}")
        entries.append(ManifestInstitution(name, noise[i], args.seed + i))
    write_score_matrix(test, out_dir / "test.csv")
    print(f"wrote {out_dir / 'test.csv'}")
    manifest = FederationManifest(
        alpha=args.alpha,
        method=args.method,
        institutions=entries,
        test_path="test.csv",
        alphas=sorted(_csv_floats(args.alphas)) if args.alphas else [args.alpha],
        seeds=_csv_ints(args.trial_seeds) if args.trial_seeds else [args.seed],
        base_dir=out_dir,
    )
    write_manifest(manifest, out_dir / "manifest.json")
    print(f"wrote {out_dir / 'manifest.json'}")
    return 0


def cmd_noise(args) -> int:
    matrix = read_score_matrix(args.scores)
    write_score_matrix(inject_label_noise(matrix, args.fraction, args.seed), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_plot(args) -> int:
    from .figures import render_report_figures

    report = read_report(args.report)
    for figure in render_report_figures(report, args.out_dir):
        print(f"wrote {figure}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fedconformal",
        description="Conformal prediction sets from classifier score matrices, "
        "with federated quantile averaging.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="compute the conformity quantile of a labeled score file")
    p.add_argument("--scores", required=True, help="labeled score-matrix CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=["aps", "lac"], default="aps")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("federate", help="average per-institution quantiles from a manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_federate)

    p = sub.add_parser("predict", help="print one prediction set per example")
    p.add_argument("--scores", required=True)
    p.add_argument("--method", choices=["aps", "lac", "naive"], required=True)
    p.add_argument("--qhat", type=float, help="calibrated quantile (aps/lac)")
    p.add_argument("--alpha", type=float, help="miscoverage level (naive)")
    p.add_argument("--out", help="write sets here instead of stdout")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="run the naive/local/federated comparison from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--figures-dir", help="also render figures into this directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic score matrices")
    p.add_argument("--classes", type=int, default=9)
    p.add_argument("--concentration", type=float, default=1.0)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--weights", help="comma-separated class weights")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, help="rows for single-file mode")
    p.add_argument("--out", help="single-file mode: write one score matrix here")
    p.add_argument("--out-dir", help="split mode: write calib_*.csv, test.csv, manifest.json")
    p.add_argument("--clients", type=int, default=4, help="split mode: institutions")
    p.add_argument("--calib-per-client", type=int, default=500)
    p.add_argument("--test", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.1, help="split mode: manifest alpha")
    p.add_argument("--method", choices=["aps", "lac"], default="aps")
    p.add_argument("--noise-fractions", help="split mode: per-client noise, e.g. 0,0.3,0.3,0.3")
    p.add_argument("--alphas", help="split mode: manifest alpha grid, e.g. 0.05,0.1,0.2")
    p.add_argument("--trial-seeds", help="split mode: manifest trial seeds, e.g. 1,2,3")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("noise", help="write a label-corrupted copy of a score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("plot", help="render figures from an existing report")
    p.add_argument("--report", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed help (exit 0) or usage error (exit != 0)
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
