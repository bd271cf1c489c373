"""Command-line interface.

Exit codes: 0 success, 2 bad flags, 3 unparsable input files, 4 numeric
preconditions violated (e.g. k larger than a sample set).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .errors import InvalidArgument, ParseError, PRDError

EXIT_FLAGS, EXIT_PARSE, EXIT_NUMERIC = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # pragma: no cover - argparse exits
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def _k_flag(text: str) -> int | str:
    if text in ("sqrt", "sqrt_n"):
        return text
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a positive integer, 'sqrt' or 'sqrt_n', got {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"k must be a positive integer, got {k}")
    return k


def _sigma_flag(text: str) -> float | str:
    if text == "auto":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma must be a positive number or 'auto', got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"sigma must be positive, got {v}")
    return v


def _split_flag(text: str) -> float | None:
    if text.lower() == "none":
        return None
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"split must be a fraction in (0, 1) or 'none', got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"split fraction must lie in (0, 1), got {v}")
    return v


def _pos_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _eps(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"eps must lie in (0, 1), got {v}")
    return v


def _pos_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="prdkit", description="Precision-recall curves between two sample sets.", formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("pr", help="estimate a PR curve between two embedding files", formatter_class=fmt)
    s.add_argument("--real", required=True, help="embedding file of the reference distribution P")
    s.add_argument("--fake", required=True, help="embedding file of the evaluated distribution Q")
    s.add_argument("--method", choices=("knn", "kde", "ipr", "cov"), default="knn", help="classifier family")
    s.add_argument("--k", type=_k_flag, default="sqrt", help="neighbors: integer, sqrt (per-class training size) or sqrt_n (per-set size)")
    s.add_argument("--sigma", type=_sigma_flag, default="auto", help="KDE radius or 'auto'")
    s.add_argument("--split", type=_split_flag, default=0.5, help="training fraction, or 'none'")
    s.add_argument("--lambdas", type=_pos_int, default=101, help="interior lambda grid size")
    s.add_argument("--seed", type=_seed, default=0, help="master seed")
    s.add_argument("--out", required=True, help="output CSV (metadata goes to a .json sidecar)")

    s = sub.add_parser("extremes", help="published extreme-precision metrics", formatter_class=fmt)
    s.add_argument("--real", required=True)
    s.add_argument("--fake", required=True)
    s.add_argument("--method", choices=("ipr", "cov", "eas", "prc", "ppr"), default="ipr", help="published metric")
    s.add_argument("--k", type=_k_flag, default="sqrt", help="neighbors: integer, sqrt or sqrt_n")
    s.add_argument("--kprime", type=_pos_int, default=3, help="PRC count threshold")
    s.add_argument("--radius", type=_pos_float, default=None, help="PPR radius (default: mean 4-NN distance within real)")
    s.add_argument("--split", type=_split_flag, default=None, help="training fraction, or 'none'")
    s.add_argument("--seed", type=_seed, default=0, help="master seed")
    s.add_argument("--out", default=None, help="JSON report path (stdout if omitted)")

    s = sub.add_parser("summarize", help="scalar summaries of a curve CSV", formatter_class=fmt)
    s.add_argument("--curve", required=True)
    s.add_argument("--eps", type=_eps, default=0.05, help="recall level for PR@eps and precision level for RP@eps")
    s.add_argument("--b", type=_pos_float, default=8.0, help="F-score weight; F_b and F_1/b are reported")
    s.add_argument("--out", default=None, help="JSON path (stdout if omitted)")

    s = sub.add_parser("iou", help="IoU of the regions under two curve CSVs", formatter_class=fmt)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)

    s = sub.add_parser("gt", help="Monte-Carlo ground-truth curve between two density models", formatter_class=fmt)
    s.add_argument("--p", required=True, help="model JSON of P")
    s.add_argument("--q", required=True, help="model JSON of Q")
    s.add_argument("--n-gt", type=_pos_int, default=100_000, help="Monte-Carlo samples per model")
    s.add_argument("--lambdas", type=_pos_int, default=101, help="interior lambda grid size")
    s.add_argument("--seed", type=_seed, default=0, help="master seed")
    s.add_argument("--out", default=None, help="output CSV (stdout if omitted)")

    s = sub.add_parser("exp", help="run an experiment suite", formatter_class=fmt)
    s.add_argument("--suite", choices=("shift", "gmm", "variability", "hybrid"), required=True)
    s.add_argument("--config", default=None, help="experiment config JSON")
    s.add_argument("--out", default="run", help="run directory")
    s.add_argument("--seed", type=_seed, default=None, help="override the config's master seed")

    s = sub.add_parser("plot", help="render curve CSVs as an SVG figure", formatter_class=fmt)
    s.add_argument("--curves", nargs="+", required=True)
    s.add_argument("--labels", nargs="*", default=None, help="legend entries (file stems if omitted)")
    s.add_argument("--title", default="", help="figure title")
    s.add_argument("--out", required=True)

    s = sub.add_parser("gen-surrogate", help="write synthetic embedding files for the hybrid suite", formatter_class=fmt)
    s.add_argument("--n", type=_pos_int, default=2000, help="points per file")
    s.add_argument("--d", type=_pos_int, default=64, help="embedding dimension")
    s.add_argument("--spectrum", type=float, default=1.0, help="eigenvalue decay exponent")
    s.add_argument("--psis", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9, 1.0], help="truncation levels, one file each")
    s.add_argument("--format", choices=("npy", "csv", "raw"), default="npy", help="file format")
    s.add_argument("--seed", type=_seed, default=0, help="master seed")
    s.add_argument("--out", required=True, help="output directory")
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _resolve_k(k, nx: int, ny: int, split: float | None) -> int:
    from .classifiers import resolve_k

    n_train = min(nx, ny) if split is None else int(min(nx, ny) * split)
    return resolve_k(k, max(1, n_train), min(nx, ny))


def cmd_pr(a: argparse.Namespace) -> int:
    from .classifiers import score_families
    from .core import SplitSpec, make_lambda_grid, split_samples
    from .embeddings_io import read_embeddings
    from .estimator import estimate_curve

    x = read_embeddings(a.real, "real")
    y = read_embeddings(a.fake, "fake")
    if x.d != y.d:
        raise InvalidArgument(f"--real has d={x.d} but --fake has d={y.d}")
    if a.split is not None:
        tx, ty, sx, sy = split_samples(x, y, SplitSpec(a.split, True, a.seed))
    else:
        tx, ty, sx, sy = x, y, None, None
    k = _resolve_k(a.k, x.n, y.n, a.split)
    scores = score_families(tx, ty, sx, sy, (a.method,), k=k, sigma=a.sigma)[a.method]
    curve = estimate_curve(
        scores,
        make_lambda_grid(a.lambdas),
        k_rule=a.k if isinstance(a.k, str) else None,
        split={"fraction": a.split, "enabled": a.split is not None, "seed": a.seed},
        seed=a.seed,
        real=str(a.real),
        fake=str(a.fake),
    )
    curve.to_csv(a.out)
    return 0


def cmd_extremes(a: argparse.Namespace) -> int:
    from .core import SplitSpec
    from .embeddings_io import read_embeddings
    from .extremes import extreme_report

    x = read_embeddings(a.real, "real")
    y = read_embeddings(a.fake, "fake")
    if x.d != y.d:
        raise InvalidArgument(f"--real has d={x.d} but --fake has d={y.d}")
    k = _resolve_k(a.k, x.n, y.n, a.split)
    split = SplitSpec(a.split, True, a.seed) if a.split is not None else None
    rep = extreme_report(x, y, a.method, k=k, kprime=a.kprime, radius=a.radius, split=split)
    _emit(json.dumps(rep.to_dict(), indent=2) + "\n", a.out)
    return 0


def cmd_summarize(a: argparse.Namespace) -> int:
    from .analysis import summarize
    from .core import PRCurve

    rep = summarize(PRCurve.from_csv(a.curve), eps=a.eps, b=a.b)
    _emit(rep.to_json(), a.out)
    return 0


def cmd_iou(a: argparse.Namespace) -> int:
    from .analysis import build_envelope, iou
    from .core import PRCurve

    v = iou(build_envelope(PRCurve.from_csv(a.a)), build_envelope(PRCurve.from_csv(a.b)))
    print(f"{v:.6f}")
    return 0


def cmd_gt(a: argparse.Namespace) -> int:
    from .core import make_lambda_grid
    from .ground_truth import GtConfig, gt_curve, load_model

    p, q = load_model(a.p), load_model(a.q)
    curve = gt_curve(p, q, GtConfig(a.n_gt, make_lambda_grid(a.lambdas), a.seed))
    if a.out is not None:
        curve.to_csv(a.out)
    else:
        sys.stdout.write(curve.csv_text())
    return 0


def cmd_exp(a: argparse.Namespace) -> int:
    from dataclasses import replace

    from .experiments import ExperimentConfig, run_suite

    if a.config is not None:
        cfg = ExperimentConfig.from_json(a.config)
        if cfg.suite != a.suite:
            cfg = replace(cfg, suite=a.suite)
    else:
        cfg = ExperimentConfig(suite=a.suite)
    if a.seed is not None:
        cfg = replace(cfg, seed=a.seed)
    res = run_suite(cfg, a.out)
    for row in res.table.rows:
        print(json.dumps(row))
    return 0


def cmd_plot(a: argparse.Namespace) -> int:
    from .core import PRCurve
    from .plotting import write_svg

    curves = [PRCurve.from_csv(c) for c in a.curves]
    labels = a.labels if a.labels else [Path(c).stem for c in a.curves]
    if len(labels) != len(curves):
        raise InvalidArgument(f"got {len(labels)} labels for {len(curves)} curves")
    write_svg(curves, a.out, labels, a.title)
    return 0


def cmd_gen_surrogate(a: argparse.Namespace) -> int:
    from .experiments import generate_surrogate

    cfg = generate_surrogate(a.out, n=a.n, d=a.d, spectrum=a.spectrum, psis=a.psis, seed=a.seed, fmt=a.format)
    (Path(a.out) / "hybrid_config.json").write_text(json.dumps(cfg, indent=2) + "\n")
    print(json.dumps(cfg))
    return 0


COMMANDS = {
    "pr": cmd_pr,
    "extremes": cmd_extremes,
    "summarize": cmd_summarize,
    "iou": cmd_iou,
    "gt": cmd_gt,
    "exp": cmd_exp,
    "plot": cmd_plot,
    "gen-surrogate": cmd_gen_surrogate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"prdkit {args.command}: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidArgument as exc:
        print(f"prdkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PRDError as exc:
        print(f"prdkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"prdkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
