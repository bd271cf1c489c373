"""Experiment suites: Gaussian shifts, 4-mode mixtures, sample-size variability, hybrid.

Every repetition owns an :class:`RngStream` derived from the master seed and
its cell and repetition indices, so results do not depend on execution order
or on the number of worker processes.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .analysis import build_envelope, iou, summarize
from .classifiers import METHODS, K_RULES, resolve_k, score_families
from .core import PRCurve, RngStream, SampleSet, SplitSpec, _json_default, make_lambda_grid, split_samples
from .embeddings_io import read_embeddings, write_embeddings
from .errors import InvalidArgument, ParseError, UndefinedMetric
from .estimator import CurveEnsemble, aggregate, alpha_std, estimate_curve
from .ground_truth import GMM, Gaussian, GtConfig, gt_curve
from .linalg import fit_gaussian, fit_pca, pca_project
from .synthetic import SHIFT_MUS, GmmConfig, ShiftConfig, gmm_pair, shift_pair

SUITES = ("shift", "gmm", "variability", "hybrid")


@dataclass(frozen=True)
class Regime:
    """Split fraction (None = no split) and k rule of one table cell."""

    split: float | None = 0.5
    k: int | str = "sqrt_n"

    @property
    def tag(self) -> str:
        s = "split" if self.split is not None else "nosplit"
        return f"{s}_k{self.k}"


# iPR/Cov as originally defined: no split, k=4. The hybrid figures use it.
HYBRID_REGIME = Regime(None, 4)


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str = "shift"
    methods: tuple[str, ...] = METHODS
    regimes: tuple[Regime, ...] = (Regime(0.5, "sqrt_n"), Regime(None, "sqrt_n"))
    repetitions: int = 10
    seed: int = 0
    n: int = 10_000
    d: int = 64
    lambdas: int = 101
    n_gt: int = 100_000
    sigma: float | str = "auto"
    # shift
    mus: tuple[float, ...] = SHIFT_MUS
    # gmm
    gmm_preset: str = "main"
    # variability
    ns: tuple[int, ...] = (10, 100, 1000, 10_000)
    mu: float = 0.21
    # hybrid
    reference: str | None = None
    psi_files: dict = field(default_factory=dict)
    dims: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    setting: str = "a"
    mixture_psis: tuple[str, str, str] = ("0.3", "0.5", "0.9")
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.suite not in SUITES:
            raise InvalidArgument(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        for m in self.methods:
            if m not in METHODS:
                raise InvalidArgument(f"unknown method {m!r}")
        if self.repetitions < 1:
            raise InvalidArgument("repetitions must be >= 1")
        if self.setting not in ("a", "b", "c"):
            raise InvalidArgument(f"hybrid setting must be a, b or c, got {self.setting!r}")
        regs = tuple(r if isinstance(r, Regime) else Regime(**r) for r in self.regimes)
        for r in regs:
            if isinstance(r.k, str) and r.k not in K_RULES:
                raise InvalidArgument(f"unknown k rule {r.k!r}")
            if r.split is not None and not 0 < r.split < 1:
                raise InvalidArgument(f"split fraction must lie in (0, 1), got {r.split}")
        object.__setattr__(self, "regimes", regs)
        object.__setattr__(self, "methods", tuple(self.methods))

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise ParseError(f"unknown config keys: {sorted(extra)}")
        kw = dict(obj)
        for key in ("methods", "mus", "ns", "dims", "mixture_psis"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "regimes" in kw:
            kw["regimes"] = tuple(Regime(**r) for r in kw["regimes"])
        return cls(**kw)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except OSError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        except TypeError as exc:
            raise ParseError(f"{path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


def _workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("PRDKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidArgument(f"PRDKIT_THREADS must be an integer, got {env!r}") from None
    return 1


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


# -- one repetition -------------------------------------------------------


def estimate_curves(
    x: SampleSet,
    y: SampleSet,
    methods: Iterable[str],
    regime: Regime,
    grid,
    rng: RngStream,
    sigma: float | str = "auto",
) -> dict[str, PRCurve]:
    """Split (if requested), score with every method, and sweep each family."""
    if regime.split is not None:
        spec = SplitSpec(regime.split, True, rng.master_seed)
        tx, ty, sx, sy = split_samples(x, y, spec, rng.generator())
    else:
        tx, ty, sx, sy = x, y, None, None
    n_train = min(tx.n, ty.n)
    k = resolve_k(regime.k, n_train, min(x.n, y.n))
    scores = score_families(tx, ty, sx, sy, methods, k=k, sigma=sigma)
    meta = {"split": regime.split, "k_rule": regime.k, "seed": rng.master_seed, "stream": rng.stream_index}
    return {m: estimate_curve(s, grid, **meta) for m, s in scores.items()}


@dataclass(frozen=True)
class _RepJob:
    p: Any
    q: Any
    n: int
    methods: tuple[str, ...]
    regime: Regime
    lambdas: int
    stream: RngStream
    sigma: float | str


def _run_rep(job: _RepJob) -> dict[str, PRCurve]:
    x = SampleSet(job.p.sample(job.n, job.stream.child(0).generator()), "P")
    y = SampleSet(job.q.sample(job.n, job.stream.child(1).generator()), "Q")
    grid = make_lambda_grid(job.lambdas)
    return estimate_curves(x, y, job.methods, job.regime, grid, job.stream.child(2), job.sigma)


# -- tables ---------------------------------------------------------------


@dataclass
class IoUTable:
    key_name: str
    rows: list[dict] = field(default_factory=list)

    COLUMNS = ("method", "split", "k_rule", "k", "mean_iou", "std_iou", "iou_of_mean", "repetitions", "undefined")

    def add(self, key: Any, method: str, regime: Regime, k: int | None, ious: Sequence[float], iou_mean_curve: float) -> None:
        a = np.asarray(ious, dtype=float)
        ok = a[~np.isnan(a)]
        self.rows.append(
            {
                self.key_name: key,
                "method": method,
                "split": regime.split if regime.split is not None else "none",
                "k_rule": regime.k,
                "k": k,
                "mean_iou": float(ok.mean()) if ok.size else math.nan,
                "std_iou": float(ok.std()) if ok.size else math.nan,
                "iou_of_mean": float(iou_mean_curve),
                "repetitions": int(a.size),
                "undefined": int(a.size - ok.size),
            }
        )

    def lookup(self, key: Any, method: str, split: float | None = 0.5, k_rule: Any = None) -> dict:
        want = split if split is not None else "none"
        for r in self.rows:
            if r[self.key_name] == key and r["method"] == method and r["split"] == want:
                if k_rule is None or r["k_rule"] == k_rule:
                    return r
        raise KeyError((key, method, split, k_rule))

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=(self.key_name,) + self.COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


@dataclass
class SuiteResult:
    table: IoUTable
    curves: dict[str, PRCurve] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def write(self, run_dir: str | Path, cfg: ExperimentConfig) -> Path:
        run_dir = Path(run_dir)
        (run_dir / "curves").mkdir(parents=True, exist_ok=True)
        for name, c in self.curves.items():
            c.to_csv(run_dir / "curves" / f"{name}.csv")
        self.table.to_csv(run_dir / "iou_table.csv")
        summary = {"iou": self.table.rows, **self.extra}
        summary["summaries"] = {
            name: summarize(c).to_dict() for name, c in self.curves.items() if name.endswith("mean") or name.startswith("gt")
        }
        (run_dir / "summary.json").write_text(json.dumps(summary, default=_json_default, indent=2) + "\n")
        (run_dir / "config_echo.json").write_text(
            json.dumps(cfg.to_dict(), default=_json_default, indent=2) + "\n"
        )
        return run_dir


def _iou(a, b) -> float:
    """IoU, or NaN when both regions are empty (e.g. a fully separated truth)."""
    try:
        return iou(a, b)
    except UndefinedMetric:
        return math.nan


def _nanmean(v: Sequence[float]) -> float:
    a = np.asarray(v, dtype=float)
    a = a[~np.isnan(a)]
    return float(a.mean()) if a.size else math.nan


def _fmt(v: float) -> str:
    return f"{v:g}"


def _evaluate_cell(
    p, q, cfg: ExperimentConfig, cell: int, regime: Regime, gt: PRCurve, workers: int, n: int | None = None
) -> tuple[dict[str, list[float]], dict[str, PRCurve], int]:
    """R repetitions of one (models, regime) cell; per-method IoUs and mean curves."""
    n = n or cfg.n
    base = RngStream(cfg.seed, 0).child(cell)
    jobs = [
        _RepJob(p, q, n, cfg.methods, regime, cfg.lambdas, base.child(r), cfg.sigma) for r in range(cfg.repetitions)
    ]
    reps = _pmap(_run_rep, jobs, workers)
    gt_env = build_envelope(gt)
    ious = {m: [_iou(gt_env, build_envelope(rep[m])) for rep in reps] for m in cfg.methods}
    means = {m: aggregate([rep[m] for rep in reps])[0] for m in cfg.methods}
    n_train = n if regime.split is None else int(math.floor(regime.split * n))
    return ious, means, resolve_k(regime.k, n_train, n)


def run_shift(cfg: ExperimentConfig) -> SuiteResult:
    workers = _workers(cfg.workers)
    grid = make_lambda_grid(cfg.lambdas)
    table = IoUTable("mu")
    curves: dict[str, PRCurve] = {}
    cell = 0
    for mu in cfg.mus:
        p, q = shift_pair(ShiftConfig(mu, cfg.d, cfg.n))
        gt = gt_curve(p, q, GtConfig(cfg.n_gt, grid, cfg.seed))
        curves[f"gt_mu{_fmt(mu)}"] = gt
        gt_env = build_envelope(gt)
        for regime in cfg.regimes:
            ious, means, k = _evaluate_cell(p, q, cfg, cell, regime, gt, workers)
            cell += 1
            for m in cfg.methods:
                table.add(mu, m, regime, k, ious[m], _iou(gt_env, build_envelope(means[m])))
                curves[f"shift_mu{_fmt(mu)}_{regime.tag}_{m}_mean"] = means[m]
    return SuiteResult(table, curves)


def run_gmm(cfg: ExperimentConfig) -> SuiteResult:
    workers = _workers(cfg.workers)
    grid = make_lambda_grid(cfg.lambdas)
    p, q = gmm_pair(GmmConfig.preset(cfg.gmm_preset, d=cfg.d, n=cfg.n))
    gt = gt_curve(p, q, GtConfig(cfg.n_gt, grid, cfg.seed))
    gt_env = build_envelope(gt)
    table = IoUTable("preset")
    curves = {f"gt_gmm_{cfg.gmm_preset}": gt}
    for cell, regime in enumerate(cfg.regimes):
        ious, means, k = _evaluate_cell(p, q, cfg, cell, regime, gt, workers)
        for m in cfg.methods:
            table.add(cfg.gmm_preset, m, regime, k, ious[m], _iou(gt_env, build_envelope(means[m])))
            curves[f"gmm_{cfg.gmm_preset}_{regime.tag}_{m}_mean"] = means[m]
    return SuiteResult(table, curves)


def run_variability(cfg: ExperimentConfig, run_dir: str | Path | None = None) -> SuiteResult:
    """Mean and +/- sigma curves over repetitions for each sample size.

    ``extra['alpha_std'][method][n]`` holds the per-lambda standard deviation of alpha.
    """
    workers = _workers(cfg.workers)
    grid = make_lambda_grid(cfg.lambdas)
    p, q = shift_pair(ShiftConfig(cfg.mu, cfg.d, max(2, min(cfg.ns))))
    gt = gt_curve(p, q, GtConfig(cfg.n_gt, grid, cfg.seed))
    gt_env = build_envelope(gt)
    regime = cfg.regimes[0]
    table = IoUTable("n")
    curves = {f"gt_mu{_fmt(cfg.mu)}": gt}
    stds: dict[str, dict[int, list[float]]] = {m: {} for m in cfg.methods}
    for cell, n in enumerate(cfg.ns):
        base = RngStream(cfg.seed, 1).child(cell)
        jobs = [_RepJob(p, q, n, cfg.methods, regime, cfg.lambdas, base.child(r), cfg.sigma) for r in range(cfg.repetitions)]
        reps = _pmap(_run_rep, jobs, workers)
        n_train = n if regime.split is None else int(math.floor(regime.split * n))
        k = resolve_k(regime.k, n_train, n)
        for m in cfg.methods:
            ens = CurveEnsemble([rep[m] for rep in reps])
            mean, plus, minus = aggregate(ens)
            curves[f"variability_n{n}_{m}_mean"] = mean
            curves[f"variability_n{n}_{m}_plus_sigma"] = plus
            curves[f"variability_n{n}_{m}_minus_sigma"] = minus
            stds[m][n] = alpha_std(ens).tolist()
            table.add(n, m, regime, k, [_iou(gt_env, build_envelope(c)) for c in ens.repetitions], _iou(gt_env, build_envelope(mean)))
            if run_dir is not None:
                rep_dir = Path(run_dir) / "curves" / "variability" / f"n{n}" / m
                for r, c in enumerate(ens.repetitions):
                    c.to_csv(rep_dir / f"rep{r:03d}.csv", sidecar=False)
                mean.to_csv(rep_dir / "mean.csv")
                plus.to_csv(rep_dir / "plus_sigma.csv")
                minus.to_csv(rep_dir / "minus_sigma.csv")
    return SuiteResult(table, curves, {"alpha_std": stds, "lambdas": grid.values.tolist()})


# -- hybrid ---------------------------------------------------------------


def _fit_model(s: SampleSet) -> Gaussian:
    mean, cov = fit_gaussian(s)
    return Gaussian.from_cov(mean, cov)


def hybrid_models(cfg: ExperimentConfig) -> dict[int, list[tuple[str, Any, Any]]]:
    """Per projection dimension, the (label, P, Q) model pairs of the chosen setting."""
    if cfg.reference is None or not cfg.psi_files:
        raise InvalidArgument("hybrid suite needs a reference file and at least one psi file")
    ref = read_embeddings(cfg.reference, "reference")
    psis = {str(k): read_embeddings(v, f"psi={k}") for k, v in cfg.psi_files.items()}
    for lab, s in psis.items():
        if s.d != ref.d:
            raise InvalidArgument(f"psi file {lab} has d={s.d}, reference has d={ref.d}")
    dmax = max(cfg.dims)
    if dmax > ref.d:
        raise InvalidArgument(f"projection dimension {dmax} exceeds embedding dimension {ref.d}")
    basis = fit_pca(ref, dmax)
    out: dict[int, list] = {}
    for d in cfg.dims:
        g = {lab: _fit_model(pca_project(basis, s, d)) for lab, s in psis.items()}
        if cfg.setting == "a":
            g_ref = _fit_model(pca_project(basis, ref, d))
            out[d] = [(lab, g_ref, g[lab]) for lab in g]
        elif cfg.setting == "b":
            out[d] = [(lab, g[lab], g[lab]) for lab in g]
        else:
            a, b, c = cfg.mixture_psis
            missing = [lab for lab in (a, b, c) if lab not in g]
            if missing:
                raise InvalidArgument(f"setting c needs psi files labelled {missing}")
            half = np.array([0.5, 0.5])
            out[d] = [(f"{a}+{b}|{a}+{c}", GMM(half, (g[a], g[b])), GMM(half, (g[a], g[c])))]
    return out


def run_hybrid(cfg: ExperimentConfig) -> SuiteResult:
    """IoU against the fitted-model ground truth for each projection dimension.

    Setting a averages over psi files; settings b and c report each pair.
    """
    workers = _workers(cfg.workers)
    grid = make_lambda_grid(cfg.lambdas)
    models = hybrid_models(cfg)
    table = IoUTable("d")
    curves: dict[str, PRCurve] = {}
    cell = 0
    for d, pairs in models.items():
        for regime in cfg.regimes:
            per_method: dict[str, list[float]] = {m: [] for m in cfg.methods}
            of_mean: dict[str, list[float]] = {m: [] for m in cfg.methods}
            k_used = None
            for label, p, q in pairs:
                gt = gt_curve(p, q, GtConfig(cfg.n_gt, grid, cfg.seed))
                ious, means, k_used = _evaluate_cell(p, q, cfg, cell, regime, gt, workers)
                cell += 1
                curves[f"gt_hybrid{cfg.setting}_d{d}_{label}"] = gt
                gt_env = build_envelope(gt)
                for m in cfg.methods:
                    per_method[m].extend(ious[m])
                    of_mean[m].append(_iou(gt_env, build_envelope(means[m])))
                    curves[f"hybrid{cfg.setting}_d{d}_{label}_{regime.tag}_{m}_mean"] = means[m]
                if cfg.setting != "a":
                    for m in cfg.methods:
                        table.add(f"{d}|{label}", m, regime, k_used, ious[m], of_mean[m][-1])
            if cfg.setting == "a":
                for m in cfg.methods:
                    table.add(d, m, regime, k_used, per_method[m], _nanmean(of_mean[m]))
    return SuiteResult(table, curves)


def hybrid_series(table: IoUTable, method: str, regime_split: float | None = 0.5) -> dict[int, float]:
    """Mean IoU per dimension for one method, averaging over the pairs of settings b/c."""
    want = regime_split if regime_split is not None else "none"
    acc: dict[int, list[float]] = {}
    for r in table.rows:
        if r["method"] != method or r["split"] != want:
            continue
        d = int(str(r[table.key_name]).split("|")[0])
        acc.setdefault(d, []).append(r["mean_iou"])
    return {d: _nanmean(v) for d, v in sorted(acc.items())}


def run_suite(cfg: ExperimentConfig, run_dir: str | Path | None = None) -> SuiteResult:
    if cfg.suite == "shift":
        res = run_shift(cfg)
    elif cfg.suite == "gmm":
        res = run_gmm(cfg)
    elif cfg.suite == "variability":
        res = run_variability(cfg, run_dir)
    else:
        res = run_hybrid(cfg)
    if run_dir is not None:
        res.write(run_dir, cfg)
    return res


# -- surrogate embeddings -------------------------------------------------


def generate_surrogate(
    out_dir: str | Path,
    n: int = 2000,
    d: int = 64,
    spectrum: float = 1.0,
    psis: Sequence[float] = (0.3, 0.5, 0.7, 0.9, 1.0),
    seed: int = 0,
    fmt: str = "npy",
) -> dict:
    """Write a reference embedding file and one file per truncation value psi.

    The reference is Gaussian with eigenvalues ``i**-spectrum`` in a random
    orthonormal basis plus a heavy-tailed radial factor. A psi file mimics
    truncation: low psi means less diversity and a biased mean. Component i is
    shrunk by ``1 - (1 - psi) * w_i`` and shifted by ``(1 - psi) * w_i`` times
    a fixed center, where ``w_i`` is the component's standard deviation
    relative to the first, so the leading directions carry most of the
    effect. Returns a hybrid config dict sampling ``n`` points per side in the
    no-split k=4 regime.
    """
    if n < 2 or d < 1 or spectrum < 0:
        raise InvalidArgument(f"invalid surrogate parameters n={n}, d={d}, spectrum={spectrum}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    root = RngStream(seed, 7)
    rot, _ = np.linalg.qr(root.child(0).generator().standard_normal((d, d)))
    scale = np.arange(1, d + 1, dtype=float) ** (-spectrum / 2.0)
    center = root.child(1).generator().standard_normal(d) * scale
    weight = scale / scale[0]

    def draw(stream: RngStream, psi: float) -> np.ndarray:
        g = stream.generator()
        z = g.standard_normal((n, d)) * scale
        # Student-like radial factor so the data are not exactly Gaussian.
        radial = np.sqrt(g.chisquare(8, size=(n, 1)) / 8.0)
        cut = (1.0 - psi) * weight
        return ((z / radial) * (1.0 - cut) + cut * center) @ rot.T

    ext = {"npy": ".npy", "csv": ".csv", "raw": ".raw"}[fmt]
    ref_path = out / f"reference{ext}"
    write_embeddings(SampleSet(draw(root.child(2), 1.0).astype(np.float32)), ref_path, fmt)
    files = {}
    for i, psi in enumerate(psis):
        path = out / f"psi_{psi:g}{ext}"
        arr = draw(root.child(10 + i), float(psi))
        write_embeddings(SampleSet(arr.astype(np.float32)), path, fmt)
        files[f"{psi:g}"] = str(path)
    return {
        "suite": "hybrid",
        "reference": str(ref_path),
        "psi_files": files,
        "n": n,
        "dims": [k for k in (1, 2, 4, 8, 16, 32, 64, 128, 256) if k <= d],
        "regimes": [{"split": HYBRID_REGIME.split, "k": HYBRID_REGIME.k}],
    }
