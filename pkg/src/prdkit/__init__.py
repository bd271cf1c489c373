"""Precision-recall curves between sample sets via classifier families."""

from .analysis import (
    Envelope,
    SummaryReport,
    auc,
    beta_at_eps,
    build_envelope,
    f_score,
    iou,
    pr_at_eps,
    pr_median,
    summarize,
)
from .classifiers import METHODS, FamilyConfig, ScoredTestSet, score_families
from .core import (
    LambdaGrid,
    PRCurve,
    PRPoint,
    RngStream,
    SampleSet,
    SplitSpec,
    make_lambda_grid,
    split_samples,
)
from .errors import InvalidArgument, InvalidSplit, NotPositiveDefinite, ParseError, PRDError, UndefinedMetric
from .estimator import CurveEnsemble, aggregate, estimate_curve, pareto_clean
from .extremes import coverage_extreme, eas_extreme, ipr_extreme, ppr_extreme, prc_extreme
from .ground_truth import GMM, Gaussian, GtConfig, gt_curve

__version__ = "0.1.0"
