"""Alignment statistics between objective metric scores and human ratings.

Pipeline: per-rater z-scoring of Likert ratings, outlier-screened mean
opinion scores per image pair, then three analyses per metric (direct rank
correlation, variance-weighted linear regression, and a four-parameter
logistic fit) plus inter-rater reliability. Population standard deviations
are used throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

LIKERT_LABELS = {
    1: "Highly Dissimilar",
    2: "Dissimilar",
    3: "Moderately Similar",
    4: "Similar",
    5: "Highly Similar",
}


class RatingFormatError(ValueError):
    """Raised when a ratings document does not match the expected shape."""


class DegenerateDataError(ValueError):
    """Raised when the data cannot support the requested statistic."""


class LogisticFitError(RuntimeError):
    """All logistic fit attempts failed numerically; carries the best partial fit."""

    def __init__(self, message: str, partial: Optional["LogisticParams"] = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class RatingRecord:
    rater_id: str
    pair_id: str
    score: int

    def __post_init__(self) -> None:
        if self.score not in LIKERT_LABELS:
            raise RatingFormatError(
                f"score must be an integer 1-5, got {self.score!r}"
            )


@dataclass(frozen=True)
class ZScoredRating:
    rater_id: str
    pair_id: str
    score: int
    z: float


@dataclass(frozen=True)
class MosEntry:
    pair_id: str
    mos: float
    variance: float
    retained_count: int


@dataclass(frozen=True)
class LogisticParams:
    beta1: float
    beta2: float
    beta3: float
    beta4: float

    def predict(self, x: np.ndarray) -> np.ndarray:
        return _logistic(x, self.beta1, self.beta2, self.beta3, self.beta4)


@dataclass(frozen=True)
class BranchScores:
    cc: float
    mae: float
    rms: float
    outlier_ratio: float


@dataclass(frozen=True)
class MetricAlignment:
    name: str
    weighted: BranchScores
    logistic: BranchScores
    srocc: float


@dataclass(frozen=True)
class AlignmentReport:
    """Per-metric alignment rows (sorted by SROCC descending) plus inter-rater SROCC."""

    rows: tuple[MetricAlignment, ...]
    inter_rater_srocc: float
    pair_count: int
    flagged_raters: tuple[str, ...] = ()

    def to_obj(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "metrics": [
                {
                    "name": row.name,
                    "weighted": {
                        "cc": row.weighted.cc,
                        "mae": row.weighted.mae,
                        "rms": row.weighted.rms,
                        "outlier_ratio": row.weighted.outlier_ratio,
                    },
                    "logistic": {
                        "cc": row.logistic.cc,
                        "mae": row.logistic.mae,
                        "rms": row.logistic.rms,
                        "outlier_ratio": row.logistic.outlier_ratio,
                    },
                    "srocc": row.srocc,
                }
                for row in self.rows
            ],
            "inter_rater_srocc": self.inter_rater_srocc,
            "flagged_raters": list(self.flagged_raters),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2, ensure_ascii=False) + "\n"

    def to_table(self) -> str:
        header = (
            f"{'Metric':<12} "
            f"{'W-CC':>7} {'W-MAE':>7} {'W-RMS':>7} {'W-OR':>6}  "
            f"{'N-CC':>7} {'N-MAE':>7} {'N-RMS':>7} {'N-OR':>6}  "
            f"{'SROCC':>7}"
        )
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row.name:<12} "
                f"{row.weighted.cc:>7.3f} {row.weighted.mae:>7.3f} "
                f"{row.weighted.rms:>7.3f} {row.weighted.outlier_ratio:>6.3f}  "
                f"{row.logistic.cc:>7.3f} {row.logistic.mae:>7.3f} "
                f"{row.logistic.rms:>7.3f} {row.logistic.outlier_ratio:>6.3f}  "
                f"{row.srocc:>7.3f}"
            )
        lines.append("-" * len(header))
        lines.append(f"{'Human':<12} {'':>62} {self.inter_rater_srocc:>7.3f}")
        return "\n".join(lines) + "\n"


def load_ratings(text: str) -> list[RatingRecord]:
    """Parse the ratings interchange format: a JSON array of {rater, pair, score}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RatingFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise RatingFormatError("ratings file must hold a JSON array")
    records = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or not {"rater", "pair", "score"} <= item.keys():
            raise RatingFormatError(f"rating {i} must have rater, pair, and score")
        score = item["score"]
        if not isinstance(score, int) or isinstance(score, bool):
            raise RatingFormatError(f"rating {i}: score must be an integer 1-5")
        records.append(
            RatingRecord(rater_id=str(item["rater"]), pair_id=str(item["pair"]), score=score)
        )
    return records


def load_metric_scores(text: str) -> dict[str, float]:
    """Parse a metric-scores file: a JSON object mapping pair id to score."""
    data = json.loads(text)
    if not isinstance(data, dict):
        raise RatingFormatError("metric-scores file must hold a JSON object")
    out = {}
    for pair_id, value in data.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise RatingFormatError(f"score for pair {pair_id!r} must be a number")
        out[str(pair_id)] = float(value)
    return out


def zscore_normalize(
    ratings: Sequence[RatingRecord],
) -> tuple[list[ZScoredRating], list[str]]:
    """Normalize each rater's scores to z-scores (population std).

    Raters whose scores have zero variance get z = 0 everywhere and are
    returned in the flagged list.
    """
    by_rater: dict[str, list[RatingRecord]] = {}
    for record in ratings:
        by_rater.setdefault(record.rater_id, []).append(record)

    flagged: list[str] = []
    stats: dict[str, tuple[float, float]] = {}
    for rater_id, records in by_rater.items():
        scores = np.array([r.score for r in records], dtype=np.float64)
        mean = float(scores.mean())
        std = float(scores.std())
        if std == 0.0:
            flagged.append(rater_id)
        stats[rater_id] = (mean, std)

    out = []
    for record in ratings:
        mean, std = stats[record.rater_id]
        z = 0.0 if std == 0.0 else (record.score - mean) / std
        out.append(
            ZScoredRating(rater_id=record.rater_id, pair_id=record.pair_id,
                          score=record.score, z=z)
        )
    return out, flagged


def compute_mos(z_ratings: Sequence[ZScoredRating]) -> list[MosEntry]:
    """Screen each pair's z-scores for 2-sigma outliers, then average.

    A pair keeps every rating whose z lies within two standard deviations of
    the pair mean; if that would leave fewer than two ratings, nothing is
    discarded. Returned entries are sorted by pair id.
    """
    by_pair: dict[str, list[float]] = {}
    for record in z_ratings:
        by_pair.setdefault(record.pair_id, []).append(record.z)

    entries = []
    for pair_id in sorted(by_pair):
        zs = np.array(by_pair[pair_id], dtype=np.float64)
        mean = zs.mean()
        std = zs.std()
        retained = zs[np.abs(zs - mean) <= 2.0 * std]
        if retained.size < 2:
            retained = zs
        entries.append(
            MosEntry(
                pair_id=pair_id,
                mos=float(retained.mean()),
                variance=float(retained.var()),
                retained_count=int(retained.size),
            )
        )
    return entries


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_values = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xm = x - x.mean()
    ym = y - y.mean()
    denom = math.sqrt(float((xm * xm).sum()) * float((ym * ym).sum()))
    if denom == 0.0:
        raise DegenerateDataError("undefined correlation: constant sequence")
    return float((xm * ym).sum()) / denom


def srocc(x: Sequence[float], y: Sequence[float]) -> float:
    """Absolute Spearman rank-order correlation (average ranks for ties)."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.size != ys.size:
        raise ValueError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < 3:
        raise ValueError("need at least 3 observations")
    return abs(_pearson(_average_ranks(xs), _average_ranks(ys)))


def _fallback_positive(values: np.ndarray) -> np.ndarray:
    """Replace zeros with the smallest positive value; all-zero becomes all-one."""
    positive = values[values > 0.0]
    if positive.size == 0:
        return np.ones_like(values)
    out = values.copy()
    out[out == 0.0] = positive.min()
    return out


def _outlier_ratio(predictions: np.ndarray, mos: Sequence[MosEntry]) -> float:
    y = np.array([m.mos for m in mos])
    stds = _fallback_positive(np.sqrt(np.array([m.variance for m in mos])))
    return float(np.mean(np.abs(predictions - y) > 2.0 * stds))


def _abs_cc_or_zero(predictions: np.ndarray, y: np.ndarray) -> float:
    try:
        return abs(_pearson(predictions, y))
    except DegenerateDataError:
        return 0.0


@dataclass(frozen=True)
class WeightedFit:
    slope: float
    intercept: float
    scores: BranchScores

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.slope * x + self.intercept


def weighted_linear_fit(x: Sequence[float], mos: Sequence[MosEntry]) -> WeightedFit:
    """Variance-weighted least-squares line from metric scores to MOS.

    Weights are inverse per-pair rating variances (zero variances borrow the
    smallest positive one). Reports the weighted absolute correlation, the
    weighted MAE/RMS of the predictions, and the 2-sigma outlier ratio.
    """
    xs = np.asarray(x, dtype=np.float64)
    if xs.size != len(mos):
        raise ValueError(f"length mismatch: {xs.size} scores vs {len(mos)} MOS entries")
    if xs.size < 3:
        raise ValueError("need at least 3 pairs")
    if np.all(xs == xs[0]):
        raise DegenerateDataError("metric scores are all equal; cannot fit a line")

    y = np.array([m.mos for m in mos])
    w = 1.0 / _fallback_positive(np.array([m.variance for m in mos]))

    sw = w.sum()
    swx = (w * xs).sum()
    swy = (w * y).sum()
    swxx = (w * xs * xs).sum()
    swxy = (w * xs * y).sum()
    det = sw * swxx - swx * swx
    slope = (sw * swxy - swx * swy) / det
    intercept = (swxx * swy - swx * swxy) / det

    pred = slope * xs + intercept
    resid = pred - y

    pred_mean = (w * pred).sum() / sw
    y_mean = (w * y).sum() / sw
    cov = (w * (pred - pred_mean) * (y - y_mean)).sum()
    var_p = (w * (pred - pred_mean) ** 2).sum()
    var_y = (w * (y - y_mean) ** 2).sum()
    cc = 0.0 if var_p == 0.0 or var_y == 0.0 else abs(cov / math.sqrt(var_p * var_y))

    return WeightedFit(
        slope=float(slope),
        intercept=float(intercept),
        scores=BranchScores(
            cc=float(cc),
            mae=float((w * np.abs(resid)).sum() / sw),
            rms=float(math.sqrt((w * resid * resid).sum() / sw)),
            outlier_ratio=_outlier_ratio(pred, mos),
        ),
    )


_LOGISTIC_MAX_ITER = 500
_LOGISTIC_TOL = 1e-10
_LOGISTIC_RESTARTS = 8


def _logistic(x: np.ndarray, b1: float, b2: float, b3: float, b4: float) -> np.ndarray:
    scale = max(abs(b4), 1e-9)
    t = np.clip((x - b3) / scale, -500.0, 500.0)
    return (b1 - b2) / (1.0 + np.exp(-t)) + b2


def _logistic_jacobian(x: np.ndarray, b: np.ndarray) -> np.ndarray:
    b1, b2, b3, b4 = b
    scale = max(abs(b4), 1e-9)
    t = np.clip((x - b3) / scale, -500.0, 500.0)
    sig = 1.0 / (1.0 + np.exp(-t))
    dsig = sig * (1.0 - sig)
    jac = np.empty((x.size, 4))
    jac[:, 0] = sig
    jac[:, 1] = 1.0 - sig
    jac[:, 2] = -(b1 - b2) * dsig / scale
    jac[:, 3] = -(b1 - b2) * dsig * (x - b3) * math.copysign(1.0, b4) / (scale * scale)
    return jac


def _fit_once(
    x: np.ndarray, y: np.ndarray, init: np.ndarray
) -> tuple[np.ndarray, float, bool, bool]:
    """One damped Gauss-Newton descent. Returns (params, sse, converged, usable)."""
    b = init.astype(np.float64).copy()
    resid = y - _logistic(x, *b)
    sse = float(resid @ resid)
    if not math.isfinite(sse):
        return b, math.inf, False, False
    lam = 1e-3
    for _ in range(_LOGISTIC_MAX_ITER):
        jac = _logistic_jacobian(x, b)
        jtj = jac.T @ jac
        grad = jac.T @ resid
        improved = False
        for _ in range(25):
            damped = jtj + lam * np.diag(np.diag(jtj).clip(min=1e-12))
            try:
                delta = np.linalg.solve(damped, grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = b + delta
            trial_resid = y - _logistic(x, *trial)
            trial_sse = float(trial_resid @ trial_resid)
            if math.isfinite(trial_sse) and trial_sse < sse:
                rel_change = (sse - trial_sse) / max(sse, 1e-300)
                b, resid, sse = trial, trial_resid, trial_sse
                lam = max(lam / 10.0, 1e-12)
                improved = True
                if rel_change < _LOGISTIC_TOL:
                    return b, sse, True, True
                break
            lam *= 10.0
        if not improved:
            # no damping level yields an improving step: a local minimum
            return b, sse, True, True
    return b, sse, False, True


@dataclass(frozen=True)
class LogisticFit:
    params: LogisticParams
    scores: BranchScores
    sse: float
    converged: bool


def logistic_fit(x: Sequence[float], mos: Sequence[MosEntry]) -> LogisticFit:
    """Fit the 4-parameter logistic mapping metric scores to MOS.

    y = (b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2, fitted by damped
    Gauss-Newton from b1=max(y), b2=min(y), b3=median(x), b4=std(x). On
    non-convergence, eight perturbed initializations are tried and the best
    sum of squared errors wins.
    """
    xs = np.asarray(x, dtype=np.float64)
    if xs.size != len(mos):
        raise ValueError(f"length mismatch: {xs.size} scores vs {len(mos)} MOS entries")
    if xs.size < 5:
        raise ValueError("need at least 5 pairs")
    if np.all(xs == xs[0]):
        raise DegenerateDataError("metric scores are all equal; cannot fit")

    y = np.array([m.mos for m in mos])
    init = np.array([y.max(), y.min(), float(np.median(xs)), float(xs.std())])
    if init[3] == 0.0:
        init[3] = 1.0

    attempts: list[tuple[np.ndarray, float, bool]] = []
    params, sse, converged, usable = _fit_once(xs, y, init)
    if usable:
        attempts.append((params, sse, converged))

    if not converged:
        rng = np.random.default_rng(0)
        for _ in range(_LOGISTIC_RESTARTS):
            jitter = 1.0 + 0.5 * rng.standard_normal(4)
            perturbed = init * jitter
            if perturbed[3] == 0.0:
                perturbed[3] = init[3]
            params, sse, converged, usable = _fit_once(xs, y, perturbed)
            if usable:
                attempts.append((params, sse, converged))
            if converged:
                break

    if not attempts:
        raise LogisticFitError("every logistic fit attempt diverged", partial=None)

    best_params, best_sse, best_converged = min(attempts, key=lambda a: a[1])
    fitted = LogisticParams(*[float(v) for v in best_params])
    pred = fitted.predict(xs)
    resid = pred - y
    return LogisticFit(
        params=fitted,
        scores=BranchScores(
            cc=_abs_cc_or_zero(pred, y),
            mae=float(np.abs(resid).mean()),
            rms=float(math.sqrt((resid * resid).mean())),
            outlier_ratio=_outlier_ratio(pred, mos),
        ),
        sse=float(best_sse),
        converged=best_converged,
    )


def inter_rater_reliability(ratings: Sequence[RatingRecord]) -> float:
    """Mean pairwise SROCC between raters over their commonly rated pairs.

    Rater pairs need at least three shared pair ids; pairs whose shared scores
    are constant are skipped as undefined.
    """
    by_rater: dict[str, dict[str, int]] = {}
    for record in ratings:
        by_rater.setdefault(record.rater_id, {})[record.pair_id] = record.score

    rater_ids = sorted(by_rater)
    correlations = []
    for idx, first in enumerate(rater_ids):
        for second in rater_ids[idx + 1 :]:
            common = sorted(by_rater[first].keys() & by_rater[second].keys())
            if len(common) < 3:
                continue
            a = [by_rater[first][pid] for pid in common]
            b = [by_rater[second][pid] for pid in common]
            try:
                correlations.append(srocc(a, b))
            except DegenerateDataError:
                continue
    if not correlations:
        raise DegenerateDataError(
            "no rater pair shares enough commonly rated pairs"
        )
    return float(np.mean(correlations))


def alignment_report(
    metric_scores: Mapping[str, Mapping[str, float]],
    ratings: Sequence[RatingRecord],
) -> AlignmentReport:
    """Run the full alignment pipeline and lay the results out as a table.

    Every metric must supply a score for every rated pair. Rows are sorted by
    SROCC descending, ties broken by metric name.
    """
    z_ratings, flagged = zscore_normalize(ratings)
    mos_entries = compute_mos(z_ratings)
    rated_pairs = [m.pair_id for m in mos_entries]

    missing: list[str] = []
    for name, scores in metric_scores.items():
        for pair_id in rated_pairs:
            if pair_id not in scores:
                missing.append(f"{name}:{pair_id}")
    if missing:
        raise ValueError(
            "metric scores missing for rated pairs: " + ", ".join(sorted(missing))
        )

    y = [m.mos for m in mos_entries]
    rows = []
    for name in sorted(metric_scores):
        x = [metric_scores[name][pid] for pid in rated_pairs]
        weighted = weighted_linear_fit(x, mos_entries)
        logistic = logistic_fit(x, mos_entries)
        rows.append(
            MetricAlignment(
                name=name,
                weighted=weighted.scores,
                logistic=logistic.scores,
                srocc=srocc(x, y),
            )
        )
    rows.sort(key=lambda row: (-row.srocc, row.name))

    return AlignmentReport(
        rows=tuple(rows),
        inter_rater_srocc=inter_rater_reliability(ratings),
        pair_count=len(mos_entries),
        flagged_raters=tuple(sorted(flagged)),
    )
