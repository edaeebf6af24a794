"""Linear-SVM separability probe over perplexity trajectories."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, ClassificationError, FormatError
from ..rng import DOMAIN_CV_FOLDS, DOMAIN_LABELS, DOMAIN_SVM, derive_seed, keyed_permutation

log = logging.getLogger(__name__)

ATTESTED = "attested"
IMPOSSIBLE = "impossible"
LABELS = (ATTESTED, IMPOSSIBLE)
FEATURE_RE = re.compile(r"^ppl@(\d+)_s(\d+)$")


@dataclass(frozen=True)
class TrajectoryMatrix:
    languages: tuple[str, ...]
    variants: tuple[str, ...]
    labels: tuple[str, ...]
    features: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != len(self.labels):
            raise ArgumentError("features must be (samples, dims) matching the labels")
        if not np.all(np.isfinite(self.features)):
            raise ArgumentError("trajectory features must be finite")
        bad = set(self.labels) - set(LABELS)
        if bad:
            raise ArgumentError(f"unknown labels {sorted(bad)}")

    @property
    def y(self) -> np.ndarray:
        """+1 for attested, -1 for impossible."""
        return np.array([1 if lab == ATTESTED else -1 for lab in self.labels])

    def checkpoints(self) -> list[int]:
        steps = []
        for c in self.columns:
            step = int(FEATURE_RE.match(c).group(1))
            if step not in steps:
                steps.append(step)
        return steps

    def seeds(self) -> list[int]:
        seeds = []
        for c in self.columns:
            s = int(FEATURE_RE.match(c).group(2))
            if s not in seeds:
                seeds.append(s)
        return seeds

    def average_seeds(self) -> "TrajectoryMatrix":
        """Collapse the seed axis: one mean feature per checkpoint."""
        steps = self.checkpoints()
        cols = [[i for i, c in enumerate(self.columns) if int(FEATURE_RE.match(c).group(1)) == s]
                for s in steps]
        feats = np.stack([self.features[:, idx].mean(axis=1) for idx in cols], axis=1)
        return TrajectoryMatrix(self.languages, self.variants, self.labels, feats,
                                tuple(f"ppl@{s}" for s in steps))

    def series(self, row: int) -> tuple[list[int], np.ndarray]:
        """Checkpoints and per-seed values (checkpoints x seeds) for one row."""
        steps = self.checkpoints()
        seeds = self.seeds()
        grid = np.full((len(steps), len(seeds)), np.nan)
        for j, c in enumerate(self.columns):
            m = FEATURE_RE.match(c)
            grid[steps.index(int(m.group(1))), seeds.index(int(m.group(2)))] = self.features[row, j]
        return steps, grid


def read_trajectories(path) -> TrajectoryMatrix:
    """Read ``language, variant, label, ppl@<step>_s<seed>...`` rows."""
    langs, variants, labels, rows = [], [], [], []
    columns = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if columns is None:
                head = [p.lstrip("#") for p in parts]
                if head[:3] != ["language", "variant", "label"]:
                    raise FormatError("header must start with language, variant, label", path, lineno)
                columns = head[3:]
                for c in columns:
                    if not FEATURE_RE.match(c):
                        raise FormatError(f"bad feature column {c!r}", path, lineno)
                continue
            if len(parts) != len(columns) + 3:
                raise FormatError(f"expected {len(columns) + 3} fields", path, lineno)
            try:
                rows.append([float(v) for v in parts[3:]])
            except ValueError as exc:
                raise FormatError(str(exc), path, lineno) from None
            langs.append(parts[0])
            variants.append(parts[1])
            labels.append(parts[2])
    if columns is None:
        raise FormatError("missing header", path)
    feats = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return TrajectoryMatrix(tuple(langs), tuple(variants), tuple(labels), feats, tuple(columns))


def write_trajectories(data: TrajectoryMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(["language", "variant", "label", *data.columns]) + "\n")
        for i in range(len(data.labels)):
            vals = "\t".join(f"{v:.6f}" for v in data.features[i])
            fh.write(f"{data.languages[i]}\t{data.variants[i]}\t{data.labels[i]}\t{vals}\n")


def permute_labels(data: TrajectoryMatrix, seed: int) -> TrajectoryMatrix:
    """Same features with the label column shuffled (a chance-level control)."""
    perm = keyed_permutation(len(data.labels), DOMAIN_LABELS, seed)
    labels = tuple(data.labels[i] for i in perm)
    return TrajectoryMatrix(data.languages, data.variants, labels, data.features, data.columns)


def bundled_fixture_path() -> Path:
    from importlib import resources

    return Path(str(resources.files("implang").joinpath("data", "separable_trajectories.tsv")))


# -- folds ---------------------------------------------------------------

def kfold_indices(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded, stratified when possible, fold sizes differing by at most one.

    Indices of each class are shuffled, classes are concatenated, and the
    sequence is dealt round-robin into folds.
    """
    n = len(y)
    if folds < 2 or folds > n:
        raise ArgumentError(f"folds must be in [2, {n}], got {folds}")
    classes = sorted(set(y.tolist()))
    counts = {c: int(np.sum(y == c)) for c in classes}
    if all(counts[c] >= folds for c in classes):
        order = []
        for ci, c in enumerate(classes):
            members = np.flatnonzero(y == c)
            perm = keyed_permutation(len(members), DOMAIN_CV_FOLDS, seed, ci + 1)
            order.extend(members[perm].tolist())
    else:
        log.warning("a class has fewer than %d members; using unstratified folds", folds)
        order = keyed_permutation(n, DOMAIN_CV_FOLDS, seed, 0)
    buckets: list[list[int]] = [[] for _ in range(folds)]
    for k, idx in enumerate(order):
        buckets[k % folds].append(idx)
    return [np.array(sorted(b), dtype=int) for b in buckets]


# -- classifier ----------------------------------------------------------

class LinearSVM:
    """Primal linear SVM fitted by Pegasos-style stochastic subgradient steps.

    Minimizes ``lam/2 ||w||^2 + mean(max(0, 1 - y (w.x + b)))`` with the bias
    folded into ``w`` through a constant feature. Step ``t`` uses learning
    rate ``1 / (lam t)`` on one sample drawn from a seeded stream.
    """

    def __init__(self, lam: float = 0.01, iterations: int = 100_000, seed: int = 0):
        if lam <= 0:
            raise ArgumentError("regularization must be positive")
        self.lam = lam
        self.iterations = iterations
        self.seed = seed
        self.w: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LinearSVM":
        Xb = np.hstack([X, np.ones((len(X), 1))])
        n, d = Xb.shape
        rng = np.random.Generator(np.random.PCG64(derive_seed(DOMAIN_SVM, self.seed)))
        picks = rng.integers(0, n, size=self.iterations)
        rows = [Xb[i] for i in range(n)]
        ys = y.astype(float).tolist()
        # w = scale * v keeps the shrink step O(1)
        v = np.zeros(d)
        scale = 1.0
        lam = self.lam
        for t, i in enumerate(picks.tolist(), start=1):
            eta = 1.0 / (lam * t)
            margin = ys[i] * scale * float(rows[i] @ v)
            shrink = 1.0 - eta * lam
            if shrink <= 0.0:
                v[:] = 0.0
                scale = 1.0
            else:
                scale *= shrink
            if margin < 1.0:
                v += (eta * ys[i] / scale) * rows[i]
            if scale < 1e-100:
                v *= scale
                scale = 1.0
        self.w = scale * v
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return np.hstack([X, np.ones((len(X), 1))]) @ self.w

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


def macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Unweighted mean F1 over the labels present in truth or prediction."""
    labels = sorted(set(y_true.tolist()) | set(y_pred.tolist()))
    scores = []
    for c in labels:
        tp = int(np.sum((y_true == c) & (y_pred == c)))
        fp = int(np.sum((y_true != c) & (y_pred == c)))
        fn = int(np.sum((y_true == c) & (y_pred != c)))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


@dataclass(frozen=True)
class SeparabilityResult:
    macro_f1_mean: float
    macro_f1_sd: float
    fold_f1: tuple[float, ...]
    predictions: tuple[int, ...]
    folds: tuple[tuple[int, ...], ...]

    def to_tsv(self) -> str:
        lines = [f"#macro_f1_mean\t{self.macro_f1_mean!r}", f"#macro_f1_sd\t{self.macro_f1_sd!r}",
                 "#fold\tmacro_f1"]
        lines += [f"{k}\t{f!r}" for k, f in enumerate(self.fold_f1)]
        return "\n".join(lines) + "\n"


def _standardize(train: np.ndarray, test: np.ndarray):
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    keep = std > 0
    if not keep.all():
        log.warning("dropping %d zero-variance feature(s)", int((~keep).sum()))
    return (train[:, keep] - mean[keep]) / std[keep], (test[:, keep] - mean[keep]) / std[keep]


def svm_separability(data: TrajectoryMatrix | tuple[np.ndarray, np.ndarray], folds: int = 10,
                     lam: float = 0.01, seed: int = 0, iterations: int = 100_000,
                     average_seeds: bool = False) -> SeparabilityResult:
    """K-fold cross-validated macro-F1 of a linear SVM.

    ``data`` is a :class:`TrajectoryMatrix` or an ``(X, y)`` pair with
    labels in {+1, -1}. Features are standardized with training-fold
    statistics. The reported spread is the sample standard deviation of the
    per-fold scores.
    """
    if isinstance(data, TrajectoryMatrix):
        if average_seeds:
            data = data.average_seeds()
        X, y = data.features, data.y
    else:
        X, y = data
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
    if len(set(y.tolist())) < 2:
        raise ClassificationError("separability needs samples from both classes")
    splits = kfold_indices(y, folds, seed)
    preds = np.zeros(len(y), dtype=int)
    scores = []
    for k, test_idx in enumerate(splits):
        train_idx = np.setdiff1d(np.arange(len(y)), test_idx)
        if len(set(y[train_idx].tolist())) < 2:
            raise ClassificationError(f"fold {k}: training data has a single class")
        Xtr, Xte = _standardize(X[train_idx], X[test_idx])
        model = LinearSVM(lam, iterations, seed=derive_seed(seed, k)).fit(Xtr, y[train_idx])
        p = model.predict(Xte)
        preds[test_idx] = p
        scores.append(macro_f1(y[test_idx], p))
    scores_arr = np.array(scores)
    sd = float(scores_arr.std(ddof=1)) if len(scores) > 1 else 0.0
    return SeparabilityResult(float(scores_arr.mean()), sd, tuple(scores), tuple(preds.tolist()),
                              tuple(tuple(s.tolist()) for s in splits))
