"""Learnability metrics: ΔGenScore, separability probe, test statistics."""

from .minimal_pairs import GenScoreResult, MinimalPair, attach_scores, genscore
from .separability import (
    LinearSVM,
    SeparabilityResult,
    TrajectoryMatrix,
    kfold_indices,
    macro_f1,
    permute_labels,
    read_trajectories,
    svm_separability,
    write_trajectories,
)
from .stats import bonferroni, mann_whitney, spearman, welch_t

__all__ = [
    "GenScoreResult",
    "LinearSVM",
    "MinimalPair",
    "SeparabilityResult",
    "TrajectoryMatrix",
    "attach_scores",
    "bonferroni",
    "genscore",
    "kfold_indices",
    "macro_f1",
    "permute_labels",
    "mann_whitney",
    "read_trajectories",
    "spearman",
    "svm_separability",
    "welch_t",
    "write_trajectories",
]
