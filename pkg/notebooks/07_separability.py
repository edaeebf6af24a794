"""
Separability of perplexity trajectories
=======================================

A linear SVM tries to tell attested from impossible variants using their
perplexity at every checkpoint and seed. A shuffled-label run gives the
chance baseline.
"""

import tempfile
from pathlib import Path

from implang import report
from implang.evaluate import separability as S

data = S.read_trajectories(S.bundled_fixture_path())
print("samples x features:", data.features.shape)
print("checkpoints:", data.checkpoints(), "seeds:", data.seeds())

res = S.svm_separability(data, folds=10, seed=0)
print(f"macro-F1 {res.macro_f1_mean:.3f} (sd {res.macro_f1_sd:.3f})")

avg = S.svm_separability(data, folds=10, seed=0, average_seeds=True)
print(f"seed-averaged features: macro-F1 {avg.macro_f1_mean:.3f}")

control = S.svm_separability(S.permute_labels(data, 0), folds=10, seed=0)
print(f"permuted labels: macro-F1 {control.macro_f1_mean:.3f}")

out = Path(tempfile.mkdtemp(prefix="implang-plot-")) / "trajectories.svg"
report.plot_trajectories(data, out, language="l00")
print("plot written to", out)
