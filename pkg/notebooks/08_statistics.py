"""
Significance tests
==================

Welch's t-test per checkpoint with a Bonferroni correction, a Mann-Whitney
comparison of two groups of final perplexities, and a rank correlation.
"""

import numpy as np

from implang.evaluate import stats as S

rng = np.random.default_rng(3)
checkpoints = range(100, 1300, 100)
control = {c: 80 * np.exp(-c / 600) + rng.normal(0, 1, 3) + 20 for c in checkpoints}
shuffled = {c: 90 * np.exp(-c / 700) + rng.normal(0, 1, 3) + 30 for c in checkpoints}

print("step   t       df     p (x12)")
for c in checkpoints:
    r = S.welch_t(shuffled[c], control[c], comparisons=12)
    print(f"{c:<6} {r.t:7.2f} {r.df:6.2f} {r.p_bonferroni:.4g}")

attested = [28.1, 30.5, 27.9, 31.2, 29.0]
impossible = [41.0, 39.7, 44.2, 38.8, 40.1, 43.5]
mw = S.mann_whitney(attested, impossible)
print(f"Mann-Whitney: U_a={mw.u_a} U_b={mw.u_b} W_a={mw.w_a} p={mw.p:.4f} ({mw.method})")

tcw = [1.21, 1.45, 1.60, 1.98, 2.05, 2.19]
ppl = [30.2, 34.8, 33.9, 48.0, 52.3, 51.1]
for method in ("t", "exact"):
    r = S.spearman(tcw, ppl, method=method)
    print(f"Spearman ({method}): rho={r.rho:.3f} p={r.p:.4f}")
