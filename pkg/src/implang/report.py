"""Perplexity-vs-checkpoint plots and plain-text summaries."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .evaluate.separability import TrajectoryMatrix


def _rows_for(data: TrajectoryMatrix, language: str | None):
    rows = [i for i, lang in enumerate(data.languages) if language is None or lang == language]
    if not rows:
        raise ValueError(f"no trajectories for language {language!r}")
    return rows


def plot_trajectories(data: TrajectoryMatrix, path, language: str | None = None) -> Path:
    """One line per variant (mean over seeds) with a 95% normal band.

    Written as SVG with a fixed hash salt and no date so reruns are identical.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "implang", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for i in _rows_for(data, language):
            steps, grid = data.series(i)
            mean = grid.mean(axis=1)
            label = data.variants[i] if language else f"{data.languages[i]}:{data.variants[i]}"
            style = "-" if data.labels[i] == "attested" else "--"
            ax.plot(steps, mean, style, label=label, linewidth=1.4)
            if grid.shape[1] > 1:
                half = 1.96 * grid.std(axis=1, ddof=1) / np.sqrt(grid.shape[1])
                ax.fill_between(steps, mean - half, mean + half, alpha=0.15)
        ax.set_xlabel("training step")
        ax.set_ylabel("test perplexity")
        ax.set_yscale("log")
        if language:
            ax.set_title(language)
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def final_ordering(data: TrajectoryMatrix, language: str | None = None) -> list[tuple[str, float]]:
    """Variants sorted by mean perplexity at the last checkpoint."""
    out = []
    for i in _rows_for(data, language):
        _, grid = data.series(i)
        name = data.variants[i] if language else f"{data.languages[i]}:{data.variants[i]}"
        out.append((name, float(grid[-1].mean())))
    return sorted(out, key=lambda kv: kv[1])


def summary(data: TrajectoryMatrix, language: str | None = None) -> str:
    ranked = final_ordering(data, language)
    lines = [f"final-checkpoint perplexity ({language or 'all languages'}):"]
    for variant, value in ranked:
        lines.append(f"  {variant:<40s} {value:10.3f}")
    lines.append("ordering: " + " < ".join(v for v, _ in ranked))
    return "\n".join(lines) + "\n"
