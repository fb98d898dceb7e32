"""Shared figure plumbing: headless backend, deterministic saving."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

MEASURED_STYLE = dict(color="#1f77b4", lw=1.4)
THEORY_STYLE = dict(color="#d62728", lw=1.2, ls="--")


def new_panels(n: int, width: float = 3.4, height: float = 3.0):
    fig, axes = plt.subplots(1, n, figsize=(width * n, height), squeeze=False)
    return fig, list(axes[0])


def save(fig, path: str) -> None:
    """Write the figure with byte-stable output for identical inputs."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    if path.lower().endswith(".svg"):
        metadata = {"Date": None}
    else:
        metadata = {"Software": None}
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=metadata)
    plt.close(fig)
