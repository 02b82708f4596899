"""SVG figures: field heatmaps and error-vs-hbar scans.

Metadata that would vary between runs (date, random ids) is pinned so the
same data always renders to the same bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "phasequant", "svg.fonttype": "none"}
_META = {"Date": None, "Creator": "phasequant"}


def _save(fig, path):
    with plt.rc_context(_RC):
        fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def heatmap(values, extent: float, path, title: str = "", part: str = "abs"):
    """Heatmap of one part (``abs``, ``re``, ``im``) of a square complex array."""
    values = np.asarray(values)
    data = {"abs": np.abs, "re": np.real, "im": np.imag}[part](values)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 4))
        im = ax.imshow(data.T, origin="lower", extent=(-extent, extent, -extent, extent),
                       cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax)
        ax.set_xlabel("q")
        ax.set_ylabel("p")
        ax.set_title(f"{title} ({part})" if title else part)
        fig.tight_layout()
    _save(fig, path)


def scan_plot(scan, path, title: str = ""):
    """Log-log interior error against hbar with the fitted slope."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.loglog(scan.hbars, scan.errors, "o-", label=f"order {scan.order}, slope {scan.slope:.3f}")
        ax.set_xlabel("hbar")
        ax.set_ylabel("interior sup error")
        ax.set_title(title)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
    _save(fig, path)
