"""Render sweep rows to image files.  Only the CLI imports this."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import SweepRow, SweepSpec, rows_by_series  # noqa: E402

_YLABEL = {
    "throughput": "throughput (decoded users / slot)",
    "power": "average transmit power (dB)",
    "level_power": "average received-power level (dB)",
    "eta_bound": "max conditional-throughput bound",
}
_XLABEL = {"B": "number of subchannels B", "L": "number of power levels L",
           "p_a": "access probability p_a", "gamma_db": "target SINR (dB)"}

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "lines.markersize": 5,
    "savefig.dpi": 150,
}


def _db(x):
    return 10.0 * math.log10(x) if x and x > 0 else math.nan


def plot_sweep(spec: SweepSpec, rows: Sequence[SweepRow], path: str | Path) -> Path:
    path = Path(path)
    to_y = _db if spec.metric in ("power", "level_power") else (lambda v: v)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for k, (series, group) in enumerate(rows_by_series(rows).items()):
            color = f"C{k}"
            tag = f" ({series})" if series else ""
            x = [r.value for r in group]
            if any(r.sim_mean is not None for r in group):
                y = [to_y(r.sim_mean) for r in group]
                if spec.metric == "power":
                    ax.plot(x, y, "o-", color=color, label=f"sim{tag}")
                else:
                    err = [3 * (r.sim_se or 0.0) for r in group]
                    ax.errorbar(x, y, yerr=err, fmt="o", color=color, capsize=2, label=f"sim{tag}")
            if any(r.analytic is not None for r in group):
                style = "-" if spec.metric in ("level_power", "eta_bound") else "--"
                ax.plot(x, [to_y(r.analytic) for r in group], style, color=color,
                        label=f"exact{tag}" if spec.metric == "throughput" else f"analytic{tag}")
            if any(r.bound is not None for r in group):
                kind = "lower bound" if spec.metric == "throughput" else "upper bound"
                ax.plot(x, [to_y(r.bound) if r.bound is not None else math.nan for r in group],
                        ":", color=color, label=f"{kind}{tag}")
        ax.set_xlabel(_XLABEL.get(spec.param, spec.param))
        ax.set_ylabel(_YLABEL[spec.metric])
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return path
