"""
Plot cumulative revenue and active bidders per round from a metrics CSV.

    python scripts/plot_metrics.py results/metrics_weighted_clicks.csv --out-prefix results/weighted_clicks

Produces <prefix>_revenue.png and <prefix>_retention.png, one curve per mechanism.
"""

import argparse
import sys
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

PLOTS = [
    ("mean_cum_revenue", "Cumulative revenue", "revenue"),
    ("mean_active_bidders", "Active advertisers", "retention"),
]


def plot(metrics: pd.DataFrame, column: str, ylabel: str, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for mechanism, curve in metrics.groupby("mechanism"):
        ax.plot(curve["round"], curve[column], label=mechanism)
    ax.set_xlabel("Round")
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Plot simulation metrics")
    parser.add_argument("metrics", help="Metrics CSV written by the simulate command")
    parser.add_argument("--out-prefix", default="metrics", help="Output path prefix")
    args = parser.parse_args(argv)

    metrics = pd.read_csv(args.metrics)
    for column, ylabel, suffix in PLOTS:
        plot(metrics, column, ylabel, f"{args.out_prefix}_{suffix}.png")
    return 0


if __name__ == "__main__":
    sys.exit(main())
