#!/usr/bin/env python3
"""Plot cumulative series of one grid cell written by `simulate`.

Usage: plot_cell.py <cell-dir> [--out figure.png]

Draws the cumulative EW relative log return (red), premium estimate
(green), trading profit (blue) and size exposure (pink).
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def load(cell: Path) -> pd.DataFrame:
    rel = pd.read_csv(cell / "relative.csv", parse_dates=["date"], index_col="date")
    profit = pd.read_csv(cell / "profit.csv", parse_dates=["date"], index_col="date")
    dec = pd.read_csv(cell / "decomposition.csv", parse_dates=["date"], index_col="date")
    return pd.DataFrame(
        {
            "relative return": rel["ew_rel_logret"],
            "premium estimate": dec["premium_estimate"],
            "trading profit": profit["trading_profit"],
            "size exposure": dec["size_exposure"],
        }
    ).cumsum()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("cell", type=Path, help="cell directory, e.g. out/synthetic/lrg-monthly-tc0")
    parser.add_argument("--out", type=Path, help="image path (default: <cell>/cumulative.png)")
    args = parser.parse_args()

    series = load(args.cell)
    colors = {"relative return": "red", "premium estimate": "green", "trading profit": "blue", "size exposure": "pink"}
    fig, ax = plt.subplots(figsize=(10, 5))
    for name, color in colors.items():
        ax.plot(series.index, series[name], color=color, label=name, linewidth=1.2)
    ax.axhline(0.0, color="grey", linewidth=0.6)
    ax.set_title(args.cell.name)
    ax.set_ylabel("cumulative log return")
    ax.legend()
    fig.tight_layout()
    out = args.out or args.cell / "cumulative.png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
