#!/usr/bin/env python3
"""Render figures from sltdr CSV output.

    plot.py metrics OUT_DIR      KQ and GR heat maps over alpha x gamma (one per L)
    plot.py bench OUT_DIR        metric vs L, one line per (backend, H)
    plot.py activation OUT_DIR   target vs Bernstein fit and its error

Figures are written next to the CSVs as PNG files.
"""

import argparse
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def aggregates(df):
    return df[df["run"] == "mean"].copy(), df[df["run"] == "std"].copy()


def plot_metrics(out):
    df = pd.read_csv(out / "metrics.csv", dtype={"L": str, "run": str})
    mean, _ = aggregates(df)
    for (length, policy), group in mean.groupby(["L", "policy"]):
        fig, axes = plt.subplots(1, 3, figsize=(13, 4))
        for ax, col, title in zip(axes, ["kq", "gr", None], ["KQ/H", "GR/H", "(KQ-GR)/H"]):
            values = group["kq"] - group["gr"] if col is None else group[col]
            grid = group.assign(v=values).pivot(index="gamma", columns="alpha", values="v")
            im = ax.imshow(grid.values, origin="lower", aspect="auto",
                           extent=[grid.columns.min(), grid.columns.max(), grid.index.min(), grid.index.max()])
            ax.set_xlabel("alpha")
            ax.set_ylabel("gamma")
            ax.set_title(title)
            fig.colorbar(im, ax=ax)
        fig.suptitle(f"L={length}, reseed={policy}")
        fig.tight_layout()
        fig.savefig(out / f"metrics_L{length}_{policy}.png", dpi=120)
        plt.close(fig)


def plot_bench(out):
    df = pd.read_csv(out / "benchmarks.csv", dtype={"L": str, "run": str})
    mean, std = aggregates(df)
    keys = ["task", "backend", "H", "alpha", "gamma", "L"]
    merged = mean.merge(std[keys + ["value"]], on=keys, suffixes=("", "_std"))
    stochastic = merged[merged["L"] != "inf"].copy()
    stochastic["Lnum"] = stochastic["L"].astype(float)
    ideal = merged[merged["L"] == "inf"]
    fig, ax = plt.subplots(figsize=(6, 4))
    for (h, alpha, gamma), group in stochastic.groupby(["H", "alpha", "gamma"]):
        group = group.sort_values("Lnum")
        ax.errorbar(group["Lnum"], group["value"], yerr=group["value_std"], marker="o", capsize=3,
                    label=f"stochastic H={h} a={alpha} g={gamma}")
    for _, row in ideal.iterrows():
        ax.axhline(row["value"], linestyle="--", label=f"{row['backend']} H={row['H']}")
    ax.set_xscale("log")
    ax.set_xlabel("L")
    ax.set_ylabel(merged["metric"].iloc[0] if len(merged) else "value")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "benchmarks.png", dpi=120)
    plt.close(fig)


def plot_activation(out):
    df = pd.read_csv(out / "activation.csv")
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    top.plot(df["u"], df["target"], label="target")
    top.plot(df["u"], df["bernstein"], label="Bernstein fit")
    top.legend()
    bottom.plot(df["u"], df["error"])
    bottom.set_xlabel("u")
    bottom.set_ylabel("fit - target")
    fig.tight_layout()
    fig.savefig(out / "activation.png", dpi=120)
    plt.close(fig)


def main(argv):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=["metrics", "bench", "activation"])
    parser.add_argument("out", type=pathlib.Path)
    args = parser.parse_args(argv)
    {"metrics": plot_metrics, "bench": plot_bench, "activation": plot_activation}[args.kind](args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
