"""Heatmap of a grid-search CSV written by ``cadcost grid``.

    python scripts/plot_grid.py grid.csv --out grid.png
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from cadcost.evaluate import read_grid_csv  # noqa: E402


def plot_grid(csv_path, out_path, title="CV MAE by max_depth and learning_rate"):
    depths, lrs, mat = read_grid_csv(csv_path)
    fig, ax = plt.subplots(figsize=(1.3 * len(lrs) + 2, 0.9 * len(depths) + 1.5))
    im = ax.imshow(mat, cmap="viridis_r", aspect="auto")
    ax.set_xticks(range(len(lrs)), [f"{lr:g}" for lr in lrs])
    ax.set_yticks(range(len(depths)), [str(d) for d in depths])
    ax.set_xlabel("learning_rate")
    ax.set_ylabel("max_depth")
    ax.set_title(title)
    for i in range(len(depths)):
        for j in range(len(lrs)):
            ax.text(j, i, f"{mat[i, j]:.3f}", ha="center", va="center", color="white", fontsize=8)
    fig.colorbar(im, ax=ax, label="mean MAE")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return mat


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("grid_csv")
    p.add_argument("--out", default="grid.png")
    args = p.parse_args(argv)
    plot_grid(args.grid_csv, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
