#!/usr/bin/env python3
"""Plot the CSV files the certify tool writes.

The file kind is detected from the header line:
  run logs   scenario_id,p_pred,...     -> interval trajectory + spend panel
  sweeps     precision,Probability_...  -> mean certification length curves
  benchmarks dimension,seconds          -> runtime against dimension

Each input becomes a PNG next to it unless -o names the output (single
input only).
"""

import argparse
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        sys.exit(f"{path}: empty file")
    return rows[0], rows[1:]


def fnum(cell):
    return math.nan if cell == "" else float(cell)


def plot_run_log(path, header, rows, out):
    cols = {name: i for i, name in enumerate(header)}
    n_sims = [int(r[cols["n_sims"]]) for r in rows]
    p_min = [fnum(r[cols["p_min"]]) for r in rows]
    p_max = [fnum(r[cols["p_max"]]) for r in rows]
    simulated = [r[cols["simulated"]] == "1" for r in rows]
    iteration = range(1, len(rows) + 1)
    mid = [0.5 * (a + b) for a, b in zip(p_min, p_max)]

    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(7.0, 6.0), sharex=True,
        gridspec_kw={"height_ratios": [2.2, 1.0]})
    top.fill_between(iteration, p_min, p_max, alpha=0.3, lw=0,
                     label="confidence interval")
    top.plot(iteration, mid, lw=1.0, label="midpoint")
    top.set_ylabel("safety probability")
    top.legend(loc="lower right", fontsize=8)
    top.set_title(path)

    # Trailing share of records that hit the simulator.
    window = max(1, len(rows) // 100)
    share = []
    acc = 0
    for i, s in enumerate(simulated):
        acc += s
        if i >= window:
            acc -= simulated[i - window]
        share.append(acc / min(i + 1, window))
    bottom.plot(iteration, share, lw=0.8)
    bottom.plot(iteration, [n / max(i, 1) for i, n in zip(iteration, n_sims)],
                lw=0.8, ls="--", label="cumulative")
    bottom.set_ylim(-0.02, 1.02)
    bottom.set_xlabel("iteration")
    bottom.set_ylabel(f"simulated share\n(window {window})")
    bottom.legend(loc="upper right", fontsize=8)

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_sweep(path, header, rows, out):
    precision = [float(r[0]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for j, name in enumerate(header[1:], start=1):
        label = "p = " + name.removeprefix("Probability_").replace("_", ".")
        ax.plot(precision, [float(r[j]) for r in rows], marker="o", ms=3,
                label=label)
    ax.set_yscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("precision (%)")
    ax.set_ylabel("mean draws to certify")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(path)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_bench(path, header, rows, out):
    dims = [int(r[0]) for r in rows]
    secs = [float(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(dims, secs, marker="o", ms=4)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("dimension")
    ax.set_ylabel("seconds per evaluation")
    ax.grid(True, which="both", alpha=0.3)
    ax.set_title(path)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv_files", nargs="+", help="CSV files written by certify")
    ap.add_argument("-o", "--output",
                    help="output PNG (only with a single input)")
    args = ap.parse_args()
    if args.output and len(args.csv_files) > 1:
        ap.error("-o only applies to a single input")

    for path in args.csv_files:
        header, rows = read_csv(path)
        out = args.output or path.rsplit(".", 1)[0] + ".png"
        if header[0] == "scenario_id":
            plot_run_log(path, header, rows, out)
        elif header[0] == "precision":
            plot_sweep(path, header, rows, out)
        elif header == ["dimension", "seconds"]:
            plot_bench(path, header, rows, out)
        else:
            sys.exit(f"{path}: unrecognized header {','.join(header)}")


if __name__ == "__main__":
    main()
