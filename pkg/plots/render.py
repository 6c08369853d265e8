#!/usr/bin/env python3
"""Render figures from the simulator's CSV outputs.

Consumes only the documented CSV contracts:
  distribution files with header ``x_ns,probability`` (CDF/CCDF curves),
  cluster files with header ``k,fraction`` (cycle-jump bar charts).

Usage:
  render.py --kind cdf|ccdf|clusters --in a.csv [b.csv ...] --out figure.png
"""

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

DIST_HEADER = ["x_ns", "probability"]
CLUSTER_HEADER = ["k", "fraction"]


class InputError(Exception):
    pass


def read_rows(path, header):
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            got = next(reader, None)
            if got != header:
                raise InputError(
                    f"{path}: expected header {','.join(header)}, got "
                    f"{','.join(got) if got else 'nothing'}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 2:
                    raise InputError(f"{path}:{lineno}: expected 2 columns")
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    raise InputError(f"{path}:{lineno}: non-numeric value")
    except OSError as exc:
        raise InputError(str(exc))
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def render_distribution(paths, out, log_y):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in paths:
        rows = read_rows(path, DIST_HEADER)
        xs = [x / 1e6 for x, _ in rows]
        ys = [y for _, y in rows]
        ax.plot(xs, ys, drawstyle="steps-post", label=Path(path).stem)
    if log_y:
        ax.set_yscale("log")
        ax.set_ylabel("CCDF")
    else:
        ax.set_ylabel("CDF")
    ax.set_xlabel("latency [ms]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def render_clusters(paths, out):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    width = 0.8 / len(paths)
    for i, path in enumerate(paths):
        rows = read_rows(path, CLUSTER_HEADER)
        ks = [int(k) for k, _ in rows]
        fr = [f for _, f in rows]
        ax.bar([k + i * width for k in ks], fr, width=width,
               label=Path(path).stem)
    ax.set_xlabel("latency jump [network cycles]")
    ax.set_ylabel("fraction of packets")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--kind", required=True, choices=["cdf", "ccdf", "clusters"])
    p.add_argument("--in", dest="inputs", required=True, nargs="+",
                   help="input CSV file(s)")
    p.add_argument("--out", required=True, help="output image path")
    args = p.parse_args(argv)
    try:
        if args.kind == "clusters":
            render_clusters(args.inputs, args.out)
        else:
            render_distribution(args.inputs, args.out, log_y=args.kind == "ccdf")
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
