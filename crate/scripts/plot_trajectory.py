"""Plot a trajectory CSV written by `sbm-tcl dynamics`."""
import csv
import sys

import matplotlib.pyplot as plt


def main(path, out=None):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["t"]) for r in rows]
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6, 7))
    for ax, key in zip(axes, ("v1", "v2", "v3")):
        ax.plot(t, [float(r[key]) for r in rows])
        ax.set_ylabel(key)
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    if out:
        fig.savefig(out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main(*sys.argv[1:3])
