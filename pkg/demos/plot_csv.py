"""Turn a forcedvi CSV into a figure (needs matplotlib, which forcedvi does not depend on).

    forcedvi simulate marsden-west --method midpoint,rk4,benchmark --out mw.csv
    python demos/plot_csv.py mw.csv energy mw.png

The second argument is a column suffix: every column equal to it or ending
in ``.<suffix>`` is plotted against the first column.
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main(path, suffix, out):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    x = [float(r[0]) for r in data]
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, name in enumerate(header):
        if name == suffix or name.endswith("." + suffix):
            ax.plot(x, [float(r[i]) for r in data], label=name)
    ax.set_xlabel(header[0])
    ax.set_ylabel(suffix)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print("wrote %s" % out)


if __name__ == "__main__":
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    main(*sys.argv[1:])
