#!/usr/bin/env python3
"""Convert the numeric German credit table to a CSV the bench CLI can read.

The source has 24 whitespace-separated numeric features followed by the class
(1 = good, 2 = bad). Bad credit (300 of 1000 rows) becomes the positive class in
column ``bad``. Without ``--source`` the copy bundled with the
``imbalanced-databases`` package is used.

    python scripts/german_to_csv.py german.csv
    areba-bench --learner areba --dataset csv --csv-path german.csv --label-col bad --reps 50
"""
import argparse
from pathlib import Path

import numpy as np


def bundled_source() -> Path:
    import imbalanced_databases

    return Path(imbalanced_databases.__file__).parent / "data" / "german" / "german.data-numeric.txt"


def convert(source: Path, dest: Path) -> tuple[int, int]:
    rows = np.loadtxt(source)
    if rows.ndim != 2 or rows.shape[1] != 25:
        raise ValueError(f"{source}: expected 25 columns, got shape {rows.shape}")
    X, label = rows[:, :-1], rows[:, -1]
    y = (label == 2).astype(int)
    header = ",".join([f"f{i}" for i in range(X.shape[1])] + ["bad"])
    np.savetxt(dest, np.column_stack([X, y]), delimiter=",", header=header, comments="", fmt="%g")
    return len(y), int(y.sum())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("dest", type=Path)
    p.add_argument("--source", type=Path)
    args = p.parse_args(argv)
    n, pos = convert(args.source or bundled_source(), args.dest)
    print(f"wrote {args.dest}: {n} rows, {pos} positives")


if __name__ == "__main__":
    main()
