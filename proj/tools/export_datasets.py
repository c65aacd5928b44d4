#!/usr/bin/env python3
"""Export the UCI datasets bundled with scikit-learn to data/ as CSV.

Produces iris.csv, wine.csv and breast.csv with a header row and the class
name in the last column. Run from the repository root:

    python3 tools/export_datasets.py [out_dir]
"""
import sys
from pathlib import Path

from sklearn import datasets


def export(loader, out_path: Path) -> None:
    bunch = loader()
    names = [n.replace(" ", "_").replace("(", "").replace(")", "") for n in
             getattr(bunch, "feature_names", [f"f{i}" for i in range(bunch.data.shape[1])])]
    with out_path.open("w") as fh:
        fh.write(",".join(list(names) + ["label"]) + "\n")
        for row, target in zip(bunch.data, bunch.target):
            cells = ["%.17g" % v for v in row]
            cells.append(str(bunch.target_names[target]))
            fh.write(",".join(cells) + "\n")
    print(f"wrote {out_path} ({bunch.data.shape[0]} rows, {bunch.data.shape[1]} features)")


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)
    export(datasets.load_iris, out_dir / "iris.csv")
    export(datasets.load_wine, out_dir / "wine.csv")
    export(datasets.load_breast_cancer, out_dir / "breast.csv")


if __name__ == "__main__":
    main()
