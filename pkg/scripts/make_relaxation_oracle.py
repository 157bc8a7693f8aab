#!/usr/bin/env python3
"""Regenerate tests/data/relaxation_oracle.json.

The frozen values are E_a(-lam t^a) computed by the adaptive-precision
series oracle in tests/_oracles.py over the acceptance grid
(t, lam) in [0, 3] x [0, 5] for a in {0.3, 0.5, 0.7}.
"""

import json
import pathlib
import sys

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "tests"))

from _oracles import ml_series_oracle  # noqa: E402

ALPHAS = [0.3, 0.5, 0.7]
T_GRID = [0.0, 0.1, 0.3, 0.7, 1.0, 1.5, 2.2, 3.0]
LAM_GRID = [0.0, 0.4, 1.0, 1.7, 2.6, 3.4, 4.3, 5.0]


def main():
    table = {"t_grid": T_GRID, "lam_grid": LAM_GRID, "values": {}}
    for a in ALPHAS:
        rows = []
        for t in T_GRID:
            row = []
            for lam in LAM_GRID:
                z = lam * t ** a
                row.append(ml_series_oracle(-z, a) if z > 0 else 1.0)
            rows.append(row)
        table["values"][str(a)] = rows
    out = HERE.parent / "tests" / "data" / "relaxation_oracle.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        json.dump(table, fh, indent=1)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
