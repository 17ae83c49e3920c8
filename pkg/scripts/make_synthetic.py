"""Regenerate the bundled right-skewed demo dataset (n=500, p=5)."""

import argparse
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "relevo" / "data" / "synthetic_skewed.csv"


def make(n=500, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 5))
    # lognormal-type response: heavy right tail driven by x1 and an x3*x4 interaction
    eta = 0.7 * X[:, 0] - 0.4 * X[:, 1] + 0.3 * X[:, 2] * X[:, 3] + 0.3 * rng.normal(size=n)
    y = 20.0 * np.exp(eta) + 0.5 * X[:, 4]
    return np.round(X, 6), np.round(y, 6)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    X, y = make(args.n, args.seed)
    with open(args.out, "w", newline="") as fh:
        fh.write("x1,x2,x3,x4,x5,y\n")
        for row, t in zip(X, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{float(t)!r}\n")
    print(f"wrote {args.out} (n={args.n})")


if __name__ == "__main__":
    main()
