#!/usr/bin/env python3
"""Regenerate the bundled design fixtures in data/designs/.

pb20_7.csv
    First 7 columns of the 20-run Plackett-Burman design (cyclic generator
    plus a row of minus signs). Orthogonal main effects, partially aliased
    two-factor interactions.

ssd_14x24.csv, ssd_12x26.csv, ssd_18x22.csv
    Balanced two-level supersaturated designs found by a seeded random
    pairwise-swap search that lowers E(s^2). These are reasonable stand-ins,
    NOT E(s^2)-optimal or Var(s+)-optimal designs. No two columns are equal
    or opposite.

Usage: python3 scripts/make_fixtures.py [output_dir]
"""

import sys
from pathlib import Path

import numpy as np

PB20_GENERATOR = "++--++++-+-+----++-"


def pb20(m):
    g = np.array([1 if c == "+" else -1 for c in PB20_GENERATOR])
    rows = [np.roll(g, i) for i in range(len(g))]
    rows.append(-np.ones(len(g), dtype=int))
    return np.array(rows)[:, :m]


def es2(X):
    S = X.T @ X
    m = X.shape[1]
    off = S[np.triu_indices(m, 1)]
    return float((off.astype(float) ** 2).sum() / (m * (m - 1) / 2))


def ssd(n, m, seed, sweeps=4000):
    rng = np.random.default_rng(seed)
    base = np.array([1] * (n // 2) + [-1] * (n - n // 2))
    X = np.column_stack([rng.permutation(base) for _ in range(m)])
    S = X.T @ X
    np.fill_diagonal(S, 0)

    def aliased(X):
        S = X.T @ X
        np.fill_diagonal(S, 0)
        return np.any(np.abs(S) == n)

    for _ in range(sweeps):
        j = rng.integers(m)
        plus = np.flatnonzero(X[:, j] == 1)
        minus = np.flatnonzero(X[:, j] == -1)
        a, b = rng.choice(plus), rng.choice(minus)
        # Swapping rows a and b of column j changes s_jk by -2 (x_ak - x_bk).
        delta = -2 * (X[a] - X[b])
        new = S[j] + delta
        new[j] = 0
        if (new ** 2).sum() <= (S[j] ** 2).sum():
            X[a, j], X[b, j] = -1, 1
            S[j] = new
            S[:, j] = new
    if aliased(X):
        raise RuntimeError("search produced aliased columns; change the seed")
    return X


def write(path, X):
    m = X.shape[1]
    with open(path, "w") as f:
        f.write(",".join(f"x{i + 1}" for i in range(m)) + "\n")
        for row in X:
            f.write(",".join(str(int(v)) for v in row) + "\n")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "designs"
    out.mkdir(parents=True, exist_ok=True)
    write(out / "pb20_7.csv", pb20(7))
    for (n, m), seed in [((14, 24), 1401), ((12, 26), 1201), ((18, 22), 1801)]:
        X = ssd(n, m, seed)
        write(out / f"ssd_{n}x{m}.csv", X)
        print(f"ssd_{n}x{m}: E(s^2) = {es2(X):.3f}")


if __name__ == "__main__":
    main()
