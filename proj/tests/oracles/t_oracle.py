#!/usr/bin/env python3
"""Reference Student-t CDF values from scipy.

generate: print the grid
verify F: recompute and compare with a stored grid
"""
import sys

from scipy import stats

DFS = [1, 2, 3.5, 8, 30, 1000]
XS = [-10, -2.5, -0.3, 0.0, 0.7, 1.0, 1.96, 4]


def rows():
    for df in DFS:
        for x in XS:
            yield df, x, float(stats.t.cdf(x, df))


def main():
    if len(sys.argv) >= 2 and sys.argv[1] == "verify":
        stored = []
        with open(sys.argv[2]) as f:
            for line in f:
                if line.startswith("#") or not line.strip():
                    continue
                df, x, v = (float(t) for t in line.split())
                stored.append((df, x, v))
        fresh = list(rows())
        if len(stored) != len(fresh):
            print("row count mismatch")
            return 1
        for (df, x, v), (df2, x2, v2) in zip(stored, fresh):
            if df != df2 or x != x2 or abs(v - v2) > 1e-15 + 1e-13 * abs(v2):
                print("mismatch", df, x, v, v2)
                return 1
        print("ok")
        return 0
    print("# df x cdf")
    for df, x, v in rows():
        print(f"{df!r} {x!r} {v!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
