#!/usr/bin/env python3
"""Generate a regular LDPC parity-check matrix without 4-cycles and write it as alist.

Edges are placed column by column; each new edge picks, among the rows with
spare degree, one that shares no other row with this column's existing
neighbours (progressive placement with restart on dead ends).
"""
import argparse
import random
import sys


def build(n, wc, wr, rng, max_restarts=10000):
    m = n * wc // wr
    for _ in range(max_restarts):
        row_deg = [0] * m
        rows_of_col = [[] for _ in range(n)]
        cols_of_row = [[] for _ in range(m)]
        ok = True
        for v in range(n):
            for _ in range(wc):
                forbidden = set(rows_of_col[v])
                for r in rows_of_col[v]:
                    for u in cols_of_row[r]:
                        forbidden.update(rows_of_col[u])
                spare = [r for r in range(m) if row_deg[r] < wr and r not in forbidden]
                if not spare:
                    ok = False
                    break
                low = min(row_deg[r] for r in spare)
                r = rng.choice([r for r in spare if row_deg[r] == low])
                row_deg[r] += 1
                rows_of_col[v].append(r)
                cols_of_row[r].append(v)
            if not ok:
                break
        if ok:
            return m, rows_of_col, cols_of_row
    raise RuntimeError("no construction found")


def gf2_rank(m, n, cols_of_row):
    rows = []
    for r in range(m):
        x = 0
        for c in cols_of_row[r]:
            x |= 1 << c
        rows.append(x)
    rank = 0
    for c in range(n):
        piv = next((i for i in range(rank, m) if rows[i] >> c & 1), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(m):
            if i != rank and rows[i] >> c & 1:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=204)
    ap.add_argument("--wc", type=int, default=3)
    ap.add_argument("--wr", type=int, default=6)
    ap.add_argument("--seed", type=int, default=204)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    while True:
        m, rows_of_col, cols_of_row = build(args.n, args.wc, args.wr, rng)
        if gf2_rank(m, args.n, cols_of_row) == m:
            break
    out = sys.stdout
    out.write(f"{args.n} {m}\n{args.wc} {args.wr}\n")
    out.write(" ".join([str(args.wc)] * args.n) + "\n")
    out.write(" ".join([str(args.wr)] * m) + "\n")
    for v in range(args.n):
        out.write(" ".join(str(r + 1) for r in sorted(rows_of_col[v])) + "\n")
    for r in range(m):
        out.write(" ".join(str(c + 1) for c in sorted(cols_of_row[r])) + "\n")


if __name__ == "__main__":
    main()
