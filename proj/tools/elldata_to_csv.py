#!/usr/bin/env python3
"""Convert PARI/GP elldata files (Cremona tables) into the curve ingestion CSV.

Each elldata file holds a GP vector of [conductor, [label, [a1,a2,a3,a4,a6], gens], ...].
The rank is the number of listed generators. Models in these tables are minimal.

    python3 tools/elldata_to_csv.py --max-conductor 3000 ell0 ell1 ell2 ell3 > data/curves.csv
"""
import argparse
import json
import re
import sys

RATIONAL = re.compile(r"(-?\d+)/(\d+)")


def rows(path):
    text = RATIONAL.sub(lambda m: f'"{m.group(0)}"', open(path).read())
    for block in json.loads(text):
        conductor = block[0]
        for label, coeffs, gens in block[1:]:
            yield label, conductor, len(gens), coeffs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--min-conductor", type=int, default=1)
    ap.add_argument("--max-conductor", type=int, default=None)
    ap.add_argument("files", nargs="+")
    args = ap.parse_args()
    out = sys.stdout
    out.write("label,conductor,rank,w1,w2,w3,w4,w6\n")
    for path in args.files:
        for label, conductor, rank, c in rows(path):
            if conductor < args.min_conductor:
                continue
            if args.max_conductor is not None and conductor > args.max_conductor:
                continue
            out.write(f"{label},{conductor},{rank},{c[0]},{c[1]},{c[2]},{c[3]},{c[4]}\n")


if __name__ == "__main__":
    main()
