#!/usr/bin/env python3
"""Fetch the cadata regression set (libsvm format) and split it 4:1.

The file ships as a single 20,640-sample file; training experiments expect
a 16,512 / 4,128 train/test split. The split is a seeded shuffle of the raw
lines, so reruns with the same seed reproduce the same files byte for byte.

Usage: python3 scripts/fetch_cadata.py [--out-dir data] [--seed 0]
"""

import argparse
import bz2
import pathlib
import random
import urllib.request

URLS = [
    "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/regression/cadata",
    "http://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/regression/cadata",
]

EXPECT_TOTAL = 20640
TRAIN_N = 16512


def fetch():
    last = None
    for url in URLS:
        try:
            with urllib.request.urlopen(url, timeout=60) as r:
                raw = r.read()
            if url.endswith(".bz2"):
                raw = bz2.decompress(raw)
            return raw.decode()
        except Exception as e:  # noqa: BLE001 - try the next mirror
            last = e
    raise SystemExit(f"could not download cadata: {last}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="data")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = [ln for ln in fetch().splitlines() if ln.strip()]
    if len(lines) != EXPECT_TOTAL:
        raise SystemExit(f"expected {EXPECT_TOTAL} samples, got {len(lines)}")

    rng = random.Random(args.seed)
    rng.shuffle(lines)
    (out / "cadata.train").write_text("\n".join(lines[:TRAIN_N]) + "\n")
    (out / "cadata.test").write_text("\n".join(lines[TRAIN_N:]) + "\n")
    print(f"wrote {out/'cadata.train'} ({TRAIN_N}) and {out/'cadata.test'} "
          f"({EXPECT_TOTAL - TRAIN_N})")


if __name__ == "__main__":
    main()
