#!/usr/bin/env python3
"""Writes the bundled synthetic 5-asset daily OHLC sample under data/sample/.

The series are seeded geometric random walks on weekdays only; they are
not market data. Re-running reproduces the files byte for byte.
"""
import csv
import datetime as dt
import math
import pathlib
import random

ASSETS = {
    # name: (start price, daily drift, daily volatility)
    "SYNA": (80.0, 0.0004, 0.012),
    "SYNB": (110.0, 0.0002, 0.016),
    "SYNC": (45.0, 0.0001, 0.011),
    "SYND": (60.0, 0.0005, 0.014),
    "SYNE": (95.0, 0.0003, 0.010),
}
START = dt.date(2015, 1, 2)
END = dt.date(2017, 11, 17)


def weekdays(start, end):
    d = start
    while d <= end:
        if d.weekday() < 5:
            yield d
        d += dt.timedelta(days=1)


def main():
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "data" / "sample"
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20171117)
    for name, (price, drift, vol) in ASSETS.items():
        rows = []
        close = price
        for day in weekdays(START, END):
            gap = rng.gauss(0.0, vol * 0.3)
            open_ = close * math.exp(gap)
            close = open_ * math.exp(drift + rng.gauss(0.0, vol))
            high = max(open_, close) * math.exp(abs(rng.gauss(0.0, vol * 0.5)))
            low = min(open_, close) * math.exp(-abs(rng.gauss(0.0, vol * 0.5)))
            rows.append((day.isoformat(), f"{open_:.4f}", f"{high:.4f}", f"{low:.4f}", f"{close:.4f}"))
        with open(out_dir / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "open", "high", "low", "close"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
