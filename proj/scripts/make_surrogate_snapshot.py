#!/usr/bin/env python3
"""Regenerate the offline weekly bug-count snapshots under data/.

The tracker could not be reached when this repository was assembled, so the
bundled arrival and resolved series are simulated: a slowly varying level plus
an AR(2) component with Student-t innovations, a holiday dip around new year,
one arrival spike and one resolved spike in December 2013. Summary statistics
(522 weeks, 50..558 range, ~100k total arrivals) follow the Mozilla
2010-2019 extraction. Replace with live data via `bugcast fetch`.
"""
import datetime as dt
import pathlib

import numpy as np

WEEKS = 522
FIRST_MONDAY = dt.date(2010, 1, 4)


def simulate(seed, base, amp, phi1, phi2, sigma):
    rng = np.random.default_rng(seed)
    t = np.arange(WEEKS)
    weeks = [FIRST_MONDAY + dt.timedelta(days=7 * i) for i in range(WEEKS)]
    level = base + amp * np.sin(2 * np.pi * t / 330 + 0.4) + 0.5 * amp * np.sin(2 * np.pi * t / 150 + 1.3)
    noise = rng.standard_t(5, size=WEEKS) * sigma
    ar = np.zeros(WEEKS)
    for k in range(2, WEEKS):
        ar[k] = phi1 * ar[k - 1] + phi2 * ar[k - 2] + noise[k]
    y = level + ar
    for i, w in enumerate(weeks):
        if (w.month == 12 and w.day >= 22) or (w.month == 1 and w.day <= 3):
            y[i] *= 0.75
    return weeks, np.clip(np.round(y), 50, None).astype(int)


def write(path, weeks, counts):
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write("week_start,count\n")
        for w, c in zip(weeks, counts):
            f.write(f"{w.isoformat()},{c}\n")


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data"
    weeks, arrivals = simulate(1494, 198, 22, 0.55, 0.38, 27)
    arrivals[int(np.argmax(arrivals[:360]))] = 558
    write(out / "mozilla_arrivals.csv", weeks, arrivals)

    weeks, resolved = simulate(77, 185, 18, 0.5, 0.35, 25)
    resolved[weeks.index(dt.date(2013, 12, 16))] = 1450
    write(out / "mozilla_resolved.csv", weeks, resolved)


if __name__ == "__main__":
    main()
