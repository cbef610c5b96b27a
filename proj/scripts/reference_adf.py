#!/usr/bin/env python3
"""Writes the seeded ADF fixtures under tests/data/ and prints statsmodels reference values.

The printed numbers are frozen into tests/test_diagnostics.cpp.
"""
import math
import pathlib

import numpy as np
from statsmodels.tsa.stattools import adfuller, pacf

root = pathlib.Path(__file__).resolve().parent.parent
out = root / "tests" / "data"
out.mkdir(parents=True, exist_ok=True)


def schwert(n):
    return int(math.floor(12 * (n / 100) ** 0.25))


def report(name, y):
    r = adfuller(y, maxlag=schwert(len(y)), regression="c", autolag="AIC")
    print(f"{name}: stat={r[0]!r} p={r[1]!r} lag={r[2]} nobs={r[3]} crit={r[4]}")


rng = np.random.default_rng(20240501)
walk = np.cumsum(rng.standard_normal(500))
noise = np.random.default_rng(7).standard_normal(500)
np.savetxt(out / "random_walk_500.txt", walk, fmt="%.17g")
np.savetxt(out / "white_noise_500.txt", noise, fmt="%.17g")
report("random_walk_500", walk)
report("white_noise_500", noise)

arrivals = np.loadtxt(root / "data" / "mozilla_arrivals.csv", delimiter=",", skiprows=1, usecols=1)
report("mozilla_arrivals", arrivals)
print("mozilla pacf", list(np.round(pacf(arrivals, nlags=10, method="ldb"), 6)))
