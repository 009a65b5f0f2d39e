#!/usr/bin/env python3
"""Incremental sufficient statistics.

Every leaf of a stream tree keeps (count, sum, centered second moment) per
variable. That triple is enough for the mean, the sample variance, and the
z-score scaling the linear leaf models train in - without storing a single
example. This script shows the accumulator matching a two-pass batch
computation and staying accurate where a naive sum-of-squares breaks down.
"""

import numpy as np

from mtstream import RunningStats

rng = np.random.default_rng(42)

# --- incremental equals batch -------------------------------------------------
data = rng.normal(loc=3.0, scale=2.0, size=10_000)
rs = RunningStats()
for v in data.tolist():
    rs.update(v)

print("incremental vs two-pass batch on 10k normal draws")
print(f"  mean:     {rs.mean:.12f}  vs  {np.mean(data):.12f}")
print(f"  variance: {rs.variance():.12f}  vs  {np.var(data, ddof=1):.12f}")

# --- z-score round trip ---------------------------------------------------------
probe = 7.5
z = rs.zscore(probe)
print(f"\nz-score of {probe}: {z:.6f}; inverse maps back to "
      f"{rs.inverse_zscore(z):.6f}")

# --- robustness to a large constant offset --------------------------------------
# A plain (sum, sum of squares) accumulator loses ~3 digits of variance here;
# the centered accumulator does not care.
shift = 1e5
shifted = RunningStats()
for v in (data[:1000] + shift).tolist():
    shifted.update(v)
base = RunningStats()
for v in data[:1000].tolist():
    base.update(v)

naive_sumsq = float(np.sum((data[:1000] + shift) ** 2))
naive_var = (naive_sumsq - shifted.sum ** 2 / shifted.n) / (shifted.n - 1)
print(f"\nvariance after shifting all inputs by {shift:.0e}:")
print(f"  centered accumulator: {shifted.variance():.9f} (true {base.variance():.9f})")
print(f"  naive sum-of-squares: {naive_var:.9f}")

# --- degenerate cases stay defined ----------------------------------------------
fresh = RunningStats()
print("\ncold start: mean", fresh.mean, "| variance", fresh.variance(),
      "| z-score", fresh.zscore(1.0), "| inverse z", fresh.inverse_zscore(0.5))
