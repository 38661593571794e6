"""Ridge trace on a small ill-posed problem.

Fits the same 30 x 45 instance (more predictors than observations) along the
default ridge grid, showing how the coefficient norm shrinks as the ridge
constant grows and where the two leave-one-out criteria put their minimum.

Run: python3 demos/01_ridge_trace.py
"""

import numpy as np

from itcridge import (
    Criterion,
    RidgeSearchConfig,
    default_k_grid,
    gcv,
    press,
    ridge_fit,
    select_k,
)

rng = np.random.default_rng(42)
m, n = 30, 45
x = rng.normal(size=(m, n))
# ten informative columns, the rest is noise
b_true = np.zeros(n)
b_true[:10] = 2.0 * rng.choice([-1.0, 1.0], size=10)
y = x @ b_true + rng.normal(scale=4.0, size=m)

print(f"instance: {m} observations, {n} predictors, 10 informative")
print()

# k = 0 is refused here: X'X is singular when n > m
try:
    ridge_fit(x, y, 0.0)
except np.linalg.LinAlgError as exc:
    print(f"k = 0 fails as it should: {exc}")
print()

print(f"{'k':>10}  {'norm(b)':>10}  {'press':>10}  {'gcv':>10}")
for k in (1e-6, 1e-3, 1e-1, 1.0, 10.0, 1e3):
    fit = ridge_fit(x, y, k)
    print(f"{k:>10.0e}  {np.linalg.norm(fit.coefficients):>10.4f}  "
          f"{press(x, y, k):>10.4f}  {gcv(x, y, k):>10.4f}")
print()

grid = default_k_grid()
for criterion in (Criterion.PRESS, Criterion.GCV):
    best_k, curve = select_k(x, y, RidgeSearchConfig(grid=grid, criterion=criterion))
    at_min = float(np.nanmin(curve))
    print(f"{criterion.value:>5} picks k = {best_k:.4g} "
          f"(criterion value {at_min:.4f} over a {grid.size}-point grid)")

fit = ridge_fit(x, y, select_k(x, y, RidgeSearchConfig())[0])
top = sorted(np.argsort(-np.abs(fit.t_ratios))[:10].tolist())
hits = sum(1 for j in top if j < 10)
print()
print(f"largest |t| at columns {top}")
print(f"{hits}/10 of them sit in the informative block (columns 0-9), at a")
print("signal-to-noise ratio where least squares is not even defined")
