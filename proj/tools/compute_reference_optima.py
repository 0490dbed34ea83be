#!/usr/bin/env python3
"""Brute-force reference optima for the benchmark registry.

d <= 2: 1e5 uniform starts, the best 1000 refined with L-BFGS-B.
d >  2: 1e6 uniform samples, the best 100 refined with L-BFGS-B.

The printed values are the ones frozen into include/eebo/benchmarks.hpp.
"""
import numpy as np
from scipy.optimize import minimize

A_H6 = np.array([[10, 3, 17, 3.5, 1.7, 8], [0.05, 10, 17, 0.1, 8, 14],
                 [3, 3.5, 1.7, 10, 17, 8], [17, 8, 0.05, 10, 0.1, 14]])
P_H6 = 1e-4 * np.array([[1312, 1696, 5569, 124, 8283, 5886],
                        [2329, 4135, 8307, 3736, 1004, 9991],
                        [2348, 1451, 3522, 2883, 3047, 6650],
                        [4047, 8828, 8732, 5743, 1091, 381]])
ALPHA_H6 = np.array([1.0, 1.2, 3.0, 3.2])


def wangfreitas(x):
    x = x[..., 0]
    return -(2 * np.exp(-0.5 * ((x - 0.1) / 0.1) ** 2)
             + 4 * np.exp(-0.5 * ((x - 0.9) / 0.01) ** 2))


def branin_core(x):
    x1, x2 = x[..., 0], x[..., 1]
    b, c, t = 5.1 / (4 * np.pi ** 2), 5 / np.pi, 1 / (8 * np.pi)
    return (x2 - b * x1 ** 2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


def branin_forrester(x):
    return branin_core(x) + 5 * x[..., 0]


def cosines(x):
    u = 1.6 * x - 0.5
    return -(1 - np.sum(u ** 2 - 0.3 * np.cos(3 * np.pi * u), axis=-1))


def goldstein_price(x):
    x1, x2 = x[..., 0], x[..., 1]
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1 ** 2 - 14 * x2 + 6 * x1 * x2 + 3 * x2 ** 2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1 ** 2 + 48 * x2 - 36 * x1 * x2 + 27 * x2 ** 2)
    return a * b


def six_hump(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (4 - 2.1 * x1 ** 2 + x1 ** 4 / 3) * x1 ** 2 + x1 * x2 + (-4 + 4 * x2 ** 2) * x2 ** 2


def hartmann6(x):
    inner = np.sum(A_H6 * (x[..., None, :] - P_H6) ** 2, axis=-1)
    return -np.sum(ALPHA_H6 * np.exp(-inner), axis=-1)


def gsobol_abs(x):
    return np.prod(np.abs(4 * x - 1) / 2, axis=-1)


def rosenbrock(x):
    return np.sum(100 * (x[..., 1:] - x[..., :-1] ** 2) ** 2 + (x[..., :-1] - 1) ** 2, axis=-1)


def styblinski_tang(x):
    return 0.5 * np.sum(x ** 4 - 16 * x ** 2 + 5 * x, axis=-1)


PROBLEMS = {
    "WangFreitas": (wangfreitas, [0.0], [1.0]),
    "Branin": (branin_core, [-5.0, 0.0], [10.0, 15.0]),
    "BraninForrester": (branin_forrester, [-5.0, 0.0], [10.0, 15.0]),
    "Cosines": (cosines, [0.0, 0.0], [5.0, 5.0]),
    "GoldsteinPrice": (goldstein_price, [-2.0, -2.0], [2.0, 2.0]),
    "SixHumpCamel": (six_hump, [-3.0, -2.0], [3.0, 2.0]),
    "Hartmann6": (hartmann6, [0.0] * 6, [1.0] * 6),
    "GSobol": (gsobol_abs, [-5.0] * 10, [5.0] * 10),
    "Rosenbrock": (rosenbrock, [-5.0] * 10, [10.0] * 10),
    "StyblinskiTang": (styblinski_tang, [-5.0] * 10, [5.0] * 10),
}


def oracle(f, lo, hi, rng):
    lo, hi = np.array(lo), np.array(hi)
    d = lo.size
    n_samples, n_refine = (100_000, 1000) if d <= 2 else (1_000_000, 100)
    best = np.inf
    chunk = 100_000
    starts = []
    for _ in range(n_samples // chunk):
        X = lo + (hi - lo) * rng.random((chunk, d))
        v = f(X)
        idx = np.argsort(v)[:n_refine]
        starts.extend(zip(v[idx], X[idx]))
    starts.sort(key=lambda p: p[0])
    for v0, x0 in starts[:n_refine]:
        res = minimize(lambda z: float(f(z[None, :])[0]), x0, method="L-BFGS-B",
                       bounds=list(zip(lo, hi)), options={"ftol": 1e-15, "gtol": 1e-12})
        best = min(best, v0, res.fun)
    return best


if __name__ == "__main__":
    rng = np.random.default_rng(20200101)
    for name, (f, lo, hi) in PROBLEMS.items():
        print(f"{name:16s} {oracle(f, lo, hi, rng):.15g}")
