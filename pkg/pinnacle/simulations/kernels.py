"""
Compiled heat-bath kernels.

Heights live in a padded (L+2) x (L+2) int64 array whose outer ring holds the
boundary height. Every uniform is a pure function of (key, sweep, site), so a
sweep gives the same result in any update order within a parity class and on
any number of threads.
"""
import math

import numpy as np
from numba import njit, prange


GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)
INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * MIX_1
    z = (z ^ (z >> np.uint64(27))) * MIX_2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def site_uniform(key, sweep, site):
    """Uniform in [0, 1) keyed by (key, sweep, site)"""
    z = _mix(key + GOLDEN * np.uint64(sweep + 1))
    z = _mix(z + GOLDEN * np.uint64(site + 1))
    return float(z >> np.uint64(11)) * INV_2_53


@njit(cache=True)
def _site_energy(k, n0, n1, n2, n3, p):
    total = 0.0
    for n in (n0, n1, n2, n3):
        d = k - n
        if d < 0:
            d = -d
        if p == 1.0:
            total += d
        elif p == 2.0:
            total += d * d
        elif math.isinf(p):
            if d != 0:
                total += 1.0
        else:
            total += float(d) ** p
    return total


@njit(cache=True)
def candidate_range(n0, n1, n2, n3, p, floor, window):
    lo = min(min(n0, n1), min(n2, n3))
    hi = max(max(n0, n1), max(n2, n3))
    if math.isinf(p):
        a = hi - 1
        b = lo + 1
    else:
        a = lo - window
        b = hi + window
    if floor and a < 0:
        a = 0
    return a, b


@njit(cache=True)
def draw_height(n0, n1, n2, n3, beta, p, floor, window, u):
    """
    Inverse-CDF draw from the single-site conditional given the four neighbor
    heights. A larger u never gives a smaller height, and neither do larger
    neighbors, which is what keeps shared-uniform chains ordered.
    """
    a, b = candidate_range(n0, n1, n2, n3, p, floor, window)
    emin = np.inf
    for k in range(a, b + 1):
        e = _site_energy(k, n0, n1, n2, n3, p)
        if e < emin:
            emin = e
    total = 0.0
    for k in range(a, b + 1):
        total += math.exp(-beta * (_site_energy(k, n0, n1, n2, n3, p) - emin))
    target = u * total
    acc = 0.0
    for k in range(a, b + 1):
        acc += math.exp(-beta * (_site_energy(k, n0, n1, n2, n3, p) - emin))
        if acc > target:
            return k
    return b


@njit(cache=True)
def sequential_sweep(P, beta, p, floor, window, key, sweep):
    L = P.shape[0] - 2
    for i in range(1, L + 1):
        for j in range(1, L + 1):
            u = site_uniform(key, sweep, (i - 1) * L + (j - 1))
            P[i, j] = draw_height(P[i - 1, j], P[i + 1, j], P[i, j - 1], P[i, j + 1],
                                  beta, p, floor, window, u)


@njit(cache=True, parallel=True)
def parity_half_sweep(P, beta, p, floor, window, key, sweep, parity):
    """Update every site with (row + col) % 2 == parity; same-parity sites never touch"""
    L = P.shape[0] - 2
    for i in prange(1, L + 1):
        start = 1 + (i + 1 + parity) % 2
        for j in range(start, L + 1, 2):
            u = site_uniform(key, sweep, (i - 1) * L + (j - 1))
            P[i, j] = draw_height(P[i - 1, j], P[i + 1, j], P[i, j - 1], P[i, j + 1],
                                  beta, p, floor, window, u)


@njit(cache=True)
def run_sequential(P, beta, p, floor, window, key, first_sweep, n_sweeps):
    for s in range(n_sweeps):
        sequential_sweep(P, beta, p, floor, window, key, first_sweep + s)


@njit(cache=True)
def is_ordered(lower, upper):
    L = lower.shape[0]
    for i in range(L):
        for j in range(L):
            if lower[i, j] > upper[i, j]:
                return False
    return True
