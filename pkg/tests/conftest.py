import itertools
import math

import numpy as np

from leeisd.ring import RingSpec


def lee_wt(x: int, q: int) -> int:
    x %= q
    return min(x, q - x)


def brute_sphere(t: int, n: int, q: int, rmin: int = 0, rmax: int | None = None):
    """All length-n tuples over Z/qZ with Lee weight t and entry weights in
    [rmin, rmax].  Exponential; only for tiny n."""
    M = q // 2
    if rmax is None:
        rmax = M
    out = []
    for vec in itertools.product(range(q), repeat=n):
        ws = [lee_wt(x, q) for x in vec]
        if sum(ws) == t and all(rmin <= w <= rmax for w in ws):
            out.append(vec)
    return out


def log_sphere_count(t: int, n: int, ring: RingSpec, rmin: int = 0,
                     rmax: int | None = None) -> float:
    """Natural log of the restricted sphere size via a float DP.

    Streams one row at a time so it stays cheap at n in the thousands where
    the exact integer DP would hold millions of huge bigints.
    """
    M = ring.M
    if rmax is None:
        rmax = M
    steps = [(w, math.log(ring.weight_multiplicity(w)))
             for w in range(rmin, rmax + 1)]  # (weight, log multiplicity)
    row = np.full(t + 1, -np.inf)
    row[0] = 0.0
    for _ in range(n):
        new = np.full(t + 1, -np.inf)
        for w, lm in steps:
            if w > t:
                continue
            seg = row[: t + 1 - w] + lm
            tail = new[w:]
            np.logaddexp(tail, seg, out=tail)
        row = new
    return float(row[t])
