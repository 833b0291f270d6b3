"""Exact counting, enumeration and uniform sampling of restricted Lee spheres.

Counts are arbitrary-precision Python integers throughout; they routinely
exceed 2^64 and feed probability ratios.  The only floating point in this
module is the log-space table used by the sampler, whose memory would
otherwise blow up for cryptographic-size instances (the exact counters are
unaffected; sampler correctness is pinned by chi-square tests against the
enumerator).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .errors import EmptySetError, TooLargeError
from .ring import LeeVector, RingSpec

ENUMERATION_GUARD = 10**8

_memo_lock = threading.Lock()
# (q, p, rmin, rmax) -> list of DP rows; row i holds counts for length i.
_dp_memo: Dict[Tuple[int, int, int, int], List[List[int]]] = {}


@dataclass(frozen=True)
class WeightComposition:
    """Nonnegative integer parts, each bounded by the max single-entry weight."""

    parts: Tuple[int, ...]

    def __post_init__(self):
        if any(p < 0 for p in self.parts):
            raise ValueError("composition parts must be nonnegative")
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))

    @property
    def total(self) -> int:
        return sum(self.parts)

    def multiplicities(self) -> Dict[int, int]:
        """Count of parts of each positive size."""
        out: Dict[int, int] = {}
        for p in self.parts:
            if p > 0:
                out[p] = out.get(p, 0) + 1
        return out


def _allowed_weights(ring: RingSpec, rmin: int, rmax: int) -> List[int]:
    if not 0 <= rmin <= rmax <= ring.M:
        raise ValueError(f"invalid bounds rmin={rmin}, rmax={rmax} (M={ring.M})")
    return list(range(rmin, rmax + 1))


def _dp_rows(ring: RingSpec, rmin: int, rmax: int, n: int) -> List[List[int]]:
    """DP rows N[i][w] = #vectors of length i, entry weights in [rmin, rmax],
    total weight w.  Row i has full width i*rmax + 1; rows are extended on
    demand and shared per process."""
    key = (ring.q, ring.p, rmin, rmax)
    weights = _allowed_weights(ring, rmin, rmax)
    mults = [(j, ring.weight_multiplicity(j)) for j in weights]
    with _memo_lock:
        rows = _dp_memo.setdefault(key, [[1]])
        while len(rows) <= n:
            prev = rows[-1]
            cur = [0] * (len(prev) + rmax)
            for j, m in mults:
                for w, c in enumerate(prev):
                    if c:
                        cur[w + j] += m * c
            rows.append(cur)
        return rows


def count_sphere_restricted(t: int, n: int, ring: RingSpec, rmin: int = 0,
                            rmax: int | None = None) -> int:
    """|{x in (Z/qZ)^n : wt_L(x) = t, every entry weight in [rmin, rmax]}|."""
    if rmax is None:
        rmax = ring.M
    _allowed_weights(ring, rmin, rmax)
    if n < 0 or t < 0:
        raise ValueError("n and t must be nonnegative")
    if t > n * rmax or t < n * rmin:
        return 0
    row = _dp_rows(ring, rmin, rmax, n)[n]
    return row[t] if t < len(row) else 0


def count_sphere(t: int, n: int, ring: RingSpec) -> int:
    """F(t, n, q): the full Lee sphere size."""
    return count_sphere_restricted(t, n, ring, 0, ring.M)


def count_ball(t: int, n: int, ring: RingSpec) -> int:
    """V(t, n, q) = sum of sphere sizes up to radius t."""
    t = min(t, n * ring.M)
    return sum(count_sphere(w, n, ring) for w in range(t + 1))


def count_fitting_compositions(v: int, lam: WeightComposition) -> int:
    """Number of integer tuples pi with 0 <= pi_i <= lambda_i and sum(pi) = v."""
    if v < 0 or v > lam.total:
        raise ValueError(f"v={v} outside [0, {lam.total}]")
    ways = [1]
    for cap in lam.parts:
        width = min(len(ways) - 1 + cap, v) + 1
        nxt = [0] * width
        for w, c in enumerate(ways):
            if c:
                for j in range(min(cap, v - w) + 1):
                    nxt[w + j] += c
        ways = nxt
    return ways[v] if v < len(ways) else 0


@lru_cache(maxsize=32)
def _sample_log_table(n: int, t: int, ring: RingSpec, rmin: int, rmax: int) -> np.ndarray:
    """log N[i, w] for suffix lengths i = 0..n, weights w = 0..t."""
    weights = _allowed_weights(ring, rmin, rmax)
    logm = {j: np.log(ring.weight_multiplicity(j)) for j in weights}
    table = np.full((n + 1, t + 1), -np.inf)
    table[0, 0] = 0.0
    for i in range(1, n + 1):
        acc = np.full(t + 1, -np.inf)
        for j in weights:
            if j > t:
                continue
            shifted = np.full(t + 1, -np.inf)
            if j == 0:
                shifted = table[i - 1] + logm[j]
            else:
                shifted[j:] = table[i - 1][: t + 1 - j] + logm[j]
            acc = np.logaddexp(acc, shifted)
        table[i] = acc
    return table


def sample_sphere_restricted(t: int, n: int, ring: RingSpec, rmin: int, rmax: int,
                             rng: np.random.Generator) -> LeeVector:
    """Uniform draw from the restricted sphere.

    Entry weights are sampled left to right with probability proportional to
    multiplicity times the count of suffix completions, then a uniformly
    random representative of each weight is picked.
    """
    if not n * rmin <= t <= n * rmax:
        raise EmptySetError(f"restricted sphere (t={t}, n={n}, [{rmin},{rmax}]) is empty")
    table = _sample_log_table(n, t, ring, rmin, rmax)
    weights = _allowed_weights(ring, rmin, rmax)
    entries = []
    remaining = t
    for i in range(n):
        suffix = n - i - 1
        options = [j for j in weights if j <= remaining and table[suffix, remaining - j] > -np.inf]
        logp = np.array([
            np.log(ring.weight_multiplicity(j)) + table[suffix, remaining - j]
            for j in options
        ])
        logp -= logp.max()
        prob = np.exp(logp)
        prob /= prob.sum()
        j = options[rng.choice(len(options), p=prob)]
        reps = ring.representatives(j)
        entries.append(reps[rng.integers(len(reps))])
        remaining -= j
    assert remaining == 0
    return LeeVector(ring, tuple(entries))


def sample_sphere(t: int, n: int, ring: RingSpec, rng: np.random.Generator) -> LeeVector:
    """Uniform draw from the full Lee sphere S(0, t, n, q)."""
    return sample_sphere_restricted(t, n, ring, 0, ring.M, rng)


def sample_sphere_batch(t: int, n: int, ring: RingSpec, rng: np.random.Generator,
                        size: int, rmin: int = 0, rmax: int | None = None) -> np.ndarray:
    """Uniform draws from the restricted sphere as a (size, n) array.

    Same left-to-right weight chain as the single-vector sampler, but all
    draws advance in lockstep with the weight choice made by Gumbel argmax,
    so the cost per vector is n vectorized steps instead of n Python steps.
    """
    if rmax is None:
        rmax = ring.M
    if not n * rmin <= t <= n * rmax:
        raise EmptySetError(f"restricted sphere (t={t}, n={n}, [{rmin},{rmax}]) is empty")
    table = _sample_log_table(n, t, ring, rmin, rmax)
    weights = np.array(_allowed_weights(ring, rmin, rmax))
    logm = np.log([ring.weight_multiplicity(int(j)) for j in weights])
    twofold = np.array([ring.weight_multiplicity(int(j)) == 2 for j in weights])
    out = np.empty((size, n), dtype=np.int64)
    rem = np.full(size, t, dtype=np.int64)
    for i in range(n):
        left = rem[:, None] - weights[None, :]
        lp = np.where(left >= 0,
                      table[n - i - 1, np.maximum(left, 0)] + logm[None, :],
                      -np.inf)
        pick = np.argmax(lp + rng.gumbel(size=lp.shape), axis=1)
        j = weights[pick]
        flip = twofold[pick] & (rng.integers(0, 2, size=size) == 1)
        out[:, i] = np.where(flip, (ring.q - j) % ring.q, j)
        rem -= j
    assert not rem.any()
    return out


def enumerate_sphere_restricted(t: int, n: int, ring: RingSpec, rmin: int = 0,
                                rmax: int | None = None,
                                guard: int = ENUMERATION_GUARD) -> Iterator[LeeVector]:
    """Yield every sphere element exactly once, lexicographic on
    (weight composition, sign pattern).  Deterministic for test oracles."""
    if rmax is None:
        rmax = ring.M
    total = count_sphere_restricted(t, n, ring, rmin, rmax)
    if total > guard:
        raise TooLargeError(f"enumeration of {total} vectors exceeds guard {guard}")
    weights = _allowed_weights(ring, rmin, rmax)

    def rec(i: int, remaining: int, prefix: List[int]) -> Iterator[Tuple[int, ...]]:
        if i == n:
            if remaining == 0:
                yield tuple(prefix)
            return
        suffix = n - i - 1
        for j in weights:
            if j > remaining or remaining - j > suffix * rmax or remaining - j < suffix * rmin:
                continue
            for rep in ring.representatives(j):
                prefix.append(rep)
                yield from rec(i + 1, remaining - j, prefix)
                prefix.pop()

    for entries in rec(0, t, []):
        yield LeeVector(ring, entries)
