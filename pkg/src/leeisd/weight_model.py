"""Marginal distribution of entries of a uniform fixed-Lee-weight vector.

The entries of a long uniform weight-t vector behave like i.i.d. draws from a
Boltzmann law P(E = j) proportional to exp(-beta * wt_L(j)), with beta pinned
by the mean-weight constraint t/n.  Everything downstream (decoder parameter
choices, representation counts, asymptotic exponents) is built on this law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

from .counting import WeightComposition
from .ring import RingSpec

BETA_TOL = 1e-12
_BRACKET = 50.0


@dataclass(frozen=True)
class MarginalDistribution:
    ring: RingSpec
    beta: float
    normalizer: float
    elem_prob: Tuple[float, ...]   # length q, indexed by ring element
    weight_prob: Tuple[float, ...]  # length M+1, indexed by Lee weight


@dataclass(frozen=True)
class WeightStats:
    psi: float    # expected #entries of weight > r
    phi: float    # expected weight carried by entries of weight <= r
    sigma: float  # expected support size of a length-ell restriction


def _weight_probs(beta: float, weights: List[int], mults: List[int]) -> List[float]:
    """P(wt = j) for the Boltzmann law on an alphabet with the given weight
    multiplicities; stable for large |beta|."""
    exps = [-beta * w for w in weights]
    shift = max(exps)
    terms = [m * math.exp(e - shift) for m, e in zip(mults, exps)]
    z = sum(terms)
    return [t / z for t in terms]


def _mean_weight(beta: float, weights: List[int], mults: List[int]) -> float:
    probs = _weight_probs(beta, weights, mults)
    return sum(w * p for w, p in zip(weights, probs))


def _solve_beta_alphabet(target: float, weights: List[int], mults: List[int]) -> float:
    """Bracketed bisection for the mean-weight constraint.

    The constraint map beta -> mean weight is strictly decreasing, from
    max(weights) at beta -> -inf down to min(weights) at beta -> +inf.
    """
    if not min(weights) < target < max(weights):
        raise ValueError(f"target weight {target} outside ({min(weights)}, {max(weights)})")
    lo, hi = -_BRACKET, _BRACKET
    # mean(lo) > mean(hi); expand until the target is bracketed.
    while _mean_weight(lo, weights, mults) < target:
        lo *= 2.0
        if lo < -1e9:
            raise ValueError("bracket expansion failed (low side)")
    while _mean_weight(hi, weights, mults) > target:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError("bracket expansion failed (high side)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = _mean_weight(mid, weights, mults)
        if abs(val - target) < BETA_TOL:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _full_alphabet(ring: RingSpec) -> Tuple[List[int], List[int]]:
    weights = list(range(ring.M + 1))
    mults = [ring.weight_multiplicity(j) for j in weights]
    return weights, mults


def solve_beta(target: float, ring: RingSpec) -> float:
    """beta with sum_j wt_L(j) P(E=j) = target; requires 0 < target < M."""
    if not 0 < target < ring.M:
        raise ValueError(f"target {target} outside (0, {ring.M})")
    weights, mults = _full_alphabet(ring)
    return _solve_beta_alphabet(target, weights, mults)


def marginal(beta: float, ring: RingSpec) -> MarginalDistribution:
    """The Boltzmann marginal at the given parameter."""
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    q, M = ring.q, ring.M
    exps = [-beta * ring.lee_weight(j) for j in range(q)]
    shift = max(exps)
    terms = [math.exp(e - shift) for e in exps]
    z = sum(terms)
    elem = tuple(t / z for t in terms)
    weight = tuple(ring.weight_multiplicity(j) * elem[j] for j in range(M + 1))
    return MarginalDistribution(ring, beta, z * math.exp(shift), elem, weight)


def expected_stats(r: int, t: int, n: int, ell: int, ring: RingSpec) -> WeightStats:
    """psi, phi, sigma of the marginal law at beta = solve_beta(t/n)."""
    if not 0 <= r <= ring.M:
        raise ValueError(f"r={r} outside [0, {ring.M}]")
    if not 0 <= ell <= n:
        raise ValueError(f"ell={ell} outside [0, {n}]")
    beta = solve_beta(t / n, ring)
    wp = marginal(beta, ring).weight_prob
    psi = n * sum(wp[i] for i in range(r + 1, ring.M + 1))
    phi = n * sum(i * wp[i] for i in range(r + 1))
    sigma = ell * sum(wp[i] for i in range(1, ring.M + 1))
    return WeightStats(psi, phi, sigma)


def restricted_weight_probs(target: float, r: int, ring: RingSpec) -> List[float]:
    """Weight-law of the Boltzmann distribution conditioned on the restricted
    alphabet {0, +-1, ..., +-r}, with mean weight pinned to target.

    Returns probabilities for weights 0..r.  This is the correct law for a
    vector uniform on the r-restricted sphere (maximum entropy on the
    restricted alphabet), not a truncation of the full-alphabet law.
    """
    if not 0 <= r <= ring.M:
        raise ValueError(f"r={r} outside [0, {ring.M}]")
    weights = list(range(r + 1))
    mults = [ring.weight_multiplicity(j) for j in weights]
    if target <= 0:
        return [1.0] + [0.0] * r
    if target >= r:
        return [0.0] * r + [1.0]
    beta = _solve_beta_alphabet(target, weights, mults)
    return _weight_probs(beta, weights, mults)


def heavy_weight_probs(target: float, r: int, ring: RingSpec) -> List[float]:
    """Weight-law of the Boltzmann distribution conditioned on the heavy
    alphabet {+-r, ..., +-M}, mean pinned to target; weights r..M."""
    weights = list(range(r, ring.M + 1))
    mults = [ring.weight_multiplicity(j) for j in weights]
    if len(weights) == 1:
        return [1.0]
    if target <= r:
        return [1.0] + [0.0] * (len(weights) - 1)
    if target >= ring.M:
        return [0.0] * (len(weights) - 1) + [1.0]
    beta = _solve_beta_alphabet(target, weights, mults)
    return _weight_probs(beta, weights, mults)


def expected_composition(v: int, nprime: int, r: int, ring: RingSpec) -> WeightComposition:
    """Expected Lee weight composition of a uniform vector on the r-restricted
    sphere of weight v and length nprime.

    Part counts come from largest-remainder rounding of the conditional
    Boltzmann weight law (ties broken toward larger part sizes); the residual
    weight is then walked onto/off the largest parts so the total weight
    matches v exactly whenever the bounds allow.
    """
    if not 0 <= v <= nprime * r:
        raise ValueError(f"restricted sphere (v={v}, n'={nprime}, r={r}) is empty")
    if nprime == 0:
        return WeightComposition(())
    probs = restricted_weight_probs(v / nprime, r, ring)
    raw = [p * nprime for p in probs]
    counts = [int(math.floor(x)) for x in raw]
    remainders = [x - c for x, c in zip(raw, counts)]
    short = nprime - sum(counts)
    # Largest remainder first; ties go to the larger part size.
    order = sorted(range(r + 1), key=lambda i: (-remainders[i], -i))
    for i in order[:short]:
        counts[i] += 1
    # Walk single units of weight between adjacent part sizes until the
    # composition carries exactly v (always reachable inside [0, nprime*r]).
    diff = v - sum(i * c for i, c in enumerate(counts))
    while diff > 0:
        i = max(i for i in range(r) if counts[i] > 0)
        counts[i] -= 1
        counts[i + 1] += 1
        diff -= 1
    while diff < 0:
        i = min(i for i in range(1, r + 1) if counts[i] > 0)
        counts[i] -= 1
        counts[i - 1] += 1
        diff += 1
    parts = []
    for size in range(r, -1, -1):
        parts.extend([size] * counts[size])
    return WeightComposition(tuple(parts))
