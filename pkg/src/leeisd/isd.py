"""Concrete Lee-metric syndrome decoders.

Contains the brute-force oracle, the two merge primitives (concatenation merge
on u syndrome coordinates, final merge on all ell coordinates), and the
two-level representation decoder in both regimes: small restricted entries
(below the GV weight) and heavy entries (beyond it), with optional
amortization of the base lists.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .code_algebra import (SdpInstance, matmul_mod,
                           partial_gaussian_elimination, syndrome)
from .counting import (ENUMERATION_GUARD, count_fitting_compositions,
                       count_sphere, count_sphere_restricted,
                       enumerate_sphere_restricted)
from .errors import (BudgetExhaustedError, EmptySetError,
                     InfeasibleParamsError, SingularSelectionError,
                     TooLargeError)
from .ring import LeeVector, RingSpec
from .weight_model import expected_composition

DEFAULT_MAX_ITERS = 10**6
LIST_GUARD = 2 * 10**6


@dataclass
class SolverParams:
    ell: int
    v: int
    eps: int
    r: int
    u: int
    amortized: bool = False
    list_cap: Optional[int] = None
    max_iters: Optional[int] = None
    mode: str = "below"

    def validate(self, inst: SdpInstance) -> None:
        n, k, t, M = inst.n, inst.k, inst.t, inst.ring.M
        kl = k + self.ell
        if not 0 <= self.ell <= n - k:
            raise InfeasibleParamsError(f"ell={self.ell} outside [0, {n - k}]")
        if not 0 <= self.v <= t:
            raise InfeasibleParamsError(f"v={self.v} outside [0, {t}]")
        if not 0 <= self.eps <= kl:
            raise InfeasibleParamsError(f"eps={self.eps} outside [0, {kl}]")
        if not 0 <= self.u <= self.ell:
            raise InfeasibleParamsError(f"u={self.u} outside [0, {self.ell}]")
        if not 0 <= self.r <= M:
            raise InfeasibleParamsError(f"r={self.r} outside [0, {M}]")
        if self.mode not in ("below", "beyond"):
            raise InfeasibleParamsError(f"unknown mode {self.mode!r}")
        if self.mode == "beyond":
            if self.v < self.eps * (M - self.r) + self.r * kl:
                raise InfeasibleParamsError(
                    "beyond mode needs v >= eps(M-r) + r(k+ell)")
            if 2 * self.eps > kl:
                raise InfeasibleParamsError("beyond mode needs eps <= (k+ell)/2")


@dataclass
class SolutionReport:
    solution: Optional[LeeVector]
    iterations: int
    wall_time: float
    lists_peak: int

    @property
    def solved(self) -> bool:
        return self.solution is not None

    def stats_line(self) -> str:
        return (f"solved={int(self.solved)} iterations={self.iterations} "
                f"lists_peak={self.lists_peak} wall_time={self.wall_time:.6f}")


@dataclass(frozen=True)
class IndexedListEntry:
    x: Tuple[int, ...]
    key: Tuple[int, ...]


# ---------------------------------------------------------------------------
# Oracle


def brute_force_solve(inst: SdpInstance, stop_at_first: bool = False) -> List[LeeVector]:
    """All (or the first) weight-t vectors with the given syndrome, in the
    deterministic enumeration order of the sphere."""
    out = []
    target = inst.s.tolist()
    for e in enumerate_sphere_restricted(inst.t, inst.n, inst.ring):
        if syndrome(inst.H, e.entries, inst.ring.q).tolist() == target:
            out.append(e)
            if stop_at_first:
                break
    return out


# ---------------------------------------------------------------------------
# Merge primitives


def _weight_table(ring: RingSpec) -> np.ndarray:
    a = np.arange(ring.q, dtype=np.int64)
    return np.minimum(a, ring.q - a)


def _keys(vectors: np.ndarray, Bmat: np.ndarray, target_offset: Optional[np.ndarray],
          u: int, q: int) -> List[Tuple[int, ...]]:
    """Last-u coordinates of x B^T (or target - x B^T) per row, as tuples."""
    if len(vectors) == 0:
        return []
    syn = matmul_mod(vectors, Bmat.T, q)
    if target_offset is not None:
        syn = (target_offset - syn) % q
    if u == 0:
        return [()] * len(vectors)
    tail = syn[:, syn.shape[1] - u:]
    return [tuple(int(x) for x in row) for row in tail]


def merge_concatenate(B1: Sequence[Sequence[int]], B2: Sequence[Sequence[int]],
                      Bmat1: np.ndarray, Bmat2: np.ndarray,
                      target: np.ndarray, u: int, q: int) -> List[Tuple[int, ...]]:
    """All concatenations (x1, x2) with x1 B1^T = target - x2 B2^T on the last
    u syndrome coordinates.  Output order is deterministic: x2 in input order,
    matching x1 sorted by key then input order."""
    if len(B1) == 0 or len(B2) == 0:
        return []
    arr1 = np.asarray(B1, dtype=np.int64)
    arr2 = np.asarray(B2, dtype=np.int64)
    target = np.asarray(target, dtype=np.int64) % q
    k1 = _keys(arr1, Bmat1, None, u, q)
    k2 = _keys(arr2, Bmat2, target, u, q)
    order = sorted(range(len(B1)), key=lambda i: (k1[i], i))
    sorted_keys = [k1[i] for i in order]
    out: List[Tuple[int, ...]] = []
    for j, key in enumerate(k2):
        lo = bisect_left(sorted_keys, key)
        hi = bisect_right(sorted_keys, key)
        x2 = tuple(int(x) for x in arr2[j])
        for idx in order[lo:hi]:
            out.append(tuple(int(x) for x in arr1[idx]) + x2)
    return out


def last_merge(L1: Sequence[Sequence[int]], L2: Sequence[Sequence[int]],
               Bmat: np.ndarray, s2: np.ndarray, Amat: np.ndarray,
               s1: np.ndarray, v: int, t: int, u: int, r: int,
               ring: RingSpec, mode: str = "below",
               ) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Scan collisions y1 B^T = s2 - y2 B^T on all ell coordinates; return the
    first (e1, e2) passing wt(e2) = v and wt(s1 - e2 A^T) = t - v.

    Weight-v collisions whose cancellation positions did not actually cancel
    are accepted whenever the two checks pass.
    """
    if len(L1) == 0 or len(L2) == 0:
        return None
    q = ring.q
    wt = _weight_table(ring)
    arr1 = np.asarray(L1, dtype=np.int64)
    arr2 = np.asarray(L2, dtype=np.int64)
    s2 = np.asarray(s2, dtype=np.int64) % q
    s1 = np.asarray(s1, dtype=np.int64) % q
    ell = Bmat.shape[0]
    k1 = _keys(arr1, Bmat, None, ell, q)
    k2 = _keys(arr2, Bmat, s2, ell, q)
    order = sorted(range(len(L1)), key=lambda i: (k1[i], i))
    sorted_keys = [k1[i] for i in order]
    for j, key in enumerate(k2):
        lo = bisect_left(sorted_keys, key)
        hi = bisect_right(sorted_keys, key)
        for idx in order[lo:hi]:
            e2 = (arr1[idx] + arr2[j]) % q
            if int(wt[e2].sum()) != v:
                continue
            e1 = (s1 - matmul_mod(Amat, e2, q)) % q
            if int(wt[e1].sum()) != t - v:
                continue
            return (tuple(int(x) for x in e1), tuple(int(x) for x in e2))
    return None


# ---------------------------------------------------------------------------
# Base lists


def _half_lengths(kl: int) -> Tuple[int, int]:
    return (kl + 1) // 2, kl // 2


def _place(length: int, positions: Sequence[int], values: Sequence[int],
           rest_positions: Sequence[int], rest_values: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * length
    for p, x in zip(positions, values):
        out[p] = x
    for p, x in zip(rest_positions, rest_values):
        out[p] = x
    return tuple(out)


def build_base_lists_small(kl: int, eps: int, v: int, r: int, ring: RingSpec,
                           E_set: Sequence[int],
                           ) -> Tuple[List[Tuple[int, ...]], List[Tuple[int, ...]]]:
    """Exhaustive half-vector lists: restricted entries of weight ~v/4 outside
    the cancellation positions, nonzero free values on them.

    E_set holds the eps cancellation coordinates (absolute, in [0, k+ell));
    its left-half part belongs to the first list.  Rounding: the left list
    takes the ceilings of v/4 and eps/2.
    """
    lh, rh = _half_lengths(kl)
    E1 = sorted(i for i in E_set if i < lh)
    E2 = sorted(i - lh for i in E_set if i >= lh)
    if len(E1) + len(E2) != eps:
        raise InfeasibleParamsError("E_set size does not match eps")
    w1 = -(-v // 4)
    w2 = v // 4
    out = []
    for half, Eh, wh in ((lh, E1, w1), (rh, E2, w2)):
        rest = [i for i in range(half) if i not in Eh]
        if count_sphere_restricted(wh, len(rest), ring, 0, r) == 0:
            raise EmptySetError(
                f"restricted sphere (w={wh}, len={len(rest)}, r={r}) is empty")
        lst = []
        free_vals = list(product(range(1, ring.q), repeat=len(Eh)))
        for z in enumerate_sphere_restricted(wh, len(rest), ring, 0, r):
            for vals in free_vals:
                lst.append(_place(half, Eh, vals, rest, z.entries))
        out.append(lst)
    return out[0], out[1]


def build_base_lists_large(kl: int, eps: int, v: int, r: int, ring: RingSpec,
                           partition: Optional[Tuple[Sequence[int], Sequence[int]]] = None,
                           ) -> Tuple[List[Tuple[int, ...]], List[Tuple[int, ...]]]:
    """Heavy-entry half-vector lists: a zero block, a block of entries with
    Lee weight in [r, M] carrying ~(v - eps*M)/4, and eps/2 unrestricted
    coordinates.  All placements of the blocks within the half are enumerated
    (zero and heavy supports are kept pairwise disjoint); passing an explicit
    partition (free positions, heavy positions) per half pins the placement
    instead."""
    M, q = ring.M, ring.q
    lh, rh = _half_lengths(kl)
    e1, e2 = -(-eps // 2), eps // 2
    vw = v - eps * M
    if vw < 0:
        raise InfeasibleParamsError("v below eps*M")
    w1, w2 = -(-vw // 4), vw // 4
    halves = []
    for half, eh, wv in ((lh, e1, w1), (rh, e2, w2)):
        m = half - eh
        wlen = m // 2
        lst: List[Tuple[int, ...]] = []
        if partition is None:
            e_choices = list(combinations(range(half), eh))
        else:
            e_choices = [tuple(partition[0 if half == lh else 1])[:eh]]
        size = (math.comb(half, eh) * q**eh * math.comb(m, wlen)
                * count_sphere_restricted(wv, wlen, ring, r, M))
        if size == 0:
            raise EmptySetError(
                f"heavy sphere (w={wv}, len={wlen}, r={r}) is empty")
        if size > LIST_GUARD:
            raise TooLargeError(f"base list size {size} exceeds guard {LIST_GUARD}")
        for Eh in e_choices:
            rest = [i for i in range(half) if i not in Eh]
            for Wh in combinations(rest, wlen):
                for z in enumerate_sphere_restricted(wv, wlen, ring, r, M):
                    base = [0] * half
                    for p, x in zip(Wh, z.entries):
                        base[p] = x
                    for vals in product(range(q), repeat=eh):
                        x = list(base)
                        for p, val in zip(Eh, vals):
                            x[p] = val
                        lst.append(tuple(x))
        halves.append(lst)
    return halves[0], halves[1]


# ---------------------------------------------------------------------------
# Merge width


def _floor_log(q: int, value: int) -> int:
    if value < 1:
        return 0
    u = 0
    while q ** (u + 1) <= value:
        u += 1
    return u


def choose_u_small(v: int, kl: int, eps: int, r: int, ring: RingSpec,
                   ell: Optional[int] = None) -> int:
    """Floor q-ary log of the expected representation count of a solution
    sub-vector: fitting compositions of v/2 into its expected composition,
    times the placements and values of the eps cancellation positions."""
    lam = expected_composition(v, kl, r, ring)
    sigma = sum(1 for part in lam.parts if part > 0)
    if eps > kl - sigma:
        reps = 0
    else:
        reps = (count_fitting_compositions(v // 2, lam)
                * math.comb(kl - sigma, eps) * (ring.q - 1) ** eps)
    u = _floor_log(ring.q, reps)
    if ell is not None:
        u = min(u, ell)
    return max(u, 0)


def exact_rb_large(kl: int, eps: int, r: int, ring: RingSpec) -> int:
    """Exact lower-bound representation count for the heavy construction."""
    M = ring.M
    epsp = kl - eps
    total = 0
    for i in range(eps + 1):
        total += (math.comb(eps, i) * (M - r + 1) ** i * r ** (eps - i)
                  * math.comb(epsp, i) * (M - r + 1) ** i
                  * math.comb(epsp - i, (epsp - i) // 2))
    return math.comb(kl, eps) * total


def choose_u_large(kl: int, eps: int, r: int, ring: RingSpec,
                   ell: Optional[int] = None) -> int:
    """Floor q-ary log of the exact heavy representation count."""
    if 2 * eps > kl:
        raise InfeasibleParamsError("need eps <= (k+ell)/2")
    u = _floor_log(ring.q, exact_rb_large(kl, eps, r, ring))
    if ell is not None:
        u = min(u, ell)
    return max(u, 0)


# ---------------------------------------------------------------------------
# The decoder loop


def _truncate(lst: List[Tuple[int, ...]], cap: Optional[int],
              rng: np.random.Generator) -> List[Tuple[int, ...]]:
    if cap is None or len(lst) <= cap:
        return lst
    idx = np.sort(rng.choice(len(lst), size=cap, replace=False))
    return [lst[int(i)] for i in idx]


def _draw_e_set(kl: int, eps: int, rng: np.random.Generator) -> List[int]:
    lh, rh = _half_lengths(kl)
    e1 = -(-eps // 2)
    left = rng.choice(lh, size=e1, replace=False) if e1 else np.empty(0, int)
    right = lh + rng.choice(rh, size=eps - e1, replace=False) if eps - e1 else np.empty(0, int)
    return sorted(int(i) for i in np.concatenate([left, right]))


def _finish(inst: SdpInstance, perm: np.ndarray, e1: Sequence[int],
            e2: Sequence[int], iterations: int, start: float,
            lists_peak: int) -> SolutionReport:
    e = np.zeros(inst.n, dtype=np.int64)
    eprime = list(e1) + list(e2)
    for i, val in enumerate(eprime):
        e[int(perm[i])] = val
    sol = LeeVector(inst.ring, tuple(int(x) for x in e))
    # Both output contracts are asserted on every return path.
    assert syndrome(inst.H, sol.entries, inst.ring.q).tolist() == inst.s.tolist()
    assert sol.weight == inst.t
    return SolutionReport(sol, iterations, time.perf_counter() - start, lists_peak)


def _bjmm_loop(inst: SdpInstance, params: SolverParams, rng: np.random.Generator,
               large: bool) -> SolutionReport:
    params.validate(inst)
    ring, q = inst.ring, inst.ring.q
    n, k, t = inst.n, inst.k, inst.t
    ell, v, eps, r, u = params.ell, params.v, params.eps, params.r, params.u
    kl = k + ell
    lh, _ = _half_lengths(kl)
    cap = params.list_cap
    if params.amortized:
        cap = min(cap, q**u) if cap is not None else q**u
    budget = params.max_iters if params.max_iters is not None else DEFAULT_MAX_ITERS
    start = time.perf_counter()
    lists_peak = 0
    target0 = np.zeros(ell, dtype=np.int64)
    for it in range(1, budget + 1):
        perm = rng.permutation(n)
        try:
            pge = partial_gaussian_elimination(inst, ell, perm)
        except SingularSelectionError:
            continue
        if large:
            B1, B2 = build_base_lists_large(kl, eps, v, r, ring)
        else:
            B1, B2 = build_base_lists_small(kl, eps, v, r, ring,
                                            _draw_e_set(kl, eps, rng))
        B1 = _truncate(B1, cap, rng)
        B2 = _truncate(B2, cap, rng)
        Bm1, Bm2 = pge.B[:, :lh], pge.B[:, lh:]
        L1 = merge_concatenate(B1, B2, Bm1, Bm2, target0, u, q)
        L2 = merge_concatenate(B1, B2, Bm1, Bm2, pge.s2, u, q)
        lists_peak = max(lists_peak, len(B1), len(B2), len(L1), len(L2))
        hit = last_merge(L1, L2, pge.B, pge.s2, pge.A, pge.s1, v, t, u, r,
                         ring, params.mode)
        if hit is not None:
            return _finish(inst, pge.perm, hit[0], hit[1], it, start, lists_peak)
    report = SolutionReport(None, budget, time.perf_counter() - start, lists_peak)
    raise BudgetExhaustedError(f"no solution within {budget} iterations", report)


def bjmm_small_balls(inst: SdpInstance, params: SolverParams,
                     rng: np.random.Generator) -> SolutionReport:
    """Two-level representation decoder with small restricted entries on the
    information window (t/n below M/2 recommended)."""
    if params.mode != "below":
        raise InfeasibleParamsError("bjmm_small_balls requires below mode")
    return _bjmm_loop(inst, params, rng, large=False)


def bjmm_large_weights(inst: SdpInstance, params: SolverParams,
                       rng: np.random.Generator) -> SolutionReport:
    """Reversed decoder for heavy errors (t/n above M/2 recommended); any
    returned vector satisfies the weight and syndrome contract (several
    solutions typically exist)."""
    if params.mode != "beyond":
        raise InfeasibleParamsError("bjmm_large_weights requires beyond mode")
    return _bjmm_loop(inst, params, rng, large=True)


def solve(inst: SdpInstance, params: SolverParams,
          rng: np.random.Generator) -> SolutionReport:
    if params.mode == "beyond":
        return bjmm_large_weights(inst, params, rng)
    return bjmm_small_balls(inst, params, rng)


def splitting_probability(inst: SdpInstance, params: SolverParams):
    """Exact per-iteration probability that a uniform weight-t error splits
    with the sub-pattern the decoder targets (restricted or heavy sub-weight v
    on the last k+ell coordinates)."""
    ring = inst.ring
    kl = inst.k + params.ell
    rmin = params.r if params.mode == "beyond" else 0
    rmax = ring.M if params.mode == "beyond" else params.r
    from fractions import Fraction
    num = (count_sphere_restricted(params.v, kl, ring, rmin, rmax)
           * count_sphere(inst.t - params.v, inst.n - kl, ring))
    return Fraction(num, count_sphere(inst.t, inst.n, ring))


def default_params(inst: SdpInstance, mode: str = "below") -> SolverParams:
    """Heuristic parameter choice for concrete sizes; small eps, threshold r
    from the marginal weight law, ell and v guided by the asymptotic rates."""
    from . import asymptotics
    from .weight_model import expected_stats, restricted_weight_probs

    ring = inst.ring
    n, k, t = inst.n, inst.k, inst.t
    if t == 0:
        return SolverParams(ell=0, v=0, eps=0, r=0, u=0, mode=mode, max_iters=16)
    T = t / n
    if mode == "below":
        r = ring.M
        for cand in range(ring.M + 1):
            if expected_stats(cand, t, n, 0, ring).psi < 1.0:
                r = cand
                break
        ell = max(0, min(n - k, round(0.05 * n)))
        kl = k + ell
        v = round(kl * asymptotics.phi_rate(r, T, ring))
        v = max(0, min(v, t, r * kl))
        v -= v % 2
        eps = 0
        u = choose_u_small(v, kl, eps, r, ring, ell)
        params = SolverParams(ell=ell, v=v, eps=eps, r=r, u=u, mode=mode)
    else:
        ell = max(0, min(n - k, round(0.03 * n)))
        kl = k + ell
        eps = 0
        v = max(0, min(round(kl * T), t))
        r = max(0, min(ring.M, v // kl))
        v = max(v, r * kl)
        # the quarter split realizes only even totals (eps = 0)
        if v % 2:
            if v + 1 <= min(t, ring.M * kl):
                v += 1
            else:
                v -= 1
                r = min(r, v // kl)
        u = choose_u_large(kl, eps, r, ring, ell)
        params = SolverParams(ell=ell, v=v, eps=eps, r=r, u=u, mode=mode)
    P = splitting_probability(inst, params)
    if P > 0:
        params.max_iters = min(DEFAULT_MAX_ITERS, 100 * math.ceil(1 / P))
    else:
        params.max_iters = DEFAULT_MAX_ITERS
    params.validate(inst)
    return params
