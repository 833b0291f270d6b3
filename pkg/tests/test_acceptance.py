"""Acceptance gate: nine end-to-end checks, each printing a single PASS/FAIL
line with the measured quantities.

1. Full-distance worst-rate exponents at q=47 against the published values.
2. Beyond-distance worst-rate exponent at q=47 and the brute-force cap.
3. Ball exponent equals 1 exactly at the saturation weight.
4. Asymptotic sphere exponents against exact counts at n=3000.
5. Exhaustive combinatorics on tiny rings.
6. Solver soundness and iteration counts against exact success probabilities.
7. Heavy-error solver soundness.
8. Sphere-sampler entry histogram against the limiting marginal law.
9. List merge against a naive double loop.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import log_sphere_count
from leeisd.asymptotics import (ball_exponent, rate_exponent, saturation_weight,
                                sphere_exponent, worst_rate)
from leeisd.cli import (EXIT_OK, EXP_TOL, RATE_TOL, TABLE1_ROWS, TABLE2_ROWS,
                        main)
from leeisd.code_algebra import (gv_weight, random_instance, write_instance,
                                 write_solution)
from leeisd.counting import (WeightComposition, count_ball,
                             count_fitting_compositions, count_sphere,
                             count_sphere_restricted, sample_sphere_batch)
from leeisd.isd import SolverParams, default_params, merge_concatenate, solve
from leeisd.ring import RingSpec
from leeisd.weight_model import marginal, solve_beta

Q47 = RingSpec(47, 1)


def report(num: int, label: str, ok: bool, detail: str) -> bool:
    print(f"criterion {num} ({label}): {'PASS' if ok else 'FAIL'} — {detail}")
    return ok


# -- 1: full-distance worst-rate exponents ----------------------------------

def test_criterion_1_full_distance_exponents():
    rows_ok, details = [], []
    for label, cfg, ref_e, ref_R in TABLE1_ROWS:
        if cfg is None:
            continue
        rv = Q47.M if cfg["r"] == "M" else cfg["r"]
        R, e, params, _, _ = worst_rate(Q47, cfg["mode"],
                                        amortized=cfg["amortized"], r=rv,
                                        n_starts=16, seed=0)
        ok = abs(e - ref_e) <= EXP_TOL and abs(R - ref_R) <= RATE_TOL
        rows_ok.append(ok)
        details.append(f"{label}: e={e:.4f} R*={R:.3f} (ref {ref_e} @ {ref_R})"
                       f" {'ok' if ok else 'OFF'}")
    ok = all(rows_ok)
    report(1, "full-distance worst-rate exponents", ok, "; ".join(details))
    assert ok, details


# -- 2: beyond-distance worst-rate exponent and brute-force cap --------------

def test_criterion_2_beyond_distance_exponent():
    (label, cfg, ref_e, ref_R) = TABLE2_ROWS[0]
    R, e, params, _, _ = worst_rate(Q47, cfg["mode"], amortized=cfg["amortized"],
                                    r=cfg["r"], n_starts=48, seed=0)
    row_ok = abs(e - ref_e) <= EXP_TOL and abs(R - ref_R) <= RATE_TOL
    # the reported exponent is always the minimum with the two brute-force
    # baselines: enumerate the coset (R/2) and enumerate the sphere (1-R)
    cap_ok = True
    for Rv in (0.06, 0.3, 0.6, 0.9):
        ev, _, bd, _ = rate_exponent(Rv, Q47, "beyond", True, 10,
                                     n_starts=8, seed=0)
        cap_ok &= ev <= Rv / 2 + 1e-12 and ev <= 1 - Rv + 1e-12
        cap_ok &= math.isclose(ev, min(bd.total, Rv / 2, 1 - Rv), abs_tol=1e-12)
    ok = row_ok and cap_ok
    report(2, "beyond-distance worst-rate exponent", ok,
           f"{label}: e={e:.4f} R*={R:.3f} (ref {ref_e} @ {ref_R}); "
           f"baseline cap applied={cap_ok}")
    assert ok


# -- 3: ball exponent saturates at the threshold weight ----------------------

def test_criterion_3_ball_saturation():
    devs = []
    for q in (5, 7, 47):
        ring = RingSpec(q, 1)
        thr = ring.M * (ring.M + 1) / (2 * ring.M + 1)
        assert math.isclose(thr, saturation_weight(ring.p, ring.s), abs_tol=1e-12)
        devs.append((q, abs(ball_exponent(thr, ring) - 1.0)))
    for q in (4, 8):
        ring = RingSpec(2, int(math.log2(q)))
        thr = ring.M / 2
        assert math.isclose(thr, saturation_weight(ring.p, ring.s), abs_tol=1e-12)
        devs.append((q, abs(ball_exponent(thr, ring) - 1.0)))
    ok = all(d < 1e-6 for _, d in devs)
    report(3, "ball exponent saturation", ok,
           " ".join(f"q={q}:|e-1|={d:.2e}" for q, d in devs))
    assert ok


# -- 4: sphere exponent vs exact counts at n=3000 ----------------------------

def test_criterion_4_exact_vs_asymptotic():
    n = 3000
    worst = 0.0
    checked = 0
    for q in (5, 7):
        ring = RingSpec(q, 1)
        windows = [(0, ring.M)]
        windows += [(0, r) for r in range(1, ring.M)]
        windows += [(r, ring.M) for r in range(1, ring.M)]
        for rmin, rmax in windows:
            for frac in (0.35, 0.75):
                T = rmin + frac * (rmax - rmin)
                t = round(T * n)
                exact = log_sphere_count(t, n, ring, rmin, rmax) / (n * math.log(q))
                asym = sphere_exponent(t / n, ring, rmin, rmax)
                worst = max(worst, abs(asym - exact))
                checked += 1
    ok = worst < 0.01
    report(4, "exact-vs-asymptotic sphere exponent", ok,
           f"{checked} grid points, max |deviation|={worst:.5f} (< 0.01)")
    assert ok


# -- 5: exhaustive combinatorics on tiny rings --------------------------------

def _ring_of(q: int) -> RingSpec:
    return RingSpec(2, q.bit_length() - 1) if q in (4, 8) else RingSpec(q, 1)


def test_criterion_5_exhaustive_combinatorics():
    mismatches = 0
    checked = 0
    for q in (4, 5, 7, 8, 9):
        ring = RingSpec(3, 2) if q == 9 else _ring_of(q)
        wt = [ring.lee_weight(x) for x in range(q)]
        for n in range(1, 6):
            sphere = {}
            lo = {}
            hi = {}
            for vec in itertools.product(range(q), repeat=n):
                ws = [wt[x] for x in vec]
                key = sum(ws)
                sphere[key] = sphere.get(key, 0) + 1
                lo.setdefault(key, {})
                hi.setdefault(key, {})
                mn, mx = min(ws), max(ws)
                lo[key][mn] = lo[key].get(mn, 0) + 1
                hi[key][mx] = hi[key].get(mx, 0) + 1
            ball = 0
            for t in range(n * ring.M + 1):
                st = sphere.get(t, 0)
                ball += st
                checked += 1
                mismatches += count_sphere(t, n, ring) != st
                mismatches += count_ball(t, n, ring) != ball
                for r in range(ring.M + 1):
                    # entries of weight <= r / >= r (zeros excluded when r >= 1)
                    below = sum(c for mx, c in hi.get(t, {}).items() if mx <= r)
                    above = sum(c for mn, c in lo.get(t, {}).items() if mn >= r)
                    checked += 2
                    mismatches += count_sphere_restricted(t, n, ring, 0, r) != below
                    mismatches += count_sphere_restricted(t, n, ring, r, ring.M) != above
        # fitting compositions against a direct product scan
        rng = np.random.default_rng(q)
        for _ in range(30):
            parts = tuple(int(x) for x in rng.integers(0, ring.M + 1, size=4))
            lam = WeightComposition(parts)
            for v in range(sum(parts) + 1):
                direct = sum(1 for pi in itertools.product(
                    *[range(p + 1) for p in parts]) if sum(pi) == v)
                checked += 1
                mismatches += count_fitting_compositions(v, lam) != direct
    ok = mismatches == 0
    report(5, "exhaustive combinatorics", ok,
           f"{checked} counts compared, {mismatches} mismatches")
    assert ok


# -- 6: solver soundness and iteration statistics -----------------------------

def _kernel_basis(H: np.ndarray, q: int) -> np.ndarray:
    """Basis of {c : H c = 0 mod q} by row reduction (q prime)."""
    m, n = H.shape
    W = H.copy() % q
    piv = []
    row = 0
    for col in range(n):
        sel = next((r2 for r2 in range(row, m) if W[r2, col] % q), None)
        if sel is None:
            continue
        W[[row, sel]] = W[[sel, row]]
        W[row] = (W[row] * pow(int(W[row, col]), -1, q)) % q
        for r2 in range(m):
            if r2 != row and W[r2, col]:
                W[r2] = (W[r2] - W[r2, col] * W[row]) % q
        piv.append(col)
        row += 1
        if row == m:
            break
    basis = []
    for f in (c for c in range(n) if c not in piv):
        vec = np.zeros(n, dtype=np.int64)
        vec[f] = 1
        for i, c in enumerate(piv):
            vec[c] = (-W[i, f]) % q
        basis.append(vec)
    return np.array(basis, dtype=np.int64)


def _batch_invertible(mats: np.ndarray, q: int) -> np.ndarray:
    """Invertibility mod q of a (N, m, m) batch by lockstep elimination."""
    A = mats.copy() % q
    N, m, _ = A.shape
    alive = np.ones(N, dtype=bool)
    inv_tab = np.array([0] + [pow(i, -1, q) for i in range(1, q)])
    rows = np.arange(N)
    for c in range(m):
        nz = A[:, c:, c] != 0
        alive &= nz.any(axis=1)
        pick = np.argmax(nz, axis=1) + c
        tmp = A[rows, pick].copy()
        A[rows, pick] = A[:, c]
        A[rows, c] = tmp
        piv = A[:, c, c].copy()
        piv[~alive] = 1
        A[:, c, :] = (A[:, c, :] * inv_tab[piv][:, None]) % q
        A[:, c + 1:, :] = (A[:, c + 1:, :]
                           - A[:, c + 1:, c, None] * A[:, None, c, :]) % q
    return alive


def _exact_success_prob(inst, planted, ring) -> Fraction:
    """Per-iteration success probability of the information-set collapse
    (window weight 0): the fraction of window position sets that avoid the
    support of some weight-t solution and leave an invertible complement."""
    q, n, k = ring.q, inst.n, inst.k
    basis = _kernel_basis(inst.H, q)
    wt_tab = np.minimum(np.arange(q), q - np.arange(q))
    pe = np.array(planted.entries, dtype=np.int64)
    powers = q ** np.arange(len(basis), dtype=np.int64)
    good = set()
    for lo in range(0, q ** len(basis), 200000):
        idx = np.arange(lo, min(lo + 200000, q ** len(basis)), dtype=np.int64)
        coeffs = (idx[:, None] // powers) % q
        vecs = (coeffs @ basis + pe) % q
        for sol in vecs[wt_tab[vecs].sum(axis=1) == inst.t]:
            zeros = np.flatnonzero(sol == 0)
            for S in itertools.combinations(zeros.tolist(), k):
                good.add(S)
    if not good:
        return Fraction(0, 1)
    windows = np.array(sorted(good), dtype=np.int64)
    mask = np.ones((len(windows), n), dtype=bool)
    mask[np.arange(len(windows))[:, None], windows] = False
    comp = np.nonzero(mask)[1].reshape(len(windows), n - k)
    cnt = 0
    for lo in range(0, len(windows), 20000):
        mats = inst.H.T[comp[lo:lo + 20000]].transpose(0, 2, 1)
        cnt += int(_batch_invertible(mats, q).sum())
    return Fraction(cnt, math.comb(n, k))


def test_criterion_6_solver_soundness(tmp_path):
    # k chosen per size so q^k stays enumerable while t = gv_weight keeps
    # error supports well inside the co-information positions
    configs = [(16, 5, 8), (16, 7, 8), (20, 5, 10), (20, 7, 8),
               (24, 5, 10), (24, 7, 8)]
    counts = [34, 34, 33, 33, 33, 33]
    total_it = exp_it = var_it = 0.0
    verified = 0
    total = sum(counts)
    for ci, ((n, q, k), cnt) in enumerate(zip(configs, counts)):
        ring = RingSpec(q, 1)
        t = gv_weight(n, k, ring)
        params = SolverParams(ell=0, v=0, eps=0, r=0, u=0, mode="below",
                              max_iters=10**6)
        for i in range(cnt):
            rng = np.random.default_rng(1000 * ci + i)
            inst, planted = random_instance(n, k, t, ring, rng)
            P = _exact_success_prob(inst, planted, ring)
            rep = solve(inst, params, rng)
            write_instance(str(tmp_path / "c6.inst"), inst)
            write_solution(str(tmp_path / "c6.sol"), rep.solution)
            verified += main(["verify", str(tmp_path / "c6.inst"),
                              str(tmp_path / "c6.sol")]) == EXIT_OK
            total_it += rep.iterations
            exp_it += float(1 / P)
            var_it += float((1 - P) / P**2)
    sd_mean = math.sqrt(var_it) / total
    z = (total_it - exp_it) / total / sd_mean
    ok = verified == total and abs(z) <= 3.0
    report(6, "solver soundness", ok,
           f"{verified}/{total} verified; mean iterations "
           f"{total_it / total:.1f} vs expected {exp_it / total:.1f} "
           f"(z={z:+.2f}, |z|<=3)")
    assert ok


# -- 7: heavy-error solver soundness ------------------------------------------

def test_criterion_7_heavy_solver_soundness(tmp_path):
    ring = RingSpec(5, 1)
    n, k = 16, 8
    t = round(0.7 * n * ring.M)
    verified = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        inst, _ = random_instance(n, k, t, ring, rng)
        params = default_params(inst, "beyond")
        params.max_iters = 10**6
        rep = solve(inst, params, rng)
        write_instance(str(tmp_path / "c7.inst"), inst)
        write_solution(str(tmp_path / "c7.sol"), rep.solution)
        verified += main(["verify", str(tmp_path / "c7.inst"),
                          str(tmp_path / "c7.sol")]) == EXIT_OK
    ok = verified == 100
    report(7, "heavy-error solver soundness", ok,
           f"{verified}/100 returns verified at n={n}, q=5, t={t}")
    assert ok


# -- 8: sampler marginal law ---------------------------------------------------

def test_criterion_8_sampler_marginal():
    n = 2000
    rng = np.random.default_rng(5)
    tvs = []
    for T in (0.3, 0.6, 5.0):
        law = marginal(solve_beta(T, Q47), Q47).elem_prob
        draws = 100
        vecs = sample_sphere_batch(round(T * n), n, Q47, rng, draws)
        hist = np.bincount(vecs.ravel(), minlength=Q47.q)
        tv = 0.5 * float(np.abs(hist / (n * draws) - np.array(law)).sum())
        tvs.append((T, tv))
    ok = all(tv < 0.02 for _, tv in tvs)
    report(8, "sampler marginal law", ok,
           " ".join(f"T={T}:TV={tv:.4f}" for T, tv in tvs) + " (< 0.02)")
    assert ok


# -- 9: merge oracle equivalence ----------------------------------------------

def _naive_merge(B1, B2, M1, M2, target, u, q):
    out = []
    for x2 in B2:
        for x1 in B1:
            syn = (np.dot(x1, M1.T) + np.dot(x2, M2.T) - target) % q
            if u == 0 or not np.any(syn[len(syn) - u:]):
                out.append(tuple(x1) + tuple(x2))
    return out


def test_criterion_9_merge_oracle():
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(1000):
        q = int(rng.choice([4, 5, 7, 47]))
        ell = int(rng.integers(1, 4))
        u = int(rng.integers(0, ell + 1))
        h1, h2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        B1 = rng.integers(0, q, size=(int(rng.integers(0, 10)), h1))
        B2 = rng.integers(0, q, size=(int(rng.integers(0, 10)), h2))
        M1 = rng.integers(0, q, size=(ell, h1))
        M2 = rng.integers(0, q, size=(ell, h2))
        target = rng.integers(0, q, size=ell)
        got = merge_concatenate(B1, B2, M1, M2, target, u, q)
        want = _naive_merge(B1, B2, M1, M2, target, u, q)
        mismatches += sorted(got) != sorted(want)
    ok = mismatches == 0
    report(9, "merge oracle equivalence", ok,
           f"1000 randomized cases, {mismatches} mismatches")
    assert ok
