"""Random LSDP instances, syndromes, partial Gaussian elimination and the
Gilbert-Varshamov weight over Z/p^s Z."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .counting import count_sphere, sample_sphere
from .errors import SingularSelectionError
from .ring import LeeVector, RingSpec


@dataclass
class SdpInstance:
    ring: RingSpec
    n: int
    k: int
    H: np.ndarray       # (n-k) x n, entries in [0, q)
    s: np.ndarray       # length n-k
    t: int

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=np.int64) % self.ring.q
        self.s = np.asarray(self.s, dtype=np.int64) % self.ring.q
        if self.H.shape != (self.n - self.k, self.n):
            raise ValueError(f"H has shape {self.H.shape}, expected {(self.n - self.k, self.n)}")
        if self.s.shape != (self.n - self.k,):
            raise ValueError("syndrome length mismatch")
        if not 0 <= self.t <= self.n * self.ring.M:
            raise ValueError(f"t={self.t} outside [0, {self.n * self.ring.M}]")


@dataclass
class PgeDecomposition:
    U: np.ndarray       # (n-k) x (n-k), invertible
    perm: np.ndarray    # column permutation of H (position i <- original perm[i])
    A: np.ndarray       # (n-k-ell) x (k+ell)
    B: np.ndarray       # ell x (k+ell)
    s1: np.ndarray
    s2: np.ndarray
    ell: int


def matmul_mod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """a @ b mod q without int64 overflow (inner dimension times q^2 must
    stay below 2^63; guarded)."""
    inner = a.shape[-1]
    if inner * q * q >= 2**63:
        return np.asarray((a.astype(object) @ b.astype(object)) % q, dtype=object)
    return (a.astype(np.int64) @ b.astype(np.int64)) % q


def syndrome(H: np.ndarray, e: Sequence[int] | np.ndarray, q: int) -> np.ndarray:
    """e H^T mod q."""
    e = np.asarray(e, dtype=np.int64)
    if H.shape[1] != e.shape[0]:
        raise ValueError(f"dimension mismatch: H is {H.shape}, e has length {e.shape[0]}")
    return matmul_mod(H, e, q)


def random_instance(n: int, k: int, t: int, ring: RingSpec,
                    rng: np.random.Generator) -> Tuple[SdpInstance, LeeVector]:
    """Uniform H, planted e uniform on the weight-t sphere, s = e H^T."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    H = rng.integers(0, ring.q, size=(n - k, n), dtype=np.int64)
    planted = sample_sphere(t, n, ring, rng)
    s = syndrome(H, planted.entries, ring.q)
    return SdpInstance(ring, n, k, H, s, t), planted


def partial_gaussian_elimination(inst: SdpInstance, ell: int,
                                 perm: Sequence[int] | np.ndarray) -> PgeDecomposition:
    """Reduce H P to [[Id, A], [0, B]] with U tracking the row operations.

    Pivots must be units (not divisible by p); the first unit found scanning
    rows top-to-bottom is taken, and if a column has none, it is swapped with
    a later column inside the first n-k-ell block.  Raises
    SingularSelectionError when the block cannot be completed; the caller
    retries with a fresh permutation.
    """
    q, p = inst.ring.q, inst.ring.p
    m = inst.n - inst.k
    if not 0 <= ell <= m:
        raise ValueError(f"ell={ell} outside [0, {m}]")
    perm = np.asarray(perm, dtype=np.int64).copy()
    if sorted(perm.tolist()) != list(range(inst.n)):
        raise ValueError("perm is not a permutation of the columns")
    W = inst.H[:, perm].copy()
    U = np.eye(m, dtype=np.int64)
    lead = m - ell
    for c in range(lead):
        pr, pc = None, None
        for cc in range(c, lead):
            for rr in range(c, m):
                if W[rr, cc] % p != 0:
                    pr, pc = rr, cc
                    break
            if pr is not None:
                break
        if pr is None:
            raise SingularSelectionError(f"no unit pivot available for column {c}")
        if pc != c:
            W[:, [c, pc]] = W[:, [pc, c]]
            perm[[c, pc]] = perm[[pc, c]]
        if pr != c:
            W[[c, pr]] = W[[pr, c]]
            U[[c, pr]] = U[[pr, c]]
        inv = pow(int(W[c, c]), -1, q)
        W[c] = (W[c] * inv) % q
        U[c] = (U[c] * inv) % q
        for rr in range(m):
            f = int(W[rr, c])
            if rr != c and f:
                W[rr] = (W[rr] - f * W[c]) % q
                U[rr] = (U[rr] - f * U[c]) % q
    A = W[:lead, lead:].copy()
    B = W[lead:, lead:].copy()
    sU = matmul_mod(U, inst.s, q)
    return PgeDecomposition(U, perm, A, B, sU[:lead].copy(), sU[lead:].copy(), ell)


def gv_weight(n: int, k: int, ring: RingSpec) -> int:
    """Largest t (in the initial regime) with F(t, n, q) <= q^(n-k), so that
    the expected number of weight-t solutions is at most one."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    bound = ring.q ** (n - k)
    t = 0
    while t + 1 <= n * ring.M and count_sphere(t + 1, n, ring) <= bound:
        t += 1
    return t


# Line-oriented text formats: header "p s n k t", then n-k rows of H, then the
# syndrome row; solutions are a single row of n entries.

def write_instance(path: str, inst: SdpInstance) -> None:
    with open(path, "w") as fh:
        fh.write(f"{inst.ring.p} {inst.ring.s} {inst.n} {inst.k} {inst.t}\n")
        for row in inst.H:
            fh.write(" ".join(str(int(x)) for x in row) + "\n")
        fh.write(" ".join(str(int(x)) for x in inst.s) + "\n")


def read_instance(path: str) -> SdpInstance:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    p, s_exp, n, k, t = (int(x) for x in lines[0].split())
    ring = RingSpec(p, s_exp)
    rows = [[int(x) for x in ln.split()] for ln in lines[1:]]
    if len(rows) != n - k + 1:
        raise ValueError(f"expected {n - k} matrix rows plus a syndrome row, got {len(rows)}")
    H = np.array(rows[: n - k], dtype=np.int64)
    syn = np.array(rows[n - k], dtype=np.int64)
    return SdpInstance(ring, n, k, H, syn, t)


def write_solution(path: str, solution: LeeVector) -> None:
    with open(path, "w") as fh:
        fh.write(" ".join(str(x) for x in solution.entries) + "\n")


def read_solution(path: str, ring: RingSpec) -> LeeVector:
    with open(path) as fh:
        entries = [int(x) for x in fh.read().split()]
    return LeeVector(ring, tuple(entries))
