import numpy as np
import pytest

from leeisd.code_algebra import (SdpInstance, gv_weight, matmul_mod,
                                 partial_gaussian_elimination, random_instance,
                                 read_instance, read_solution, syndrome,
                                 write_instance, write_solution)
from leeisd.counting import count_sphere
from leeisd.errors import SingularSelectionError
from leeisd.ring import RingSpec


def test_matmul_mod_oracle():
    rng = np.random.default_rng(0)
    for q in (5, 47):
        a = rng.integers(0, q, size=(6, 9))
        b = rng.integers(0, q, size=9)
        assert np.array_equal(matmul_mod(a, b, q), (a @ b) % q)


def test_random_instance_planted():
    ring = RingSpec(7, 1)
    rng = np.random.default_rng(1)
    inst, planted = random_instance(30, 10, 25, ring, rng)
    assert planted.weight == inst.t == 25
    assert np.array_equal(syndrome(inst.H, planted.entries, ring.q), inst.s)


@pytest.mark.parametrize("ring", [RingSpec(5, 1), RingSpec(2, 2),
                                  RingSpec(47, 1)], ids=lambda r: f"q{r.q}")
def test_pge_block_structure(ring):
    rng = np.random.default_rng(2)
    n, k, ell = 24, 8, 4
    inst, _ = random_instance(n, k, 10, ring, rng)
    for trial in range(20):
        perm = rng.permutation(n)
        try:
            pge = partial_gaussian_elimination(inst, ell, perm)
        except SingularSelectionError:
            continue
        m, lead = n - k, n - k - ell
        W = matmul_mod(pge.U, inst.H[:, pge.perm], ring.q)
        assert np.array_equal(W[:lead, :lead], np.eye(lead, dtype=np.int64))
        assert np.all(W[lead:, :lead] == 0)
        assert np.array_equal(W[:lead, lead:], pge.A)
        assert np.array_equal(W[lead:, lead:], pge.B)
        sU = matmul_mod(pge.U, inst.s, ring.q)
        assert np.array_equal(sU[:lead], pge.s1)
        assert np.array_equal(sU[lead:], pge.s2)
        # U is invertible: the reduced system has the same solutions
        e = np.zeros(n, dtype=np.int64)
        break
    else:
        pytest.fail("PGE never succeeded in 20 trials")


def test_pge_preserves_solutions():
    ring = RingSpec(5, 1)
    rng = np.random.default_rng(3)
    inst, planted = random_instance(20, 6, 12, ring, rng)
    for _ in range(30):
        perm = rng.permutation(20)
        try:
            pge = partial_gaussian_elimination(inst, 3, perm)
        except SingularSelectionError:
            continue
        ep = np.asarray(planted.entries)[pge.perm]
        lead = 20 - 6 - 3
        e1, e2 = ep[:lead], ep[lead:]
        lhs1 = (e1 + matmul_mod(pge.A, e2, 5)) % 5
        lhs2 = matmul_mod(pge.B, e2, 5)
        assert np.array_equal(lhs1, pge.s1)
        assert np.array_equal(lhs2, pge.s2)
        return
    pytest.fail("PGE never succeeded")


def test_gv_weight_definition():
    ring = RingSpec(5, 1)
    n, k = 20, 8
    t = gv_weight(n, k, ring)
    assert count_sphere(t, n, ring) <= ring.q ** (n - k)
    assert count_sphere(t + 1, n, ring) > ring.q ** (n - k)


def test_io_round_trip(tmp_path):
    ring = RingSpec(2, 2)
    rng = np.random.default_rng(4)
    inst, planted = random_instance(14, 5, 9, ring, rng)
    ipath = str(tmp_path / "case.inst")
    spath = str(tmp_path / "case.sol")
    write_instance(ipath, inst)
    write_solution(spath, planted)
    got = read_instance(ipath)
    assert (got.n, got.k, got.t) == (inst.n, inst.k, inst.t)
    assert got.ring == inst.ring
    assert np.array_equal(got.H, inst.H) and np.array_equal(got.s, inst.s)
    sol = read_solution(spath, ring)
    assert sol.entries == planted.entries
