"""Tests for the F2[tau] layer.

The independent oracle used throughout is the rank profile of iterated
tau maps: for a module with slices M_w, let R(w, k) = rank(tau^k: M_w ->
M_{w+k}).  The multiplicity of a bar born at a and dying into w = b + 1
is the standard inclusion-exclusion of four rank values.  Expected
values for the worked examples below were computed with that oracle and
frozen; the oracle itself stays independent of decompose().
"""

import random

import pytest
from hypothesis import given, settings, strategies as st

from motivic_ext import f2, taulin
from motivic_ext.taulin import (
    TauDecomposition,
    TauModule,
    TauMatrix,
    decompose,
    decompose_with_basis,
    homology,
    kernel_basis,
    module_from_decomposition,
    tau_matrix_from_generators,
)


def iterated_rank(m: TauModule, w: int, k: int) -> int:
    """rank of tau^k out of the weight-w slice (oracle helper)."""
    if w < m.lo or w + k > m.hi:
        return 0
    vecs = [1 << i for i in range(m.dim(w))]
    for step in range(k):
        vecs = [m.tau(w + step, v) for v in vecs]
    return f2.rank(vecs, max(1, m.dim(w + k)))


def oracle_decompose(m: TauModule) -> TauDecomposition:
    """Barcode via rank-profile inclusion-exclusion (independent oracle)."""

    def R(w, k):
        if k < 0:
            return 0
        if w < m.lo:
            return 0
        return iterated_rank(m, w, k)

    free = []
    torsion = []
    for a in range(m.lo, m.hi + 1):
        # bars [a, b] with b < hi are torsion of exponent b - a + 1
        for b in range(a, m.hi):
            k = b - a
            mult = R(a, k) - R(a, k + 1) - (R(a - 1, k + 1) - R(a - 1, k + 2))
            for _ in range(mult):
                torsion.append((b - a + 1, a))
        # bars alive at hi are free
        k = m.hi - a
        mult = R(a, k) - (R(a - 1, k + 1))
        for _ in range(mult):
            free.append(a)
    return TauDecomposition(tuple(sorted(free)), tuple(sorted(torsion)))


def m2_module(hi=6):
    dims = (1,) * (hi + 1)
    taus = ((1,),) * hi
    return TauModule(0, hi, dims, taus)


def m2_mod_tau_r(r, hi=6):
    dims = tuple(1 if w < r else 0 for w in range(hi + 1))
    taus = tuple(((1,) if w + 1 < r else (0,)) if w < r else () for w in range(hi))
    return TauModule(0, hi, dims, taus)


def random_module(rng, max_dim=4, hi=5):
    dims = tuple(rng.randrange(max_dim + 1) for _ in range(hi + 1))
    taus = []
    for w in range(hi):
        taus.append(tuple(rng.getrandbits(dims[w + 1]) for _ in range(dims[w])))
    return TauModule(0, hi, dims, tuple(taus))


def test_decompose_m2_is_free():
    dec = decompose(m2_module())
    assert dec.free_rank == 1
    assert dec.free_births == (0,)
    assert dec.torsion == ()


def test_decompose_m2_mod_tau2():
    dec = decompose(m2_mod_tau_r(2))
    assert dec.free_rank == 0
    assert dec.torsion == ((2, 0),)


def test_decompose_m2_plus_m2_mod_tau():
    # M2 + M2/tau, frozen from the rank-profile oracle
    dims = (2, 1, 1, 1)
    taus = ((0b1, 0b1), (0b1,), (0b1,))
    m = TauModule(0, 3, dims, taus)
    assert oracle_decompose(m) == TauDecomposition((0,), ((1, 0),))
    assert decompose(m) == TauDecomposition((0,), ((1, 0),))


@settings(max_examples=150)
@given(st.integers(min_value=0))
def test_decompose_matches_oracle(seed):
    m = random_module(random.Random(seed))
    assert decompose(m) == oracle_decompose(m)


@settings(max_examples=80)
@given(st.integers(min_value=0))
def test_decomposition_basis_is_valid(seed):
    """The tracked generators really decompose the module: their tau
    orbits form a basis of every slice, and torsion generators die
    exactly on schedule."""
    m = random_module(random.Random(seed))
    summands = decompose_with_basis(m)
    per_w = {w: [] for w in range(m.lo, m.hi + 1)}
    for s in summands:
        v = s.gen
        w = s.birth
        life = 0
        while w <= m.hi and (s.exponent is None or life < s.exponent):
            per_w[w].append(v)
            v = m.tau(w, v)
            w += 1
            life += 1
        if s.exponent is not None and w <= m.hi:
            assert v == 0, "torsion generator survived past its exponent"
    for w in range(m.lo, m.hi + 1):
        vecs = per_w[w]
        assert len(vecs) == m.dim(w)
        assert f2.rank(vecs, max(1, m.dim(w))) == m.dim(w)


@settings(max_examples=80)
@given(st.integers(min_value=0))
def test_decompose_round_trip(seed):
    m = random_module(random.Random(seed))
    dec = decompose(m)
    rebuilt = module_from_decomposition(dec, m.lo, m.hi)
    assert decompose(rebuilt) == dec
    # same rank profile as the source (the reconstruction invariant)
    for w in range(m.lo, m.hi + 1):
        for k in range(m.hi - w + 1):
            assert iterated_rank(rebuilt, w, k) == iterated_rank(m, w, k)


def test_free_rank_is_stable_rank():
    rng = random.Random(7)
    for _ in range(40):
        m = random_module(rng)
        dec = decompose(m)
        stable = sum(iterated_rank(m, w, m.hi - w) for w in (m.lo,))
        # free rank equals rank of the full-window composite, summed over
        # birth weights: check via the oracle identity instead
        total = 0
        for a in range(m.lo, m.hi + 1):
            k = m.hi - a
            total += iterated_rank(m, a, k) - iterated_rank(m, a - 1, k + 1)
        assert dec.free_rank == total
        del stable


def test_homology_trivial_complex_returns_module():
    m = m2_module(4)
    z = taulin.zero_module(0, 4)
    d_in = taulin.zero_matrix(z, m)
    d_out = taulin.zero_matrix(m, z)
    h = homology(d_in, d_out)
    assert decompose(h) == TauDecomposition((0,), ())


def test_homology_cokernel_of_tau():
    # d_in = multiplication by tau : M2 -> M2 (generator weights 1 and 0)
    src, dst, d_in = tau_matrix_from_generators([1], [0], {(0, 0): 1}, 0, 6)
    z = taulin.zero_module(0, 6)
    d_out = taulin.zero_matrix(dst, z)
    h = homology(d_in, d_out)
    assert decompose(h) == TauDecomposition((), ((1, 0),))


def test_homology_rejects_nonzero_composite():
    src, dst, d = tau_matrix_from_generators([0], [0], {(0, 0): 0}, 0, 3)
    with pytest.raises(taulin.ContractViolation):
        homology(d, d)


@settings(max_examples=60)
@given(st.integers(min_value=0))
def test_homology_matches_per_weight_oracle(seed):
    """Random two-step complexes: compare slice dimensions of homology
    with a plain per-weight kernel/image computation."""
    rng = random.Random(seed)
    a = random_module(rng, max_dim=3, hi=4)
    b = random_module(rng, max_dim=3, hi=4)
    c = random_module(rng, max_dim=3, hi=4)
    # build random commuting maps by composing with zero; instead use
    # d_in = 0 and random d_out, plus the dual arrangement
    d_in = taulin.zero_matrix(a, b)
    blocks = []
    for w in range(b.lo, b.hi + 1):
        rows = [rng.getrandbits(c.dim(w)) for _ in range(b.dim(w))]
        blocks.append(tuple(rows))
    try:
        d_out = TauMatrix(b, c, tuple(blocks))
    except ValueError:
        return  # random rows rarely commute with tau; skip those draws
    h = homology(d_in, d_out)
    for w in range(b.lo, b.hi + 1):
        rows = list(d_out.blocks[w - b.lo])
        expected = len(f2.nullspace(rows, max(1, c.dim(w))))
        assert h.dim(w) == expected


def test_homology_of_exact_rows_is_zero():
    # 0 -> M2 --id--> M2 -> 0 in the middle spot
    src, dst, d_in = tau_matrix_from_generators([0], [0], {(0, 0): 0}, 0, 5)
    z = taulin.zero_module(0, 5)
    d_out = taulin.zero_matrix(dst, z)
    h = homology(d_in, d_out)
    assert h.is_zero()


def test_kernel_basis_zero_map_returns_source_basis():
    src, dst, d = tau_matrix_from_generators([0, 1], [5], {}, 0, 5)
    gens = kernel_basis(d)
    assert [w for (w, _) in gens] == [0, 1]


def test_kernel_basis_tau_is_injective():
    src, dst, d = tau_matrix_from_generators([1], [0], {(0, 0): 1}, 0, 5)
    assert kernel_basis(d) == []


def test_kernel_basis_diagonal_tau_pair():
    # d = (tau, tau) : M2^2 -> M2; kernel free on the diagonal vector.
    # Frozen from the per-weight nullspace oracle: the unique generator
    # appears at weight 1 and equals the sum of the two tau^0 lifts.
    src, dst, d = tau_matrix_from_generators([1, 1], [0], {(0, 0): 1, (1, 0): 1}, 0, 5)
    gens = kernel_basis(d)
    assert len(gens) == 1
    w, v = gens[0]
    assert w == 1
    assert bin(v).count("1") == 2
    assert d.apply(w, v) == 0
