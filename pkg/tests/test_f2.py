import random

from hypothesis import given, strategies as st

from motivic_ext import f2


def naive_rank(rows, ncols):
    rows = [r for r in rows]
    rank = 0
    for c in range(ncols):
        piv = None
        for i in range(len(rows)):
            if (rows[i] >> c) & 1:
                piv = i
                break
        if piv is None:
            continue
        pr = rows.pop(piv)
        rows = [r ^ pr if (r >> c) & 1 else r for r in rows]
        rank += 1
    return rank


@given(st.lists(st.integers(min_value=0, max_value=(1 << 40) - 1), max_size=25))
def test_rank_matches_naive(rows):
    assert f2.rank(rows, 40) == naive_rank(rows, 40)


@given(
    st.integers(min_value=1, max_value=130),
    st.integers(min_value=0, max_value=60),
    st.integers(min_value=0),
)
def test_nullspace_combinations_vanish(ncols, nrows, seed):
    rng = random.Random(seed)
    rows = [rng.getrandbits(ncols) for _ in range(nrows)]
    combos = f2.nullspace(rows, ncols)
    assert len(combos) == nrows - f2.rank(rows, ncols)
    for combo in combos:
        acc = 0
        for i in range(nrows):
            if (combo >> i) & 1:
                acc ^= rows[i]
        assert acc == 0


@given(
    st.integers(min_value=1, max_value=90),
    st.integers(min_value=1, max_value=40),
    st.integers(min_value=0),
)
def test_solve_recovers_combination(ncols, nrows, seed):
    rng = random.Random(seed)
    rows = [rng.getrandbits(ncols) for _ in range(nrows)]
    want = rng.getrandbits(nrows)
    target = 0
    for i in range(nrows):
        if (want >> i) & 1:
            target ^= rows[i]
    combo = f2.solve(rows, ncols, target)
    assert combo is not None
    acc = 0
    for i in range(nrows):
        if (combo >> i) & 1:
            acc ^= rows[i]
    assert acc == target


def test_solve_outside_span():
    assert f2.solve([0b01], 2, 0b10) is None


def test_span_tracks_membership():
    span = f2.SpanF2()
    assert span.add(0b101)
    assert span.add(0b011)
    assert 0b110 in span
    assert 0b100 not in span
    assert span.rank == 2


def test_span_tracked_witness():
    sp = f2.SpanTracked()
    sp.add(0b101)
    sp.add(0b011)
    w = sp.witness(0b110)
    assert w == 0b11
    assert sp.witness(0b100) is None


def test_rref_pivots():
    rows, pivots = f2.rref([0b110, 0b011, 0b101], 3)
    assert pivots == [0, 1]
    assert len(rows) == 2
