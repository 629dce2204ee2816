"""Bit-packed linear algebra over GF(2).

Vectors are Python ints used as bitsets (bit ``i`` = coordinate ``i``).
Big eliminations are done on numpy ``uint64`` word arrays; incremental
spans use plain int rows.  Everything here is deterministic: pivots are
chosen by lowest column index, rows in the order given.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "pack_rows",
    "unpack_rows",
    "rank",
    "rref",
    "nullspace",
    "solve",
    "SpanF2",
]


def _nwords(ncols: int) -> int:
    return max(1, (ncols + 63) >> 6)


def pack_rows(rows: list[int], ncols: int) -> np.ndarray:
    """Pack int-bitset rows into a (len(rows), nwords) uint64 array."""
    w = _nwords(ncols)
    out = np.zeros((len(rows), w), dtype=np.uint64)
    nbytes = w * 8
    for i, r in enumerate(rows):
        if r:
            out[i] = np.frombuffer(r.to_bytes(nbytes, "little"), dtype=np.uint64)
    return out


def unpack_rows(mat: np.ndarray) -> list[int]:
    """Inverse of pack_rows."""
    return [int.from_bytes(mat[i].tobytes(), "little") for i in range(mat.shape[0])]


def _eliminate(mat: np.ndarray, ncols: int) -> list[int]:
    """In-place full (reduced) elimination on the first ``ncols`` columns.

    Returns the pivot column list.  Rows beyond ``ncols`` bits (e.g. an
    augmentation block) ride along and are never used for pivoting.
    """
    n = mat.shape[0]
    pivots: list[int] = []
    pivrow = 0
    for c in range(ncols):
        if pivrow >= n:
            break
        w = c >> 6
        b = np.uint64(c & 63)
        col = (mat[pivrow:, w] >> b) & np.uint64(1)
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        r = pivrow + int(nz[0])
        if r != pivrow:
            mat[[pivrow, r]] = mat[[r, pivrow]]
        full = (mat[:, w] >> b) & np.uint64(1)
        full[pivrow] = 0
        sel = np.nonzero(full)[0]
        if sel.size:
            mat[sel] ^= mat[pivrow]
        pivots.append(c)
        pivrow += 1
    return pivots


def rank(rows: list[int], ncols: int) -> int:
    """Rank over GF(2)."""
    if not rows:
        return 0
    mat = pack_rows(rows, ncols)
    return len(_eliminate(mat, ncols))


def rref(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    if not rows:
        return [], []
    mat = pack_rows(rows, ncols)
    pivots = _eliminate(mat, ncols)
    return unpack_rows(mat[: len(pivots)]), pivots


def nullspace(rows: list[int], ncols: int) -> list[int]:
    """Left nullspace of the row list: all combinations summing to zero.

    Returns bitsets over row indices, i.e. ``v`` with bit ``i`` set means
    row ``i`` participates; the XOR of those rows is 0.  The basis is the
    standard one obtained by augmenting with the identity, so it is
    deterministic in the given row order.
    """
    n = len(rows)
    if n == 0:
        return []
    w = _nwords(ncols)
    aug = pack_rows(rows, ncols)
    idblock = pack_rows([1 << i for i in range(n)], n)
    mat = np.concatenate([aug, idblock], axis=1)
    _eliminate(mat, ncols)
    out: list[int] = []
    for i in range(n):
        if not mat[i, :w].any():
            out.append(int.from_bytes(mat[i, w:].tobytes(), "little"))
    return out


def solve(rows: list[int], ncols: int, target: int) -> int | None:
    """Find a combination of rows XORing to ``target`` (bitset over row
    indices), or None if target is outside the row span."""
    n = len(rows)
    w = _nwords(ncols)
    aug = pack_rows(rows + [target], ncols)
    idblock = pack_rows([1 << i for i in range(n)] + [0], n)
    mat = np.concatenate([aug, idblock], axis=1)
    # Eliminate using only the first n rows as pivot candidates, then
    # reduce the target row by them.
    pivots: list[int] = []
    pivrow = 0
    for c in range(ncols):
        if pivrow >= n:
            break
        wd = c >> 6
        b = np.uint64(c & 63)
        col = (mat[pivrow:n, wd] >> b) & np.uint64(1)
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        r = pivrow + int(nz[0])
        if r != pivrow:
            mat[[pivrow, r]] = mat[[r, pivrow]]
        full = (mat[:, wd] >> b) & np.uint64(1)
        full[pivrow] = 0
        sel = np.nonzero(full)[0]
        if sel.size:
            mat[sel] ^= mat[pivrow]
        pivots.append(c)
        pivrow += 1
    if mat[n, :w].any():
        return None
    return int.from_bytes(mat[n, w:].tobytes(), "little")


class SpanF2:
    """Incremental GF(2) span of int-bitset vectors, echelonized by lowest
    set bit.  add() returns the reduced remainder (0 if already in span)."""

    __slots__ = ("pivots",)

    def __init__(self, vecs: list[int] | None = None):
        self.pivots: dict[int, int] = {}
        if vecs:
            for v in vecs:
                self.add(v)

    def reduce(self, v: int) -> int:
        pivots = self.pivots
        while v:
            low = v & -v
            row = pivots.get(low)
            if row is None:
                return v
            v ^= row
        return 0

    def reduce_full(self, v: int) -> int:
        """Canonical coset representative: clears every pivot bit of v,
        scanning from the lowest bit up.  Two vectors in the same coset
        reduce to the same value."""
        pivots = self.pivots
        out = 0
        while v:
            low = v & -v
            row = pivots.get(low)
            if row is None:
                out |= low
                v ^= low
            else:
                v ^= row
        return out

    def add(self, v: int) -> int:
        v = self.reduce(v)
        if v:
            self.pivots[v & -v] = v
        return v

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def copy(self) -> "SpanF2":
        new = SpanF2.__new__(SpanF2)
        new.pivots = dict(self.pivots)
        return new


class SpanTracked:
    """Span that remembers, for every echelon row, which input vectors
    (by insertion index) combine to it.  Used to express membership
    certificates: witness(v) returns a bitset over inserted indices."""

    __slots__ = ("pivots", "count")

    def __init__(self):
        self.pivots: dict[int, tuple[int, int]] = {}  # low bit -> (row, combo)
        self.count = 0

    def add(self, v: int) -> int:
        """Insert v; returns its insertion index."""
        idx = self.count
        self.count += 1
        combo = 1 << idx
        while v:
            low = v & -v
            entry = self.pivots.get(low)
            if entry is None:
                self.pivots[low] = (v, combo)
                return idx
            row, rcombo = entry
            v ^= row
            combo ^= rcombo
        return idx

    def witness(self, v: int) -> int | None:
        """Combination of inserted vectors equal to v, or None."""
        combo = 0
        while v:
            low = v & -v
            entry = self.pivots.get(low)
            if entry is None:
                return None
            row, rcombo = entry
            v ^= row
            combo ^= rcombo
        return combo
