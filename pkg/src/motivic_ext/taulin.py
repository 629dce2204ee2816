"""Exact linear algebra over the bigraded coefficient ring F2[tau].

A module here is weight-graded: a finite window of F2 slices together
with the maps induced by multiplication by tau (weight +1).  Finitely
generated modules over F2[tau] split as a direct sum of free summands
and cyclic torsion summands F2[tau]/tau^r; ``decompose`` recovers that
splitting from the slice data.

Window semantics: slices outside ``[lo, hi]`` are zero.  A summand whose
tau-chain is still alive at the top of the window is classified as free,
so the window must extend beyond the last torsion death for the answer
to be meaningful.  Callers are responsible for choosing ``hi`` large
enough; everything downstream does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import f2

__all__ = [
    "TauModule",
    "TauMatrix",
    "TauDecomposition",
    "Summand",
    "decompose",
    "decompose_with_basis",
    "homology",
    "homology_with_reps",
    "kernel_basis",
    "module_from_decomposition",
]


class ContractViolation(Exception):
    """A documented precondition failed (e.g. d_out . d_in != 0)."""


def _apply(rows: tuple[int, ...], v: int) -> int:
    """Image of bitset v under the matrix with the given image rows."""
    out = 0
    while v:
        low = v & -v
        out ^= rows[low.bit_length() - 1]
        v ^= low
    return out


@dataclass(frozen=True)
class TauModule:
    """A bounded weight-graded F2[tau]-module.

    dims[i] is the F2-dimension of the slice at weight lo+i;
    tau_maps[i] has one int-bitset row per basis vector of slice lo+i,
    giving its image in slice lo+i+1.
    """

    lo: int
    hi: int
    dims: tuple[int, ...]
    tau_maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("empty weight range")
        n = self.hi - self.lo + 1
        if len(self.dims) != n or len(self.tau_maps) != n - 1:
            raise ValueError("dims/tau_maps length mismatch")
        for i, rows in enumerate(self.tau_maps):
            if len(rows) != self.dims[i]:
                raise ValueError(f"tau_map at weight {self.lo + i} has wrong row count")
            limit = 1 << self.dims[i + 1]
            for r in rows:
                if r >= limit:
                    raise ValueError("tau_map row exceeds target dimension")

    def dim(self, w: int) -> int:
        if w < self.lo or w > self.hi:
            return 0
        return self.dims[w - self.lo]

    def tau(self, w: int, v: int) -> int:
        """Multiply a weight-w slice vector by tau."""
        if w < self.lo or w >= self.hi:
            return 0
        return _apply(self.tau_maps[w - self.lo], v)

    def total_dim(self) -> int:
        return sum(self.dims)

    def is_zero(self) -> bool:
        return self.total_dim() == 0


def zero_module(lo: int = 0, hi: int = 0) -> TauModule:
    n = hi - lo + 1
    return TauModule(lo, hi, (0,) * n, ((),) * (n - 1))


@dataclass(frozen=True)
class TauMatrix:
    """A weight-preserving F2[tau]-linear map given by per-weight blocks.

    blocks[i] maps the weight lo+i slice of src into the same-weight slice
    of dst (one image row per source basis vector).  The blocks must
    commute with the tau maps of src and dst; this is validated.
    """

    src: TauModule
    dst: TauModule
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if (self.src.lo, self.src.hi) != (self.dst.lo, self.dst.hi):
            raise ValueError("source/target weight windows must agree")
        if len(self.blocks) != len(self.src.dims):
            raise ValueError("need one block per weight")
        for i, rows in enumerate(self.blocks):
            if len(rows) != self.src.dims[i]:
                raise ValueError(f"block at weight {self.src.lo + i} has wrong row count")
            limit = 1 << self.dst.dims[i]
            for r in rows:
                if r >= limit:
                    raise ValueError("block row exceeds target dimension")
        lo = self.src.lo
        for w in range(lo, self.src.hi):
            i = w - lo
            for j in range(self.src.dims[i]):
                left = self.dst.tau(w, self.blocks[i][j])
                right = _apply(self.blocks[i + 1], self.src.tau(w, 1 << j))
                if left != right:
                    raise ValueError(f"block does not commute with tau at weight {w}")

    def apply(self, w: int, v: int) -> int:
        if w < self.src.lo or w > self.src.hi:
            return 0
        return _apply(self.blocks[w - self.src.lo], v)


def zero_matrix(src: TauModule, dst: TauModule) -> TauMatrix:
    return TauMatrix(src, dst, tuple((0,) * d for d in src.dims))


def tau_matrix_from_generators(
    src_gens: list[int],
    dst_gens: list[int],
    entries: dict[tuple[int, int], int],
    lo: int,
    hi: int,
) -> tuple[TauModule, TauModule, TauMatrix]:
    """Build free TauModules on generators of the given weights, plus the
    map whose (i -> j) entry is tau^c with c = src_gens[i] - dst_gens[j].

    ``entries[(i, j)] = c`` must satisfy that weight rule; this is the
    generator-level form in which differentials of free modules over
    F2[tau] naturally arrive.
    """

    def make_free(gens: list[int]) -> tuple[TauModule, list[list[tuple[int, int]]]]:
        # slice basis at weight w: [(gen index, c)] with gens[i] + c = w
        slices = []
        for w in range(lo, hi + 1):
            slices.append([(i, w - g) for i, g in enumerate(gens) if g <= w])
        dims = tuple(len(s) for s in slices)
        taus = []
        for w in range(lo, hi):
            idx = {p: k for k, p in enumerate(slices[w - lo + 1])}
            rows = tuple(1 << idx[(i, c + 1)] for (i, c) in slices[w - lo])
            taus.append(rows)
        return TauModule(lo, hi, dims, tuple(taus)), slices

    src, src_slices = make_free(src_gens)
    dst, dst_slices = make_free(dst_gens)
    for (i, j), c in entries.items():
        if c != src_gens[i] - dst_gens[j]:
            raise ValueError("entry tau-power inconsistent with generator weights")
        if c < 0:
            raise ValueError("negative tau-power entry")
    blocks = []
    for w in range(lo, hi + 1):
        dst_idx = {p: k for k, p in enumerate(dst_slices[w - lo])}
        rows = []
        for (i, c) in src_slices[w - lo]:
            out = 0
            for j in range(len(dst_gens)):
                cij = entries.get((i, j))
                if cij is not None:
                    out ^= 1 << dst_idx[(j, c + cij)]
            rows.append(out)
        blocks.append(tuple(rows))
    return src, dst, TauMatrix(src, dst, tuple(blocks))


@dataclass(frozen=True)
class Summand:
    """One indecomposable summand: born at ``birth``, torsion exponent
    ``exponent`` (None = free), generated by ``gen`` in the birth slice."""

    birth: int
    exponent: int | None
    gen: int


@dataclass(frozen=True)
class TauDecomposition:
    """Classification into (M2)^free_rank + sum of M2/tau^{r_i}."""

    free_births: tuple[int, ...]
    torsion: tuple[tuple[int, int], ...]  # (exponent, birth weight), sorted

    @property
    def free_rank(self) -> int:
        return len(self.free_births)

    @property
    def torsion_exponents(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.torsion)


class _Chain:
    __slots__ = ("birth", "gen", "hist", "seq")

    def __init__(self, birth: int, gen: int, seq: int):
        self.birth = birth
        self.gen = gen
        self.hist: dict[int, int] = {birth: gen}
        self.seq = seq


def decompose_with_basis(m: TauModule) -> list[Summand]:
    """Elder-rule barcode of the tau-action with generator tracking.

    Chains are carried forward through tau; on a linear dependency the
    youngest chain absorbs the correction and dies (or continues with a
    corrected vector), so surviving generators really do generate a valid
    direct-sum decomposition.  Summands whose chain is alive at the top
    of the window are reported free.
    """
    summands: list[Summand] = []
    alive: list[_Chain] = []
    seq = 0
    for w in range(m.lo, m.hi + 1):
        table: dict[int, _Chain] = {}
        survivors: list[_Chain] = []
        for c in sorted(alive, key=lambda ch: (ch.birth, ch.seq)):
            v = m.tau(w - 1, c.hist[w - 1])
            used: list[_Chain] = []
            while v:
                low = v & -v
                entry = table.get(low)
                if entry is None:
                    break
                v ^= entry.hist[w]
                used.append(entry)
            for e in used:
                for ww in range(c.birth, w):
                    c.hist[ww] ^= e.hist[ww]
                c.gen = c.hist[c.birth]
            if v == 0:
                summands.append(Summand(c.birth, w - c.birth, c.gen))
            else:
                c.hist[w] = v
                table[v & -v] = c
                survivors.append(c)
        for i in range(m.dim(w)):
            v = 1 << i
            while v:
                low = v & -v
                entry = table.get(low)
                if entry is None:
                    break
                v ^= entry.hist[w]
            if v:
                c = _Chain(w, v, seq)
                seq += 1
                table[v & -v] = c
                survivors.append(c)
        alive = survivors
    for c in sorted(alive, key=lambda ch: (ch.birth, ch.seq)):
        summands.append(Summand(c.birth, None, c.gen))
    summands.sort(key=lambda s: (s.birth, s.exponent is not None, s.exponent or 0))
    return summands


def decompose(m: TauModule) -> TauDecomposition:
    """Classify a finitely generated module; see decompose_with_basis."""
    summands = decompose_with_basis(m)
    free = tuple(s.birth for s in summands if s.exponent is None)
    tors = tuple(sorted((s.exponent, s.birth) for s in summands if s.exponent is not None))
    return TauDecomposition(free, tors)


def module_from_decomposition(dec: TauDecomposition, lo: int, hi: int) -> TauModule:
    """Canonical model with the given summands (for round-trip checks)."""
    gens: list[tuple[int, int | None]] = [(b, None) for b in dec.free_births]
    gens += [(b, r) for (r, b) in dec.torsion]
    gens.sort(key=lambda g: (g[0], g[1] is not None, g[1] or 0))
    slices = []
    for w in range(lo, hi + 1):
        slices.append(
            [i for i, (b, r) in enumerate(gens) if b <= w and (r is None or w < b + r)]
        )
    dims = tuple(len(s) for s in slices)
    taus = []
    for w in range(lo, hi):
        nxt = {g: k for k, g in enumerate(slices[w - lo + 1])}
        rows = tuple(
            (1 << nxt[g]) if g in nxt else 0 for g in slices[w - lo]
        )
        taus.append(rows)
    return TauModule(lo, hi, dims, tuple(taus))


def _kernel_slices(d: TauMatrix) -> list[list[int]]:
    """Per-weight nullspace bases of a TauMatrix (combos over src basis)."""
    out = []
    for w in range(d.src.lo, d.src.hi + 1):
        rows = list(d.blocks[w - d.src.lo])
        out.append(f2.nullspace(rows, max(1, d.dst.dim(w))))
    return out


def homology_full(
    d_in: TauMatrix, d_out: TauMatrix
) -> tuple[TauModule, list[list[int]], list["f2.SpanF2"]]:
    """ker(d_out)/im(d_in) with representatives and image spans per weight.

    Raises ContractViolation unless d_out . d_in = 0 weight-wise.
    """
    if (d_in.dst.lo, d_in.dst.hi, d_in.dst.dims) != (
        d_out.src.lo,
        d_out.src.hi,
        d_out.src.dims,
    ):
        raise ValueError("homology: middle modules disagree")
    mid = d_out.src
    lo, hi = mid.lo, mid.hi
    for w in range(lo, hi + 1):
        for j in range(d_in.src.dim(w)):
            if d_out.apply(w, d_in.apply(w, 1 << j)):
                raise ContractViolation(f"d_out . d_in != 0 at weight {w}")
    reps_per_w: list[list[int]] = []
    spans: list[f2.SpanF2] = []
    for w in range(lo, hi + 1):
        ker = f2.nullspace(list(d_out.blocks[w - lo]), max(1, d_out.dst.dim(w)))
        im_span = f2.SpanF2(
            [d_in.apply(w, 1 << j) for j in range(d_in.src.dim(w))]
        )
        reps = []
        work = im_span.copy()
        for v in ker:
            r = work.add(v)
            if r:
                reps.append(r)
        reps_per_w.append(reps)
        spans.append(im_span)
    dims = tuple(len(r) for r in reps_per_w)
    taus = []
    for w in range(lo, hi):
        reps_next = reps_per_w[w - lo + 1]
        im_next = spans[w - lo + 1]
        rows = []
        for r in reps_per_w[w - lo]:
            img = im_next.reduce(mid.tau(w, r))
            combo = f2.solve(reps_next, max(1, mid.dim(w + 1)), img) if img else 0
            if combo is None:
                raise AssertionError("tau image of a cycle escaped the homology basis")
            rows.append(combo)
        taus.append(tuple(rows))
    return TauModule(lo, hi, dims, tuple(taus)), reps_per_w, spans


def homology_with_reps(
    d_in: TauMatrix, d_out: TauMatrix
) -> tuple[TauModule, list[list[int]]]:
    m, reps, _ = homology_full(d_in, d_out)
    return m, reps


def homology(d_in: TauMatrix, d_out: TauMatrix) -> TauModule:
    """ker(d_out)/im(d_in) as a TauModule with the induced tau-action."""
    return homology_full(d_in, d_out)[0]


def kernel_basis(d: TauMatrix) -> list[tuple[int, int]]:
    """Generators of ker(d) as a free F2[tau]-module.

    The source must be free (weight-graded submodules of free modules
    over F2[tau] are free, so the kernel is).  Returns (weight, vector)
    pairs, each tau-minimal in the kernel, lowest weight first, ties
    broken by slice order.
    """
    kslices = _kernel_slices(d)
    gens: list[tuple[int, int]] = []
    prev: list[int] = []
    for w in range(d.src.lo, d.src.hi + 1):
        cur = kslices[w - d.src.lo]
        span = f2.SpanF2([d.src.tau(w - 1, v) for v in prev])
        for v in cur:
            r = span.add(v)
            if r:
                gens.append((w, r))
        prev = cur
    return gens
