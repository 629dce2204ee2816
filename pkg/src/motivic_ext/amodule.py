"""Finitely presented, bounded-below modules over the Steenrod algebra.

A ModulePresentation stores an explicit truncated action table: a list
of M2-generators (each free or killed by a power of tau) and, for every
algebra generator Sq^{2^k}, the matrix of its action with tau-power
coefficients.  General Milnor basis elements act through factorization
into generator strings, so the table is the only stored data.

Presentations are immutable after construction and all operations here
are pure; sharing across threads is safe.

Modules that arise as quotients or submodules (A//A(0), the augmentation
ideal, kernels of differentials, the twisted module) are converted into
this explicit form by ``extract_presentation``: slice data is organised
into one weight-graded tau-module per internal degree, decomposed, and
the action entries are recovered by linear solves against the chosen
generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from . import f2, milnor, taulin
from .milnor import Algebra, Idx, MilnorElement, index_bidegree, sq_index, trim


class TruncationError(Exception):
    """An operation needed module data above the stored truncation."""


def gen_shift(algebra: Algebra, k: int) -> tuple[int, int]:
    """Bidegree of Sq^{2^k}: (2^k, 2^{k-1}) motivically, weight 0 classically."""
    if not algebra.motivic:
        return (1 << k, 0)
    return (1 << k, (1 << (k - 1)) if k >= 1 else 0)


def index_shift(algebra: Algebra, S: Idx) -> tuple[int, int]:
    d, w = index_bidegree(S)
    return (d, w if algebra.motivic else 0)


@dataclass(frozen=True)
class Generator:
    name: str
    deg: int
    wt: int
    tau_order: int | None = None  # None = free over M2


@dataclass(frozen=True)
class ActionEntry:
    src: int
    dst: int
    tau: int


class ModulePresentation:
    """Truncated bigraded A-module given by generators and action tables."""

    def __init__(
        self,
        name: str,
        algebra: Algebra,
        truncation: int,
        generators: tuple[Generator, ...],
        actions: dict[int, tuple[ActionEntry, ...]],
        validate: bool = True,
    ):
        self.name = name
        self.algebra = algebra
        self.truncation = truncation
        self.generators = tuple(generators)
        self.actions = {k: tuple(v) for k, v in actions.items() if v}
        self._slice_cache: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
        self._entry_by_src: dict[int, dict[int, list[ActionEntry]]] = {}
        for k, entries in self.actions.items():
            d = self._entry_by_src.setdefault(k, {})
            for e in entries:
                d.setdefault(e.src, []).append(e)
        if validate:
            self._validate_shape()

    # -- shape ---------------------------------------------------------------

    def _validate_shape(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for g in self.generators:
            if g.deg > self.truncation:
                raise ValueError(f"generator {g.name} above truncation")
            if g.tau_order is not None and g.tau_order <= 0:
                raise ValueError("tau_order must be positive")
        for k, entries in self.actions.items():
            dd, dw = gen_shift(self.algebra, k)
            for e in entries:
                src, dst = self.generators[e.src], self.generators[e.dst]
                if dst.deg != src.deg + dd or dst.wt + e.tau != src.wt + dw:
                    raise ValueError(
                        f"action Sq{1 << k}: {src.name} -> {dst.name} has wrong bidegree"
                    )
                if src.tau_order is not None:
                    if dst.tau_order is None or dst.tau_order > src.tau_order + e.tau:
                        raise ValueError(
                            f"action Sq{1 << k}: {src.name} -> {dst.name} "
                            "ill-defined on the tau-torsion generator"
                        )

    @property
    def min_degree(self) -> int:
        return min((g.deg for g in self.generators), default=0)

    @property
    def is_m2_free(self) -> bool:
        return all(g.tau_order is None for g in self.generators)

    def degrees(self) -> list[int]:
        return sorted({g.deg for g in self.generators})

    def weight_window(self, p: int) -> tuple[int, int] | None:
        """Weights where the degree-p part can be nonzero / unstable.

        Above the returned top, slices are tau-shifted copies of the top
        slice (free generators only), so computations may stop there.
        """
        gens = [g for g in self.generators if g.deg == p]
        if not gens:
            return None
        lo = min(g.wt for g in gens)
        hi = max(g.wt if g.tau_order is None else g.wt + g.tau_order - 1 for g in gens)
        return lo, hi

    # -- slices ----------------------------------------------------------------

    def slice_basis(self, p: int, w: int) -> tuple[tuple[int, int], ...]:
        """Basis of the (p, w) slice: (generator index, tau power) pairs."""
        key = (p, w)
        got = self._slice_cache.get(key)
        if got is None:
            out = []
            for i, g in enumerate(self.generators):
                if g.deg != p:
                    continue
                c = w - g.wt
                if c < 0:
                    continue
                if not self.algebra.motivic and c != 0:
                    continue  # classical ground field: no tau powers
                if g.tau_order is not None and c >= g.tau_order:
                    continue
                out.append((i, c))
            got = tuple(out)
            self._slice_cache[key] = got
        return got

    def slice_dim(self, p: int, w: int) -> int:
        return len(self.slice_basis(p, w))

    def tau_vec(self, p: int, w: int, vec: int) -> int:
        """Multiply a (p, w) slice vector by tau."""
        src = self.slice_basis(p, w)
        pos = {b: i for i, b in enumerate(self.slice_basis(p, w + 1))}
        out = 0
        i = 0
        v = vec
        while v:
            if v & 1:
                gi, c = src[i]
                j = pos.get((gi, c + 1))
                if j is not None:
                    out ^= 1 << j
            v >>= 1
            i += 1
        return out

    def tau_module(self, p: int, pad: int = 2) -> taulin.TauModule:
        """The degree-p part as a TauModule over its natural window."""
        win = self.weight_window(p)
        if win is None:
            return taulin.zero_module(0, 1)
        lo, hi = win[0], win[1] + pad
        dims = tuple(self.slice_dim(p, w) for w in range(lo, hi + 1))
        taus = tuple(
            tuple(self.tau_vec(p, w, 1 << i) for i in range(self.slice_dim(p, w)))
            for w in range(lo, hi)
        )
        return taulin.TauModule(lo, hi, dims, taus)

    # -- action ------------------------------------------------------------------

    def act_gen(self, k: int, p: int, w: int, vec: int) -> int:
        """Action of Sq^{2^k} on a (p, w) slice vector."""
        dd, dw = gen_shift(self.algebra, k)
        if p + dd > self.truncation:
            raise TruncationError(
                f"Sq{1 << k} out of range at degree {p} (truncation {self.truncation})"
            )
        src = self.slice_basis(p, w)
        pos = {b: i for i, b in enumerate(self.slice_basis(p + dd, w + dw))}
        by_src = self._entry_by_src.get(k, {})
        out = 0
        i = 0
        v = vec
        while v:
            if v & 1:
                gi, c = src[i]
                for e in by_src.get(gi, ()):
                    j = pos.get((e.dst, c + e.tau))
                    if j is not None:
                        out ^= 1 << j
            v >>= 1
            i += 1
        return out

    def act_index(self, S: Idx, p: int, w: int, vec: int) -> int:
        """Action of the Milnor basis element P^S via generator strings."""
        if S == ():
            return vec
        out = 0
        for (c, ks) in self.algebra.factor_into_generators(S):
            v = vec
            q, u = p, w
            for k in reversed(ks):
                v = self.act_gen(k, q, u, v)
                dd, dw = gen_shift(self.algebra, k)
                q += dd
                u += dw
                if v == 0:
                    break
            for _ in range(c):
                if v == 0:
                    break
                v = self.tau_vec(q, u, v)
                u += 1
            if v:
                out ^= v
        return out

    def act_element(self, e: MilnorElement, p: int, w: int, vec: int) -> int:
        out = 0
        for S, c in e.terms.items():
            v = self.act_index(S, p, w, vec)
            dd, dw = index_shift(self.algebra, S)
            for _ in range(c):
                if v == 0:
                    break
                v = self.tau_vec(p + dd, w + dw, v)
                dw += 1
            if v:
                out ^= v
        return out

    # -- validation -----------------------------------------------------------------

    def validate_sq1_squared(self):
        """Sq1 Sq1 = 0 on every slice where the composite stays in range."""
        for p in self.degrees():
            if p + 2 > self.truncation:
                continue
            win = self.weight_window(p)
            if win is None:
                continue
            for w in range(win[0], win[1] + 2):
                for i in range(self.slice_dim(p, w)):
                    if self.act_gen(0, p + 1, w, self.act_gen(0, p, w, 1 << i)):
                        raise ValueError(f"Sq1 Sq1 != 0 at ({p}, {w})")

    def validate_product_compat(self, rng, samples: int = 25):
        """(uv) x == u (v x) for random Milnor pairs within truncation."""
        degs = self.degrees()
        for _ in range(samples):
            p = rng.choice(degs)
            win = self.weight_window(p)
            if win is None:
                continue
            w = rng.randrange(win[0], win[1] + 1)
            dim = self.slice_dim(p, w)
            if dim == 0:
                continue
            vec = rng.getrandbits(dim)
            budget = self.truncation - p
            if budget < 2:
                continue
            d1 = rng.randrange(1, budget)
            d2 = rng.randrange(1, budget - d1 + 1)
            b1 = self.algebra.basis_degree(d1)
            b2 = self.algebra.basis_degree(d2)
            if not b1 or not b2:
                continue
            u, v = rng.choice(b1), rng.choice(b2)
            vx = self.act_index(v, p, w, vec)
            dd, dw = index_shift(self.algebra, v)
            lhs = self.act_index(u, p + dd, w + dw, vx)
            rhs = 0
            for T, c in self.algebra.product_indices(u, v).items():
                tv = self.act_index(T, p, w, vec)
                td, tw = index_shift(self.algebra, T)
                for _ in range(c):
                    if tv == 0:
                        break
                    tv = self.tau_vec(p + td, w + tw, tv)
                    tw += 1
                rhs ^= tv
            assert lhs == rhs, f"Milnor compatibility fails for {u}, {v} at ({p},{w})"

    # -- constructions ------------------------------------------------------------------

    def suspended(self, a: int, b: int, name: str | None = None) -> "ModulePresentation":
        gens = tuple(
            Generator(g.name, g.deg + a, g.wt + b, g.tau_order) for g in self.generators
        )
        return ModulePresentation(
            name or f"S({a},{b}){self.name}",
            self.algebra,
            self.truncation + a,
            gens,
            self.actions,
        )

    def direct_sum(self, other: "ModulePresentation", name: str | None = None):
        if self.algebra is not other.algebra:
            raise ValueError("direct sum across different algebras")
        n = len(self.generators)
        gens = self.generators + tuple(
            Generator(f"{g.name}'", g.deg, g.wt, g.tau_order) for g in other.generators
        )
        actions: dict[int, tuple[ActionEntry, ...]] = {}
        for k in set(self.actions) | set(other.actions):
            entries = list(self.actions.get(k, ()))
            entries += [
                ActionEntry(e.src + n, e.dst + n, e.tau)
                for e in other.actions.get(k, ())
            ]
            actions[k] = tuple(entries)
        return ModulePresentation(
            name or f"{self.name}+{other.name}",
            self.algebra,
            min(self.truncation, other.truncation),
            gens,
            actions,
        )

    def restricted(self, algebra: Algebra, name: str | None = None):
        """View over a subalgebra profile (keeps only its generators)."""
        ks = set(algebra.gen_ks) if algebra.gen_ks else None
        actions = {
            k: v for k, v in self.actions.items() if ks is None or k in ks
        }
        return ModulePresentation(
            name or self.name, algebra, self.truncation, self.generators, actions
        )

    # -- file format -----------------------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "algebra": self.algebra.key,
            "truncation": self.truncation,
            "generators": [
                (
                    {"name": g.name, "deg": g.deg, "wt": g.wt}
                    if g.tau_order is None
                    else {"name": g.name, "deg": g.deg, "wt": g.wt, "tau_order": g.tau_order}
                )
                for g in self.generators
            ],
            "actions": [
                {
                    "op": f"Sq{1 << k}",
                    "src": self.generators[src].name,
                    "targets": [
                        {"gen": self.generators[e.dst].name, "tau": e.tau}
                        for e in entries
                    ],
                }
                for k in sorted(self.actions)
                for src, entries in sorted(
                    self._group_entries(self.actions[k]).items()
                )
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    @staticmethod
    def _group_entries(entries):
        by_src: dict[int, list[ActionEntry]] = {}
        for e in entries:
            by_src.setdefault(e.src, []).append(e)
        return {
            src: sorted(v, key=lambda e: (e.dst, e.tau)) for src, v in by_src.items()
        }

    @classmethod
    def from_json(cls, text: str) -> "ModulePresentation":
        doc = json.loads(text)
        gens = tuple(
            Generator(g["name"], g["deg"], g["wt"], g.get("tau_order"))
            for g in doc["generators"]
        )
        idx = {g.name: i for i, g in enumerate(gens)}
        actions: dict[int, list[ActionEntry]] = {}
        for a in doc["actions"]:
            n = int(a["op"][2:])
            k = n.bit_length() - 1
            if (1 << k) != n:
                raise ValueError(f"op {a['op']} is not a Sq^(2^k) generator")
            for t in a["targets"]:
                actions.setdefault(k, []).append(
                    ActionEntry(idx[a["src"]], idx[t["gen"]], t["tau"])
                )
        return cls(
            doc["name"],
            Algebra.get(doc["algebra"]),
            doc["truncation"],
            gens,
            {k: tuple(v) for k, v in actions.items()},
        )

    def __repr__(self):
        free = sum(1 for g in self.generators if g.tau_order is None)
        return (
            f"ModulePresentation({self.name!r}, {len(self.generators)} generators "
            f"({free} free), T={self.truncation})"
        )


# ---------------------------------------------------------------------------
# free modules over the algebra, sliced


class FreeSlices:
    """Slice arithmetic for a sum of shifted copies of the algebra.

    cells is a list of (key, deg, wt); the (p, w) slice has basis
    (cell, S) over Milnor indices S with deg + |S| = p, the tau power
    being implied by w.
    """

    def __init__(self, algebra: Algebra, cells, truncation: int):
        self.algebra = algebra
        self.cells = list(cells)
        self.truncation = truncation
        self._basis_cache: dict[tuple[int, int], tuple] = {}
        self._pos_cache: dict[tuple[int, int], dict] = {}

    def weight_window(self, p: int) -> tuple[int, int] | None:
        lo = None
        hi = None
        for (key, d, wt) in self.cells:
            if d > p:
                continue
            wlo, whi = self.algebra.weight_range(p - d)
            if whi < wlo:
                continue
            l, h = wt + wlo, wt + whi
            lo = l if lo is None else min(lo, l)
            hi = h if hi is None else max(hi, h)
        if lo is None:
            return None
        return lo, hi

    def slice_basis(self, p: int, w: int):
        key = (p, w)
        got = self._basis_cache.get(key)
        if got is None:
            out = []
            for (ck, d, wt) in self.cells:
                if d > p:
                    continue
                for S in self.algebra.basis_degree(p - d):
                    ws = wt + self.algebra.weight(S)
                    if (ws <= w) if self.algebra.motivic else (ws == w):
                        out.append((ck, S))
            got = tuple(out)
            self._basis_cache[key] = got
        return got

    def positions(self, p: int, w: int) -> dict:
        key = (p, w)
        got = self._pos_cache.get(key)
        if got is None:
            got = {b: i for i, b in enumerate(self.slice_basis(p, w))}
            self._pos_cache[key] = got
        return got

    def slice_dim(self, p: int, w: int) -> int:
        return len(self.slice_basis(p, w))

    def tau_vec(self, p: int, w: int, vec: int) -> int:
        src = self.slice_basis(p, w)
        pos = self.positions(p, w + 1)
        out = 0
        i = 0
        while vec:
            if vec & 1:
                out ^= 1 << pos[src[i]]
            vec >>= 1
            i += 1
        return out

    def act_index(self, S: Idx, p: int, w: int, vec: int) -> int:
        """Left multiplication by P^S on a slice vector."""
        if S == ():
            return vec
        src = self.slice_basis(p, w)
        dS, wS = index_shift(self.algebra, S)
        pos = self.positions(p + dS, w + wS)
        cellwt = {ck: wt for (ck, d, wt) in self.cells}
        out = 0
        i = 0
        while vec:
            if vec & 1:
                ck, V = src[i]
                for T, c in self.algebra.product_indices(S, V).items():
                    out ^= 1 << pos[(ck, T)]
                    del c  # implied by the weight of T
            vec >>= 1
            i += 1
        del cellwt
        return out

    def act_gen(self, k: int, p: int, w: int, vec: int) -> int:
        return self.act_index(sq_index(k), p, w, vec)

    def element_vec(self, terms: dict[tuple, int], p: int, w: int) -> int:
        """Pack {(cell key, S): tau power} into the (p, w) slice."""
        pos = self.positions(p, w)
        out = 0
        for (ck, S), c in terms.items():
            out ^= 1 << pos[(ck, S)]
            del c
        return out


# ---------------------------------------------------------------------------
# presentation extraction from slice data


def extract_presentation(
    name: str,
    algebra: Algebra,
    truncation: int,
    windows: dict[int, tuple[int, int]],
    basis_vectors,
    tau_vec,
    act_gen,
    validate: bool = True,
):
    """Turn per-slice spanning data into an explicit ModulePresentation.

    ``basis_vectors(p, w)`` returns an independent list of vectors (in
    some ambient coordinate system) spanning the module's slice;
    ``tau_vec`` and ``act_gen`` operate in those ambient coordinates.
    The window for each degree must extend past weight stabilization
    (callers use natural-top + 2).

    Returns (presentation, reps) where reps[i] = (p, w, ambient vector)
    locates each new generator in the ambient module.
    """
    # sub-coordinates per slice
    trackers: dict[tuple[int, int], f2.SpanTracked] = {}
    bases: dict[tuple[int, int], list[int]] = {}

    def tracker(p, w):
        key = (p, w)
        got = trackers.get(key)
        if got is None:
            got = f2.SpanTracked()
            vecs = basis_vectors(p, w)
            for v in vecs:
                got.add(v)
            if len(got.pivots) != len(vecs):
                raise AssertionError(f"slice basis at {key} is dependent")
            trackers[key] = got
            bases[key] = list(vecs)
        return got

    def subdim(p, w):
        tracker(p, w)
        return len(bases[(p, w)])

    def to_sub(p, w, ambient_vec) -> int:
        t = tracker(p, w)
        combo = t.witness(ambient_vec)
        if combo is None:
            raise AssertionError(f"vector escaped the submodule at ({p}, {w})")
        return combo

    def to_ambient(p, w, sub_vec) -> int:
        tracker(p, w)
        rows = bases[(p, w)]
        out = 0
        i = 0
        while sub_vec:
            if sub_vec & 1:
                out ^= rows[i]
            sub_vec >>= 1
            i += 1
        return out

    # one TauModule per degree, in sub-coordinates
    degrees = sorted(windows)
    summands_by_degree = {}
    tau_modules = {}
    for p in degrees:
        lo, hi = windows[p]
        dims = tuple(subdim(p, w) for w in range(lo, hi + 1))
        rows = []
        for w in range(lo, hi):
            rows.append(
                tuple(
                    to_sub(p, w + 1, tau_vec(p, w, to_ambient(p, w, 1 << i)))
                    for i in range(subdim(p, w))
                )
            )
        tm = taulin.TauModule(lo, hi, dims, tuple(rows))
        tau_modules[p] = tm
        summands_by_degree[p] = taulin.decompose_with_basis(tm)

    gens: list[Generator] = []
    reps: dict[int, tuple[int, int, int]] = {}
    locator: dict[tuple[int, int, int], int] = {}  # (p, birth, seq) -> gen index
    for p in degrees:
        for i, s in enumerate(summands_by_degree[p]):
            gi = len(gens)
            gens.append(Generator(f"x{p}_{s.birth}_{i}", p, s.birth, s.exponent))
            reps[gi] = (p, s.birth, to_ambient(p, s.birth, s.gen))
            locator[(p, s.birth, i)] = gi

    # per-slice generator coordinates: [(gen index, tau power, sub vector)]
    gen_coords: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for p in degrees:
        lo, hi = windows[p]
        tm = tau_modules[p]
        cur: list[tuple[int, int]] = []  # (gen index, sub vector at this weight)
        for w in range(lo, hi + 1):
            cur = [(gi, tm.tau(w - 1, v)) for (gi, v) in cur]
            cur = [(gi, v) for (gi, v) in cur if v]
            for i, s in enumerate(summands_by_degree[p]):
                if s.birth == w:
                    cur.append((locator[(p, w, i)], s.gen))
            gen_coords[(p, w)] = [
                (gi, w - gens[gi].wt, v) for (gi, v) in cur
            ]

    def express(p, w, sub_vec) -> list[tuple[int, int]]:
        """sub vector -> [(gen index, tau power)]"""
        if sub_vec == 0:
            return []
        coords = gen_coords.get((p, w))
        if coords is None:
            raise AssertionError(f"no generator coordinates at ({p}, {w})")
        combo = f2.solve([v for (_, _, v) in coords], max(1, subdim(p, w)), sub_vec)
        if combo is None:
            raise AssertionError(f"vector not in generator span at ({p}, {w})")
        out = []
        i = 0
        while combo:
            if combo & 1:
                gi, c, _ = coords[i]
                out.append((gi, c))
            combo >>= 1
            i += 1
        return out

    actions: dict[int, list[ActionEntry]] = {}
    ks = algebra.gen_ks or algebra.generators_for_degree(truncation)
    for gi, g in enumerate(gens):
        p, w = g.deg, g.wt
        amb = reps[gi][2]
        for k in ks:
            dd, dw = gen_shift(algebra, k)
            if p + dd > truncation or (p + dd) not in windows:
                continue
            img = act_gen(k, p, w, amb)
            if img == 0:
                continue
            lo2, hi2 = windows[p + dd]
            if not (lo2 <= w + dw <= hi2):
                raise AssertionError("action image out of the stored window")
            for (gj, c) in express(p + dd, w + dw, to_sub(p + dd, w + dw, img)):
                actions.setdefault(k, []).append(ActionEntry(gi, gj, c))

    pres = ModulePresentation(
        name,
        algebra,
        truncation,
        tuple(gens),
        {k: tuple(v) for k, v in actions.items()},
        validate=validate,
    )
    return pres, reps


# ---------------------------------------------------------------------------
# quotient of a free module by an A-submodule of relation elements


def module_from_relations(
    name: str,
    algebra: Algebra,
    cells,
    relations: list[tuple[int, int, dict]],
    truncation: int,
    validate: bool = True,
):
    """Free module on ``cells`` modulo the A-span of relation elements.

    Each relation is (degree, weight, {(cell key, S): tau power}).
    Returns (presentation, free_slices, dspans) so callers can keep
    working in ambient coordinates if needed.
    """
    free = FreeSlices(algebra, cells, truncation)
    for (p, w, terms) in relations:
        if p > truncation:
            raise TruncationError(
                f"relation in degree {p} exceeds truncation {truncation}"
            )

    windows: dict[int, tuple[int, int]] = {}
    mind = min((d for (_, d, _) in free.cells), default=0)
    for p in range(mind, truncation + 1):
        win = free.weight_window(p)
        if win is not None:
            windows[p] = (win[0], win[1] + 2)

    # relation span per slice, built bottom-up in (degree, weight)
    dspans: dict[tuple[int, int], f2.SpanF2] = {}
    for p in sorted(windows):
        lo, hi = windows[p]
        for w in range(lo, hi + 1):
            span = f2.SpanF2()
            prev = dspans.get((p, w - 1))
            if prev is not None:
                for row in prev.pivots.values():
                    span.add(free.tau_vec(p, w - 1, row))
            for (pr, wr, terms) in relations:
                if pr > p:
                    continue
                rvec = free.element_vec(terms, pr, wr)
                for S in algebra.basis_degree(p - pr):
                    dS, wS = index_shift(algebra, S)
                    if wr + wS == w:
                        span.add(free.act_index(S, pr, wr, rvec))
                    del dS
            dspans[(p, w)] = span

    # reduced coordinates: non-pivot positions of each slice
    posmaps: dict[tuple[int, int], list[int]] = {}

    def positions(p, w):
        key = (p, w)
        got = posmaps.get(key)
        if got is None:
            piv = {low.bit_length() - 1 for low in dspans[key].pivots}
            got = [i for i in range(free.slice_dim(p, w)) if i not in piv]
            posmaps[key] = got
        return got

    def compress(p, w, vec):
        out = 0
        for j, i in enumerate(positions(p, w)):
            if (vec >> i) & 1:
                out |= 1 << j
        return out

    def lift(p, w, sub):
        out = 0
        for j, i in enumerate(positions(p, w)):
            if (sub >> j) & 1:
                out |= 1 << i
        return out

    def q_basis(p, w):
        return [1 << j for j in range(len(positions(p, w)))]

    def q_tau(p, w, vec):
        if free.slice_dim(p, w + 1) == 0:
            return 0
        amb = free.tau_vec(p, w, lift(p, w, vec))
        return compress(p, w + 1, dspans[(p, w + 1)].reduce_full(amb))

    def q_act(k, p, w, vec):
        dd, dw = gen_shift(algebra, k)
        if free.slice_dim(p + dd, w + dw) == 0:
            return 0
        amb = free.act_gen(k, p, w, lift(p, w, vec))
        return compress(p + dd, w + dw, dspans[(p + dd, w + dw)].reduce_full(amb))

    pres, reps = extract_presentation(
        name, algebra, truncation, windows, q_basis, q_tau, q_act, validate=validate
    )
    return pres, free, dspans


def free_module_presentation(
    algebra: Algebra, cells, truncation: int, name: str | None = None
) -> ModulePresentation:
    """The free module on the given cells as an explicit presentation."""
    pres, _, _ = module_from_relations(
        name or "free", algebra, cells, [], truncation, validate=False
    )
    return pres


# ---------------------------------------------------------------------------
# named modules


PRESET_NAMES = ("M2", "A0", "Ceta", "Atilde1", "Atilde", "AmodA0", "I", "N", "AmodB")


@lru_cache(maxsize=None)
def preset(name: str, truncation: int) -> ModulePresentation:
    """The paper's named modules, truncated at the given internal degree."""
    A = Algebra.get("A")
    if name == "M2":
        return ModulePresentation("M2", A, truncation, (Generator("i", 0, 0),), {})
    if name == "A0":
        gens = (Generator("i", 0, 0), Generator("s", 1, 0))
        return ModulePresentation(
            "A0", A, truncation, gens, {0: (ActionEntry(0, 1, 0),)}
        )
    if name == "Ceta":
        gens = (Generator("bot", -2, -1), Generator("top", 0, 0))
        return ModulePresentation(
            "Ceta", A, truncation, gens, {1: (ActionEntry(0, 1, 0),)}
        )
    if name == "Atilde1":
        a1 = Algebra.get("A1")
        gens = (
            Generator("a", 0, 0),
            Generator("Sq1_a", 1, 0),
            Generator("b", 2, 0),
            Generator("Sq1_b", 3, 0),
            Generator("Sq2Sq1_a", 3, 1),
            Generator("Sq1Sq2Sq1_a", 4, 1),
            Generator("Sq2Sq1_b", 5, 1),
            Generator("Sq1Sq2Sq1_b", 6, 1),
        )
        actions = {
            0: (
                ActionEntry(0, 1, 0),
                ActionEntry(2, 3, 0),
                ActionEntry(4, 5, 0),
                ActionEntry(6, 7, 0),
            ),
            1: (
                ActionEntry(0, 2, 1),  # Sq2 a = tau b   (dashed line)
                ActionEntry(1, 4, 0),
                ActionEntry(2, 5, 0),
                ActionEntry(3, 6, 0),
                ActionEntry(5, 7, 1),  # Sq2 Sq1Sq2Sq1 a = tau Sq1Sq2Sq1 b
            ),
        }
        if truncation < 6:
            raise TruncationError("Atilde1 needs truncation >= 6")
        return ModulePresentation("Atilde1", a1, truncation, gens, actions)
    if name == "Atilde":
        if truncation < 4:
            raise TruncationError("Atilde needs truncation >= 4")
        cells = [("a", 0, 0), ("b", 2, 0)]
        relations = [
            (2, 1, {("a", (2,)): 0, ("b", ()): 1}),  # Sq2 a + tau b
            (4, 1, {("a", (1, 1)): 0, ("b", (2,)): 0}),  # Sq3Sq1 a + Sq2 b
        ]
        pres, _, _ = module_from_relations("Atilde", A, cells, relations, truncation)
        return pres
    if name == "AmodA0":
        pres, _, _ = quotient_by_right_multiples(
            "AmodA0", [MilnorElement.from_index((1,))], truncation
        )
        return pres
    if name == "I":
        return augmentation_ideal(preset("AmodA0", truncation))[0]
    if name == "N":
        return augmentation_ideal(preset("AmodA0", truncation))[1]
    if name == "AmodB":
        pres, _, _ = quotient_by_right_multiples(
            "AmodB", [MilnorElement.from_index((1,), 1)], truncation
        )
        return pres
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


def quotient_by_right_multiples(
    name: str, elements: list[MilnorElement], truncation: int
):
    """The left module A / (A . e1 + A . e2 + ...) as a presentation."""
    A = Algebra.get("A")
    relations = []
    for e in elements:
        if e.is_zero():
            continue
        if e.bidegree[0] <= 0:
            raise ValueError("quotient elements must have positive degree")
        terms = {("i", S): c for S, c in e.terms.items()}
        relations.append((e.bidegree[0], e.bidegree[1], terms))
    return module_from_relations(name, A, [("i", 0, 0)], relations, truncation)


def augmentation_ideal(m: ModulePresentation):
    """(I, N) for the augmentation M -> M2: I = ker, N = S^{-2,-1} I."""
    units = [i for i, g in enumerate(m.generators) if g.deg == 0]
    if len(units) != 1 or m.generators[units[0]].wt != 0:
        raise ValueError("module has no unique unit generator in degree (0,0)")
    unit = units[0]
    keep = [i for i in range(len(m.generators)) if i != unit]
    renum = {old: new for new, old in enumerate(keep)}
    gens = tuple(m.generators[i] for i in keep)
    actions = {}
    for k, entries in m.actions.items():
        out = []
        for e in entries:
            if e.src == unit:
                continue  # the unit maps out of the ideal; dropped with it
            assert e.dst != unit, "positive-degree action cannot hit the unit"
            out.append(ActionEntry(renum[e.src], renum[e.dst], e.tau))
        if out:
            actions[k] = tuple(out)
    ideal = ModulePresentation(f"I({m.name})", m.algebra, m.truncation, gens, actions)
    n = ideal.suspended(-2, -1, name=f"N({m.name})")
    return ideal, n


@dataclass(frozen=True)
class TensorCheckReport:
    ok: bool
    truncation: int
    checked: int
    first_mismatch: tuple[int, int] | None

    def summary(self) -> str:
        if self.ok:
            return (
                f"two-relation presentation of Atilde matches A (x)_{{A(1)}} Atilde(1) "
                f"in all {self.checked} bidegrees through degree {self.truncation}"
            )
        return f"MISMATCH at bidegree {self.first_mismatch}"


def tensor_over_a1_check(truncation: int) -> TensorCheckReport:
    """Check the two constructions of the twisted module agree per slice.

    Route 1 is the two-relation presentation; route 2 counts an M2-basis
    of M (x)_{M2} Atilde(1) using the right-A(1) freeness basis of A.
    """
    atilde = preset("Atilde", truncation)
    a1gens = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (4, 1), (5, 1), (6, 1)]
    checked = 0
    for p in range(0, truncation + 1):
        win = atilde.weight_window(p)
        free_win = FreeSlices(Algebra.get("A"), [("a", 0, 0), ("b", 2, 0)], truncation).weight_window(p)
        if win is None and free_win is None:
            continue
        los = [x[0] for x in (win, free_win) if x is not None]
        his = [x[1] for x in (win, free_win) if x is not None]
        lo, hi = min(los), max(his) + 2
        for w in range(lo, hi + 1):
            expected = 0
            for dg, wg in a1gens:
                if dg > p:
                    continue
                for R in milnor.complement_basis_degree(p - dg):
                    if milnor.index_weight(R) + wg <= w:
                        expected += 1
            got = atilde.slice_dim(p, w)
            checked += 1
            if got != expected:
                return TensorCheckReport(False, truncation, checked, (p, w))
    return TensorCheckReport(True, truncation, checked, None)


def tensor_presentation(
    left: ModulePresentation,
    right: ModulePresentation,
    truncation: int | None = None,
    name: str | None = None,
) -> ModulePresentation:
    """Tensor product over M2 with the diagonal A-action.

    Both factors must be M2-free; the action of Sq^{2^k} is computed
    through the coproduct of the Steenrod algebra (carrying the motivic
    Cartan tau-corrections)."""
    if left.algebra is not right.algebra:
        raise ValueError("tensor factors over different algebras")
    if not (left.is_m2_free and right.is_m2_free):
        raise ValueError("tensor_presentation needs M2-free factors")
    algebra = left.algebra
    T = truncation if truncation is not None else min(left.truncation, right.truncation)
    gens = []
    index = {}
    for i, gl in enumerate(left.generators):
        for j, gr in enumerate(right.generators):
            if gl.deg + gr.deg > T:
                continue
            index[(i, j)] = len(gens)
            gens.append(
                Generator(f"{gl.name}*{gr.name}", gl.deg + gr.deg, gl.wt + gr.wt)
            )
    actions: dict[int, list[ActionEntry]] = {}
    ks = algebra.gen_ks or algebra.generators_for_degree(T)
    for (i, j), src in index.items():
        gl, gr = left.generators[i], right.generators[j]
        for k in ks:
            dd, dw = gen_shift(algebra, k)
            if gl.deg + gr.deg + dd > T:
                continue
            acc: dict[int, int] = {}
            for (c, R, S) in milnor.coproduct_indices(sq_index(k)):
                dR, wR = index_shift(algebra, R)
                dS, wS = index_shift(algebra, S)
                lv = left.act_index(R, gl.deg, gl.wt, 1 << left.slice_basis(gl.deg, gl.wt).index((i, 0)))
                if lv == 0:
                    continue
                rv = right.act_index(S, gr.deg, gr.wt, 1 << right.slice_basis(gr.deg, gr.wt).index((j, 0)))
                if rv == 0:
                    continue
                lbasis = left.slice_basis(gl.deg + dR, gl.wt + wR)
                rbasis = right.slice_basis(gr.deg + dS, gr.wt + wS)
                li = 0
                lvv = lv
                while lvv:
                    if lvv & 1:
                        (gi2, c1) = lbasis[li]
                        rvv = rv
                        ri = 0
                        while rvv:
                            if rvv & 1:
                                (gj2, c2) = rbasis[ri]
                                dst = index.get((gi2, gj2))
                                if dst is not None:
                                    e = c + c1 + c2
                                    if dst in acc and acc[dst] != e:
                                        raise AssertionError("inhomogeneous tensor action")
                                    if dst in acc:
                                        del acc[dst]
                                    else:
                                        acc[dst] = e
                            rvv >>= 1
                            ri += 1
                    lvv >>= 1
                    li += 1
            for dst, e in sorted(acc.items()):
                actions.setdefault(k, []).append(ActionEntry(src, dst, e))
    return ModulePresentation(
        name or f"{left.name}(x){right.name}",
        algebra,
        T,
        tuple(gens),
        {k: tuple(v) for k, v in actions.items()},
    )


def hopf_extension_module(i: int, truncation: int) -> ModulePresentation:
    """The two-cell module realizing the h_i extension: cells x at (0,0)
    and y at (2^i, 2^{i-1}) joined by Sq^{2^i} (cofiber of 2, eta, nu
    for i = 0, 1, 2, up to suspension)."""
    A = Algebra.get("A")
    dd, dw = gen_shift(A, i)
    gens = (Generator("x", 0, 0), Generator("y", dd, dw))
    return ModulePresentation(
        f"E(h{i})", A, truncation, gens, {i: (ActionEntry(0, 1, 0),)}
    )


# ---------------------------------------------------------------------------
# maps and short exact sequences


class ModuleMap:
    """Degree-preserving M2-linear (and A-linear) map between presentations.

    entries[src generator index] = ((dst generator index, tau power), ...)
    """

    def __init__(self, src: ModulePresentation, dst: ModulePresentation, entries,
                 validate: bool = True):
        self.src = src
        self.dst = dst
        self.entries = {s: tuple(v) for s, v in entries.items() if v}
        if validate:
            self._validate()

    def _validate(self):
        for s, targets in self.entries.items():
            gs = self.src.generators[s]
            for (d, e) in targets:
                gd = self.dst.generators[d]
                if gd.deg != gs.deg or gd.wt + e != gs.wt:
                    raise ValueError(f"map entry {gs.name} -> {gd.name} off-bidegree")
        # A-linearity on the stored generators
        T = min(self.src.truncation, self.dst.truncation)
        ks = sorted(set(self.src.actions) | set(self.dst.actions))
        for s in range(len(self.src.generators)):
            gs = self.src.generators[s]
            for k in ks:
                dd, dw = gen_shift(self.src.algebra, k)
                if gs.deg + dd > T:
                    continue
                p, w = gs.deg, gs.wt
                pos_s = self.src.slice_basis(p, w).index((s, 0))
                lhs = self.apply(p + dd, w + dw, self.src.act_gen(k, p, w, 1 << pos_s))
                rhs = self.dst.act_gen(k, p, w, self.apply(p, w, 1 << pos_s))
                if lhs != rhs:
                    raise ValueError(
                        f"map is not A-linear at generator {gs.name}, Sq{1 << k}"
                    )

    def apply(self, p: int, w: int, vec: int) -> int:
        src = self.src.slice_basis(p, w)
        pos = {b: i for i, b in enumerate(self.dst.slice_basis(p, w))}
        out = 0
        i = 0
        while vec:
            if vec & 1:
                gi, c = src[i]
                for (d, e) in self.entries.get(gi, ()):
                    j = pos.get((d, c + e))
                    if j is not None:
                        out ^= 1 << j
            vec >>= 1
            i += 1
        return out

    def slice_matrix(self, p: int, w: int) -> list[int]:
        return [
            self.apply(p, w, 1 << i) for i in range(self.src.slice_dim(p, w))
        ]


@dataclass
class ShortExactSequence:
    sub: ModulePresentation
    mid: ModulePresentation
    quot: ModulePresentation
    incl: ModuleMap
    proj: ModuleMap

    def check_exact(self, max_degree: int | None = None) -> list[tuple[int, int]]:
        """Verify exactness per bidegree; returns the list of failures."""
        T = min(self.sub.truncation, self.mid.truncation, self.quot.truncation)
        if max_degree is not None:
            T = min(T, max_degree)
        bad = []
        degrees = sorted(
            set(self.mid.degrees()) | set(self.sub.degrees()) | set(self.quot.degrees())
        )
        for p in degrees:
            if p > T:
                continue
            wins = [
                m.weight_window(p)
                for m in (self.sub, self.mid, self.quot)
                if m.weight_window(p) is not None
            ]
            if not wins:
                continue
            lo = min(w[0] for w in wins)
            hi = max(w[1] for w in wins) + 2
            for w in range(lo, hi + 1):
                fm = self.incl.slice_matrix(p, w)
                gm = self.proj.slice_matrix(p, w)
                dim_mid = self.mid.slice_dim(p, w)
                dim_q = self.quot.slice_dim(p, w)
                rank_f = f2.rank(fm, max(1, dim_mid))
                rank_g = f2.rank(gm, max(1, dim_q))
                ok = (
                    rank_f == self.sub.slice_dim(p, w)  # injective
                    and rank_g == dim_q  # surjective
                    and rank_f == dim_mid - rank_g  # im = ker in the middle
                    and all(
                        self.proj.apply(p, w, row) == 0 for row in fm
                    )  # composition zero
                )
                if not ok:
                    bad.append((p, w))
        return bad
