"""Exact arithmetic in the mod-2 motivic Steenrod algebra over C.

Everything is done in the Milnor basis.  The dual algebra is generated
over M2 = F2[tau] by exterior classes tau_i of bidegree (2^{i+1}-1,
2^i-1) and polynomial classes xi_j of bidegree (2(2^j-1), 2^j-1),
subject to tau_i^2 = tau * xi_{i+1}; note that multiplication by tau
lowers the weight index of a dual monomial by one (that is what makes
the relation homogeneous).  A basis monomial tau(E)xi(R) is encoded by
the Milnor index S with s_i = eps_{i-1} + 2 r_i, and P^S denotes the
dual basis element of the Steenrod algebra itself.

The product on the Steenrod algebra side is the dual of the coproduct,
with <a*b, m> = <a (x) b, Delta m> and no antipode twist.  The
orientation is pinned by the regression identity P(1)*P(2) = P(3).
Concretely, the coefficient of P^T in P^S P^V is tau^c with
c = wt(S) + wt(V) - wt(T), present exactly when the reduced expansion
of Delta(monomial of T) contains the tensor pair (monomial of S,
monomial of V) an odd number of times.

A "classical" variant (no exterior part, no tau, single weight 0) is
provided as an independent oracle for tau-inverted comparisons.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from . import f2

Idx = tuple[int, ...]

SQ1: Idx = (1,)
SQ2: Idx = (2,)


def sq_index(k: int) -> Idx:
    """Milnor index of the algebra generator Sq^{2^k}."""
    return (1 << k,)


def trim(seq) -> Idx:
    """Canonical index form: strip trailing zeros."""
    seq = tuple(seq)
    n = len(seq)
    while n and seq[n - 1] == 0:
        n -= 1
    return seq[:n]


def index_bidegree(S: Idx) -> tuple[int, int]:
    """(degree, weight) of P^S from the exterior/polynomial split."""
    d = 0
    w = 0
    for i, s in enumerate(S, start=1):
        d += ((1 << i) - 1) * s
        w += ((1 << (i - 1)) - 1) * (s & 1) + ((1 << i) - 1) * (s >> 1)
    return d, w


def index_degree(S: Idx) -> int:
    return sum(((1 << i) - 1) * s for i, s in enumerate(S, start=1))


def index_weight(S: Idx) -> int:
    return index_bidegree(S)[1]


def excess(S: Idx) -> int:
    return sum(S)


def binom2(n: int, k: int) -> int:
    """Binomial coefficient mod 2 by Lucas (bitwise test)."""
    if k < 0 or k > n:
        return 0
    return 1 if (k & (n - k)) == 0 else 0


def leading_term(R: Idx, S: Idx) -> tuple[int, Idx]:
    """Top-excess part of P^R P^S: (coefficient mod 2, index R+S).

    The coefficient is the product of the multinomial coefficients
    (r_i + s_i)! / (r_i! s_i!) mod 2, i.e. 1 exactly when every r_i and
    s_i have disjoint binary digits.  All other terms of the product
    have strictly lower excess.
    """
    n = max(len(R), len(S))
    Rp = R + (0,) * (n - len(R))
    Sp = S + (0,) * (n - len(S))
    coef = 1
    for r, s in zip(Rp, Sp):
        coef &= binom2(r + s, s)
    return coef, trim(r + s for r, s in zip(Rp, Sp))


# ---------------------------------------------------------------------------
# dual monomials and the coproduct


@dataclass(frozen=True)
class DualMonomial:
    """tau^c * tau(E) * xi(R) in the dual algebra, in reduced form.

    eps is a bitmask over i >= 0 (bit i <-> tau_i); rs[j] is the
    exponent of xi_{j+1}; tau_power is c.  Reduced means no tau_i
    appears squared.
    """

    eps: int
    rs: Idx
    tau_power: int = 0

    @property
    def bidegree(self) -> tuple[int, int]:
        d = 0
        w = 0
        e = self.eps
        i = 0
        while e:
            if e & 1:
                d += (1 << (i + 1)) - 1
                w += (1 << i) - 1
            e >>= 1
            i += 1
        for j, r in enumerate(self.rs, start=1):
            d += 2 * ((1 << j) - 1) * r
            w += ((1 << j) - 1) * r
        return d, w - self.tau_power

    def index(self) -> Idx:
        """The Milnor index S with s_i = eps_{i-1} + 2 r_i."""
        n = max(self.eps.bit_length(), len(self.rs))
        out = []
        for i in range(n):
            e = (self.eps >> i) & 1
            r = self.rs[i] if i < len(self.rs) else 0
            out.append(e + 2 * r)
        return trim(out)


def index_to_monomial(S: Idx) -> DualMonomial:
    eps = 0
    rs = []
    for i, s in enumerate(S):
        if s & 1:
            eps |= 1 << i
        rs.append(s >> 1)
    return DualMonomial(eps, trim(rs), 0)


def reduce_monomial(eps_exponents, rs, tau_power: int = 0) -> DualMonomial:
    """Apply tau_i^2 = tau xi_{i+1} until all exterior exponents are <= 1.

    ``eps_exponents`` is a sequence of nonnegative integers (exponent of
    tau_i at position i).  tau powers accumulate.
    """
    eps = 0
    rs = list(rs)
    c = tau_power
    for i, e in enumerate(eps_exponents):
        if e <= 0:
            continue
        half, rem = divmod(e, 2)
        if rem:
            eps |= 1 << i
        if half:
            while len(rs) <= i:
                rs.append(0)
            rs[i] += half
            c += half
    return DualMonomial(eps, trim(rs), c)


_Mono = tuple[int, Idx]  # (eps bitmask, xi exponents), tau power implicit


def _mono_mul(a: _Mono, b: _Mono) -> _Mono:
    """Product of reduced monomials, dropping the (determined) tau power."""
    e1, r1 = a
    e2, r2 = b
    common = e1 & e2
    n = max(len(r1), len(r2), common.bit_length())
    rs = [0] * n
    for i, r in enumerate(r1):
        rs[i] += r
    for i, r in enumerate(r2):
        rs[i] += r
    c = common
    while c:
        low = c & -c
        rs[low.bit_length() - 1] += 1
        c ^= low
    return (e1 ^ e2, trim(rs))


def _xi_mono(j: int, power: int) -> _Mono:
    """xi_j^power as a monomial (xi_0 = 1)."""
    if j == 0 or power == 0:
        return (0, ())
    rs = [0] * j
    rs[j - 1] = power
    return (0, tuple(rs))


def _delta_tau(i: int) -> list[tuple[_Mono, _Mono]]:
    """Delta(tau_i) = tau_i (x) 1 + sum_j xi_{i-j}^{2^j} (x) tau_j."""
    out = [((1 << i, ()), (0, ()))]
    for j in range(i + 1):
        out.append((_xi_mono(i - j, 1 << j), (1 << j, ())))
    return out


def _delta_xi_pow2(j: int, a: int) -> list[tuple[_Mono, _Mono]]:
    """Delta(xi_j^{2^a}) = sum_i xi_{j-i}^{2^{i+a}} (x) xi_i^{2^a}."""
    return [(_xi_mono(j - i, 1 << (i + a)), _xi_mono(i, 1 << a)) for i in range(j + 1)]


def _merge(cur: set, factor: list[tuple[_Mono, _Mono]]) -> set:
    out: set = set()
    for (l, r) in cur:
        for (fl, fr) in factor:
            key = (_mono_mul(l, fl), _mono_mul(r, fr))
            if key in out:
                out.discard(key)
            else:
                out.add(key)
    return out


def _mono_index(m: _Mono) -> Idx:
    e, rs = m
    n = max(e.bit_length(), len(rs))
    return trim(((e >> i) & 1) + 2 * (rs[i] if i < len(rs) else 0) for i in range(n))


@lru_cache(maxsize=None)
def _delta_pairs_motivic(T: Idx) -> frozenset[tuple[Idx, Idx]]:
    """Reduced-coproduct support of the dual monomial of T, as pairs of
    Milnor indices (left, right).  The tau power of each term is
    determined by weights, so only the parity of each pair is kept."""
    mono = index_to_monomial(T)
    cur = {((0, ()), (0, ()))}
    e = mono.eps
    i = 0
    while e:
        if e & 1:
            cur = _merge(cur, _delta_tau(i))
        e >>= 1
        i += 1
    for j, r in enumerate(mono.rs, start=1):
        a = 0
        while r:
            if r & 1:
                cur = _merge(cur, _delta_xi_pow2(j, a))
            r >>= 1
            a += 1
    return frozenset((_mono_index(l), _mono_index(r)) for (l, r) in cur)


@lru_cache(maxsize=None)
def _delta_pairs_classical(T: Idx) -> frozenset[tuple[Idx, Idx]]:
    cur = {((0, ()), (0, ()))}
    for j, r in enumerate(T, start=1):
        a = 0
        while r:
            if r & 1:
                cur = _merge(cur, _delta_xi_pow2(j, a))
            r >>= 1
            a += 1
    return frozenset((trim(l[1]), trim(r[1])) for (l, r) in cur)


@lru_cache(maxsize=None)
def coproduct_indices(T: Idx) -> tuple[tuple[int, Idx, Idx], ...]:
    """Coproduct of P^T in the Steenrod algebra, as (tau power, left,
    right) terms: the dual of multiplication in the dual algebra, where
    a product of basis monomials is tau^c times a single basis monomial.

    Governs diagonal actions on tensor products; for example
    psi(Sq^2) = Sq^2 (x) 1 + 1 (x) Sq^2 + tau Sq^1 (x) Sq^1.
    """
    d = index_degree(T)
    out = []
    for d1 in range(d + 1):
        for R in FULL_A.basis_degree(d1):
            mR = _index_to_mono_pair(R)
            for S in FULL_A.basis_degree(d - d1):
                mS = _index_to_mono_pair(S)
                e1, r1 = mR
                e2, r2 = mS
                c = bin(e1 & e2).count("1")
                prod = _mono_mul(mR, mS)
                if _mono_index(prod) == T:
                    out.append((c, R, S))
    return tuple(out)


def _index_to_mono_pair(S: Idx) -> _Mono:
    m = index_to_monomial(S)
    return (m.eps, m.rs)


def coproduct(m: DualMonomial) -> list[tuple[int, DualMonomial, DualMonomial]]:
    """Full reduced coproduct, as (tau_power, left, right) terms.

    This is the naive expansion used as the independent pairing oracle:
    factors are expanded one at a time and every term is re-reduced,
    with mod-2 collection at the end.
    """
    terms: list[tuple[int, list[int], Idx, int, list[int], Idx]] = [
        (m.tau_power, [], (), 0, [], ())
    ]
    factors: list[list[tuple[int, list[int], Idx, list[int], Idx]]] = []
    # each factor term: (tau add, left eps exps, left rs, right eps exps, right rs)
    e = m.eps
    i = 0
    while e:
        if e & 1:
            fac = [(0, [i], (), [], ())]
            for j in range(i + 1):
                fac.append((0, [], _xi_mono(i - j, 1 << j)[1], [j], ()))
            factors.append(fac)
        e >>= 1
        i += 1
    for j, r in enumerate(m.rs, start=1):
        a = 0
        while r:
            if r & 1:
                fac = []
                for k in range(j + 1):
                    fac.append(
                        (0, [], _xi_mono(j - k, 1 << (k + a))[1], [], _xi_mono(k, 1 << a)[1])
                    )
                factors.append(fac)
            r >>= 1
            a += 1
    expanded: list[tuple[int, tuple[int, ...], Idx, tuple[int, ...], Idx]] = [
        (m.tau_power, (), (), (), ())
    ]
    for fac in factors:
        nxt = []
        for (c, le, lr, re_, rr) in expanded:
            for (fc, fle, flr, fre, frr) in fac:
                nle = _add_exps(le, fle)
                nre = _add_exps(re_, fre)
                nlr = _add_rs(lr, flr)
                nrr = _add_rs(rr, frr)
                nxt.append((c + fc, nle, nlr, nre, nrr))
        expanded = nxt
    counts: dict[tuple[int, DualMonomial, DualMonomial], int] = {}
    for (c, le, lr, re_, rr) in expanded:
        left = reduce_monomial(le, lr)
        right = reduce_monomial(re_, rr)
        key = (c + left.tau_power + right.tau_power,
               DualMonomial(left.eps, left.rs, 0),
               DualMonomial(right.eps, right.rs, 0))
        counts[key] = counts.get(key, 0) + 1
    return sorted(
        (k for k, v in counts.items() if v % 2 == 1),
        key=lambda k: (k[0], k[1].eps, k[1].rs, k[2].eps, k[2].rs),
    )


def _add_exps(a, extra_positions) -> tuple[int, ...]:
    out = list(a)
    for p in extra_positions:
        while len(out) <= p:
            out.append(0)
        out[p] += 1
    return tuple(out)


def _add_rs(a: Idx, b: Idx) -> Idx:
    n = max(len(a), len(b))
    return tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


# ---------------------------------------------------------------------------
# basis enumeration


def _enumerate_indices(d: int, caps: tuple[int, ...] | None) -> list[Idx]:
    """All Milnor indices of degree d respecting per-position caps."""
    out: list[Idx] = []
    maxpos = 0
    while (1 << (maxpos + 1)) - 1 <= d:
        maxpos += 1
    if caps is not None:
        maxpos = min(maxpos, len(caps))

    def rec(pos: int, remaining: int, acc: list[int]):
        if pos == 0:
            if remaining == 0:
                out.append(trim(reversed(acc)))
            return
        unit = (1 << pos) - 1
        top = remaining // unit
        if caps is not None:
            top = min(top, caps[pos - 1])
        for s in range(top + 1):
            acc.append(s)
            rec(pos - 1, remaining - unit * s, acc)
            acc.pop()

    if d == 0:
        return [()]
    rec(maxpos, d, [])
    out.sort(key=lambda S: (index_weight(S), S))
    return out


class Algebra:
    """A profile of the motivic Steenrod algebra (or its classical shadow).

    Instances are stateless apart from caches and may be shared freely
    across threads; the product cache is a single dict whose writes are
    idempotent (last write wins with an identical value).
    """

    _instances: dict[str, "Algebra"] = {}

    def __init__(self, key: str):
        if key not in ("A", "A1", "A0", "classical"):
            raise ValueError(f"unknown algebra profile {key!r}")
        self.key = key
        self.motivic = key != "classical"
        if key == "A1":
            self.caps: tuple[int, ...] | None = (3, 1)
            self.gen_ks: tuple[int, ...] = (0, 1)
        elif key == "A0":
            self.caps = (1,)
            self.gen_ks = (0,)
        else:
            self.caps = None
            self.gen_ks = ()  # unbounded; use generators_for_degree
        self._basis: dict[int, tuple[Idx, ...]] = {}
        self._prod: dict[tuple[Idx, Idx], dict[Idx, int]] = {}
        self._fact: dict[Idx, tuple[tuple[int, tuple[int, ...]], ...]] = {}

    def __repr__(self):
        return f"Algebra({self.key!r})"

    @classmethod
    def get(cls, key: str) -> "Algebra":
        if key not in cls._instances:
            cls._instances[key] = Algebra(key)
        return cls._instances[key]

    # -- basis ------------------------------------------------------------

    def basis_degree(self, d: int) -> tuple[Idx, ...]:
        if d not in self._basis:
            self._basis[d] = tuple(_enumerate_indices(d, self.caps))
        return self._basis[d]

    def basis(self, max_degree: int) -> list[Idx]:
        out: list[Idx] = []
        for d in range(max_degree + 1):
            out.extend(self.basis_degree(d))
        return out

    def basis_bidegree(self, d: int, w: int) -> tuple[Idx, ...]:
        if not self.motivic:
            return self.basis_degree(d) if w == 0 else ()
        return tuple(S for S in self.basis_degree(d) if index_weight(S) == w)

    def weight(self, S: Idx) -> int:
        return index_weight(S) if self.motivic else 0

    def weight_range(self, d: int) -> tuple[int, int]:
        """(min, max) natural weight of degree-d basis elements."""
        if not self.motivic or d == 0:
            return (0, 0)
        ws = [index_weight(S) for S in self.basis_degree(d)]
        return (min(ws), max(ws)) if ws else (0, -1)

    def generators_for_degree(self, d: int) -> tuple[int, ...]:
        """k values with Sq^{2^k} usable below internal degree d."""
        if self.gen_ks:
            return self.gen_ks
        ks = []
        k = 0
        while (1 << k) <= d:
            ks.append(k)
            k += 1
        return tuple(ks)

    def contains_index(self, S: Idx) -> bool:
        if self.caps is None:
            return True
        if len(S) > len(self.caps):
            return False
        return all(s <= c for s, c in zip(S, self.caps))

    # -- products ----------------------------------------------------------

    def product_indices(self, S1: Idx, S2: Idx) -> dict[Idx, int]:
        """P^{S1} P^{S2} as {T: tau exponent}; memoized."""
        key = (S1, S2)
        cached = self._prod.get(key)
        if cached is not None:
            return cached
        if self.key in ("A1", "A0"):
            # subalgebras share the ambient product
            out = Algebra.get("A").product_indices(S1, S2)
            for T in out:
                if not self.contains_index(T):
                    raise AssertionError(
                        f"product of {self.key} basis elements left the subalgebra: "
                        f"P{S1} * P{S2} hits P{T}"
                    )
        else:
            d = index_degree(S1) + index_degree(S2)
            full = Algebra.get("A") if self.motivic else Algebra.get("classical")
            out = {}
            if self.motivic:
                w12 = index_weight(S1) + index_weight(S2)
                pair = (S1, S2)
                for T in full.basis_degree(d):
                    if pair in _delta_pairs_motivic(T):
                        c = w12 - index_weight(T)
                        assert c >= 0, "coproduct pairing produced a negative tau power"
                        out[T] = c
            else:
                pair = (S1, S2)
                for T in full.basis_degree(d):
                    if pair in _delta_pairs_classical(T):
                        out[T] = 0
        self._prod[key] = out
        return out

    # -- factorization into generator strings -------------------------------

    def factor_into_generators(self, S: Idx) -> tuple[tuple[int, tuple[int, ...]], ...]:
        """Express P^S as sum of tau^c Sq^{2^{k1}}...Sq^{2^{km}} strings.

        Used to let arbitrary Milnor basis elements act on module
        presentations that only store the action of the algebra
        generators.  Returns ((tau_power, (k1,...,km)), ...) with mod-2
        multiplicity already collected.
        """
        if S == ():
            return ((0, ()),)
        cached = self._fact.get(S)
        if cached is not None:
            return cached
        d, w = index_bidegree(S)
        if not self.motivic:
            w = 0
        # slice coordinates at (d, w): pairs (T, c) with c = w - wt(T) >= 0
        coords: list[Idx] = [T for T in self.basis_degree(d) if self.weight(T) <= w]
        coord_pos = {T: i for i, T in enumerate(coords)}
        rows: list[int] = []
        tags: list[tuple[int, int, Idx]] = []  # (k, shift, S')
        for k in self.generators_for_degree(d):
            dk = 1 << k
            if dk > d:
                continue
            for Sp in self.basis_degree(d - dk):
                prod = self.product_indices(sq_index(k), Sp)
                if not prod:
                    continue
                wrow = self.weight(sq_index(k)) + self.weight(Sp)
                shift = w - wrow
                if shift < 0:
                    continue
                vec = 0
                for T, c in prod.items():
                    vec |= 1 << coord_pos[T]
                    del c  # tau power is determined by T's weight
                rows.append(vec)
                tags.append((k, shift, Sp))
        target = 1 << coord_pos[S]
        combo = f2.solve(rows, len(coords), target)
        if combo is None:
            raise AssertionError(f"P{S} not expressible through algebra generators")
        counts: dict[tuple[int, tuple[int, ...]], int] = {}
        i = 0
        c = combo
        while c:
            if c & 1:
                k, shift, Sp = tags[i]
                for (c2, string) in self.factor_into_generators(Sp):
                    key2 = (shift + c2, (k,) + string)
                    counts[key2] = counts.get(key2, 0) + 1
            c >>= 1
            i += 1
        out = tuple(sorted(k for k, v in counts.items() if v % 2 == 1))
        self._fact[S] = out
        return out


FULL_A = Algebra.get("A")
A1 = Algebra.get("A1")
A0 = Algebra.get("A0")
CLASSICAL = Algebra.get("classical")


def basis(profile: str, max_degree: int) -> list[Idx]:
    """Spec-level basis enumeration for {A, A1, A0} (or classical)."""
    return Algebra.get(profile).basis(max_degree)


# ---------------------------------------------------------------------------
# elements


class MilnorElement:
    """A homogeneous M2-linear combination of Milnor basis elements.

    terms maps an index S to the tau exponent c of its coefficient
    tau^c; homogeneity forces a single power per index.
    """

    __slots__ = ("terms", "bidegree")

    def __init__(self, terms: dict[Idx, int]):
        clean = {S: c for S, c in terms.items()}
        bide = None
        for S, c in clean.items():
            if c < 0:
                raise ValueError("negative tau power")
            d, w = index_bidegree(S)
            this = (d, w + c)
            if bide is None:
                bide = this
            elif bide != this:
                raise ValueError(f"inhomogeneous element: {bide} vs {this}")
        self.terms = clean
        self.bidegree = bide

    # -- constructors

    @classmethod
    def zero(cls) -> "MilnorElement":
        return cls({})

    @classmethod
    def unit(cls) -> "MilnorElement":
        return cls({(): 0})

    @classmethod
    def from_index(cls, S: Idx, tau_power: int = 0) -> "MilnorElement":
        return cls({trim(S): tau_power})

    # -- structure

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def excess(self) -> int:
        return max((sum(S) for S in self.terms), default=0)

    def __eq__(self, other):
        return isinstance(other, MilnorElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "MilnorElement") -> "MilnorElement":
        out = dict(self.terms)
        for S, c in other.terms.items():
            if S in out:
                if out[S] != c:
                    raise ValueError("inhomogeneous sum")
                del out[S]
            else:
                out[S] = c
        return MilnorElement(out)

    def tau_times(self, k: int) -> "MilnorElement":
        return MilnorElement({S: c + k for S, c in self.terms.items()})

    def __mul__(self, other: "MilnorElement") -> "MilnorElement":
        out: dict[Idx, int] = {}
        for S1, c1 in self.terms.items():
            for S2, c2 in other.terms.items():
                for T, c in FULL_A.product_indices(S1, S2).items():
                    ctot = c + c1 + c2
                    if T in out:
                        if out[T] != ctot:
                            raise AssertionError("inhomogeneous product accumulation")
                        del out[T]
                    else:
                        out[T] = ctot
        return MilnorElement(out)

    def __repr__(self):
        return f"MilnorElement({format_element(self)!r})"


def multiply(a: MilnorElement, b: MilnorElement) -> MilnorElement:
    """Product in A (memoized fast path)."""
    return a * b


def multiply_by_pairing(a: MilnorElement, b: MilnorElement) -> MilnorElement:
    """Independent oracle: enumerate dual monomials of the product
    bidegree, expand their coproducts naively, and pair.

    Used in tests against multiply(); intentionally avoids the cached
    pair tables.
    """
    if a.is_zero() or b.is_zero():
        return MilnorElement.zero()
    d = a.bidegree[0] + b.bidegree[0]
    w = a.bidegree[1] + b.bidegree[1]
    out: dict[Idx, int] = {}
    for T in FULL_A.basis_degree(d):
        wT = index_weight(T)
        if wT > w:
            continue
        acc = 0  # parity of the pairing <a (x) b, Delta m_T>
        for (c, left, right) in coproduct(index_to_monomial(T)):
            cl = a.terms.get(left.index())
            cr = b.terms.get(right.index())
            if cl is None or cr is None:
                continue
            # pairing value tau^{c + cl + cr}; homogeneity pins it
            assert c + cl + cr == w - wT
            acc ^= 1
        if acc:
            out[T] = w - wT
    return MilnorElement(out)


# ---------------------------------------------------------------------------
# textual syntax: P(3,1), t^2*P(2), sums with +


_TERM_RE = re.compile(
    r"^\s*(?:t(?:\^(\d+))?\s*\*\s*)?P\(\s*([0-9,\s]*)\)\s*$"
)


def format_element(e: MilnorElement) -> str:
    """Canonical rendering; parse(format(x)) == x bit-exactly."""
    if e.is_zero():
        return "0"
    keys = sorted(e.terms, key=lambda S: (index_weight(S), S))
    parts = []
    for S in keys:
        c = e.terms[S]
        p = "P(" + ",".join(str(s) for s in S) + ")"
        if c == 0:
            parts.append(p)
        elif c == 1:
            parts.append(f"t*{p}")
        else:
            parts.append(f"t^{c}*{p}")
    return " + ".join(parts)


def parse_element(text: str) -> MilnorElement:
    text = text.strip()
    if text == "0":
        return MilnorElement.zero()
    terms: dict[Idx, int] = {}
    for chunk in text.split("+"):
        m = _TERM_RE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse Milnor term {chunk!r}")
        cstr, body = m.groups()
        c = int(cstr) if cstr is not None else (1 if "t" in chunk.split("P")[0] else 0)
        S = trim(int(x) for x in body.replace(" ", "").split(",") if x != "")
        if S in terms:
            raise ValueError(f"repeated term P{S}")
        terms[S] = c
    return MilnorElement(terms)


# ---------------------------------------------------------------------------
# Prop 4.2 verification: A is free as a right A(1)-module


@dataclass(frozen=True)
class A1FreenessReport:
    ok: bool
    max_degree: int
    checked_bidegrees: int
    first_failure: tuple[int, int] | None

    def summary(self) -> str:
        if self.ok:
            return (
                f"right-A(1) basis map is an isomorphism in every bidegree "
                f"through degree {self.max_degree} ({self.checked_bidegrees} slices)"
            )
        return f"FAILED at bidegree {self.first_failure}"


def complement_basis_degree(d: int) -> tuple[Idx, ...]:
    """Indices of degree d with s1 = 0 mod 4 and s2 = 0 mod 2: the
    M2-basis of the complement M with M (x) A(1) ~ A."""
    out = []
    for S in FULL_A.basis_degree(d):
        s1 = S[0] if len(S) >= 1 else 0
        s2 = S[1] if len(S) >= 2 else 0
        if s1 % 4 == 0 and s2 % 2 == 0:
            out.append(S)
    return tuple(out)


def verify_right_a1_free(max_degree: int) -> A1FreenessReport:
    """Check that multiplication M (x)_{M2} A(1) -> A is a bidegree-wise
    isomorphism through the given degree, by rank computation.

    Slices with weight above the top natural weight of the degree are
    tau-shifted copies of the top slice, so checking the natural window
    suffices.
    """
    checked = 0
    for d in range(max_degree + 1):
        lo, hi = FULL_A.weight_range(d)
        for w in range(lo, hi + 1):
            cols = [T for T in FULL_A.basis_degree(d) if index_weight(T) <= w]
            pos = {T: i for i, T in enumerate(cols)}
            rows = []
            for dm in range(d + 1):
                for R in complement_basis_degree(dm):
                    wR = index_weight(R)
                    for Sa in A1.basis_degree(d - dm):
                        wa = index_weight(Sa)
                        if wR + wa > w:
                            continue
                        vec = 0
                        for T, c in FULL_A.product_indices(R, Sa).items():
                            vec |= 1 << pos[T]
                        rows.append(vec)
            checked += 1
            if len(rows) != len(cols) or f2.rank(rows, max(1, len(cols))) != len(cols):
                return A1FreenessReport(False, max_degree, checked, (d, w))
    return A1FreenessReport(True, max_degree, checked, None)
