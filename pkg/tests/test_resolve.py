import random

import pytest

from motivic_ext import milnor, resolve
from motivic_ext.amodule import (
    ActionEntry,
    Generator,
    ModulePresentation,
    free_module_presentation,
    preset,
)
from motivic_ext.milnor import Algebra, MilnorElement
from motivic_ext.resolve import (
    Resolution,
    SliceContext,
    minimal_resolution,
    periodic_a1_resolution,
    resolve_with_atilde,
)

A = Algebra.get("A")


def m2_mod_tau(truncation):
    gens = (Generator("i", 0, 0, 1),)
    return ModulePresentation("M2/tau", A, truncation, gens, {})


def test_m2_stage_one_generators():
    # indecomposables of A below degree 12: Sq1, Sq2, Sq4, Sq8
    res = minimal_resolution(preset("M2", 12), "A", max_t=12, max_f=1)
    gens = [(g.t, g.w) for g in res.stages[1].gens]
    assert gens == [(1, 0), (2, 1), (4, 2), (8, 4)]


def test_free_module_resolves_instantly():
    m = free_module_presentation(A, [("i", 0, 0)], 10)
    res = minimal_resolution(m, "A", max_t=10, max_f=3)
    assert len(res.stages[0].gens) == 1
    assert all(len(res.stages[f].gens) == 0 for f in (1, 2, 3))


def test_m2_mod_tau_resolution_has_tau_strand():
    res = minimal_resolution(m2_mod_tau(10), "A", max_t=10, max_f=3)
    # stage 1 picks up the tau generator at (0, 1) alongside Sq^{2^k}
    s1 = sorted((g.t, g.w) for g in res.stages[1].gens)
    assert (0, 1) in s1
    assert (1, 0) in s1
    # the differentials keep alternating through bare tau-power entries
    for f in (2, 3):
        assert any(
            S == () and c >= 1
            for elt in res.stages[f].diff.values()
            for (pg, S), c in elt.items()
        ), f"no bare tau entry at stage {f}"


def test_d_squared_is_zero_by_element_arithmetic():
    res = minimal_resolution(preset("A0", 14), "A", max_t=14, max_f=4)
    for f in range(2, 5):
        for gid, elt in res.stages[f].diff.items():
            acc = {}
            for (pg, S), c in elt.items():
                for (qg, V), c2 in res.stages[f - 1].diff[pg].items():
                    for T, c3 in A.product_indices(S, V).items():
                        key = (qg, T)
                        tot = c + c2 + c3
                        if key in acc:
                            assert acc[key] == tot
                            del acc[key]
                        else:
                            acc[key] = tot
            assert not acc, f"d^2 != 0 at stage {f}, generator {gid}"


def test_exactness_audit_and_recheck():
    res = minimal_resolution(preset("A0", 12), "A", max_t=12, max_f=3)
    assert res.audit["exactness_ok"]
    ctx = SliceContext(res)
    for f in range(0, 3):
        assert ctx.check_exact_at(f)


def test_minimality_no_unit_entries():
    res = minimal_resolution(preset("M2", 14), "A", max_t=14, max_f=4)
    for f in range(1, 5):
        for gid, elt in res.stages[f].diff.items():
            for (pg, S), c in elt.items():
                assert not (S == () and c == 0), "unit coefficient in differential"


def test_stability_under_larger_bounds():
    small = minimal_resolution(preset("M2", 10), "A", max_t=10, max_f=3)
    large = minimal_resolution(preset("M2", 14), "A", max_t=14, max_f=4)
    for f in range(4):
        sg = [(g.t, g.w) for g in small.stages[f].gens]
        lg = [(g.t, g.w) for g in large.stages[f].gens if g.t <= 10]
        assert sg == lg


def test_resolution_over_a1():
    # Ext_{A(1)}(M2, M2) begins with h0 at (1,0) and h1 at (2,1)
    res = minimal_resolution(preset("M2", 10).restricted(Algebra.get("A1")), "A1",
                             max_t=10, max_f=2)
    s1 = sorted((g.t, g.w) for g in res.stages[1].gens)
    assert s1 == [(1, 0), (2, 1)]


def test_classical_resolution_m2():
    cl = Algebra.get("classical")
    m = ModulePresentation("F2", cl, 14, (Generator("i", 0, 0),), {})
    res = minimal_resolution(m, cl, max_t=14, max_f=3)
    s1 = sorted(g.t for g in res.stages[1].gens)
    assert s1 == [1, 2, 4, 8]
    # classical Ext^{2} generators: degrees 2, 4, 5, 8, 9, 10 up to t=14 hold
    s2 = sorted(g.t for g in res.stages[2].gens)
    assert s2[:3] == [2, 4, 5]


# -- periodic resolution -------------------------------------------------------


def test_periodic_resolution_formulas_and_exactness():
    res, report = periodic_a1_resolution(4)
    assert report.d_squared_zero
    assert report.exact_through >= 3
    assert report.kernel_is_suspension
    assert report.ok
    # the stated differential: d(x_1) = Sq2 x_0 + tau y_0
    assert res.stages[1].diff[0] == {(0, (2,)): 0, (1, ()): 1}
    assert res.stages[1].diff[1] == {(0, (1, 1)): 0, (1, (2,)): 0}
    # generator bidegrees |x_n| = (2n, n), |y_n| = (2n+2, n)
    for n in range(1, 5):
        assert [(g.t, g.w) for g in res.stages[n].gens] == [(2 * n, n), (2 * n + 2, n)]


# -- twisted-cell resolution ---------------------------------------------------


def test_atilde_pairing_fires_early_for_a0():
    # K_0 has no indecomposable pair (Sq2 of the Sq2-generator is tau
    # times a decomposable), so the first twisted block appears in R_2,
    # covering K_1.  From there on every stage carries one.
    res = resolve_with_atilde(preset("A0", 16), max_t=16, max_f=3)
    assert res.stages[1].pairs == ()
    assert res.stages[2].pairs, "expected a twisted pair at stage 2"
    a_gid, b_gid = res.stages[2].pairs[0]
    ga = next(g for g in res.stages[2].gens if g.gid == a_gid)
    gb = next(g for g in res.stages[2].gens if g.gid == b_gid)
    assert (gb.t, gb.w) == (ga.t + 2, ga.w)
    assert ga.kind == "Aa" and gb.kind == "Ab"
    assert res.stages[3].pairs
    assert res.audit["exactness_ok"]


def test_atilde_resolution_exactness_recheck():
    res = resolve_with_atilde(preset("A0", 14), max_t=14, max_f=2)
    ctx = SliceContext(res)
    for f in range(0, 2):
        assert ctx.check_exact_at(f)


# -- cache ------------------------------------------------------------------------


def test_cache_round_trip_and_resume(tmp_path):
    cache = str(tmp_path)
    res1 = minimal_resolution(preset("A0", 11), "A", max_t=11, max_f=3,
                              cache_dir=cache)
    msgs = []
    res2 = minimal_resolution(preset("A0", 11), "A", max_t=11, max_f=3,
                              cache_dir=cache, on_progress=msgs.append)
    assert any("loaded" in m for m in msgs)
    for f in range(4):
        assert [(g.t, g.w) for g in res1.stages[f].gens] == [
            (g.t, g.w) for g in res2.stages[f].gens
        ]
        assert res1.stages[f].diff == res2.stages[f].diff


def test_cache_corruption_triggers_recompute(tmp_path):
    import glob
    import os

    cache = str(tmp_path)
    minimal_resolution(preset("A0", 10), "A", max_t=10, max_f=2, cache_dir=cache)
    victim = sorted(glob.glob(os.path.join(cache, "*", "stage_1.json")))[0]
    with open(victim) as fh:
        doc = fh.read()
    assert '"A"' in doc
    with open(victim, "w") as fh:
        fh.write(doc.replace('"A"', '"B"', 1))
    msgs = []
    res = minimal_resolution(preset("A0", 10), "A", max_t=10, max_f=2,
                             cache_dir=cache, on_progress=msgs.append)
    # stage 0 still loads; the corrupted stage 1 is recomputed
    assert any("loaded" in m for m in msgs if "stage 0" in m)
    assert all("loaded" not in m for m in msgs if "stage 1" in m)
    assert res.audit["exactness_ok"]


def test_cache_ignores_other_bounds(tmp_path):
    cache = str(tmp_path)
    minimal_resolution(preset("M2", 8), "A", max_t=8, max_f=2, cache_dir=cache)
    msgs = []
    minimal_resolution(preset("M2", 10), "A", max_t=10, max_f=2,
                       cache_dir=cache, on_progress=msgs.append)
    assert all("loaded" not in m for m in msgs)
