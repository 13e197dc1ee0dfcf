import pytest
import sympy as sp

from courantred import branes as br
from courantred.errors import HypothesisError
from courantred.forms import FormField
from courantred.scene import load_scene

import oracles as O


def _brane(name, patch="C", B="B"):
    sc = load_scene(name)
    p = sc.patches[patch]
    return sc, br.BraneData(p, sc.forms[B] if B else FormField(sc.ambient, 2))


def test_tau_frame_is_lagrangian_over_C():
    sc, bd = _brane("sympbrane")
    members = bd.L.ambient_members()
    # five coordinate fields of C plus the conormal dy3
    assert len(members) == 6
    assert br.check_generalized_submanifold(bd).ok


def test_tau_rejects_mismatched_F():
    sc, bd = _brane("sympbrane")
    with pytest.raises(HypothesisError):
        br.tau_CF(bd.patch, bd.F.scale(2), sc.forms["B"])


def test_generalized_submanifold_needs_closed_F():
    sc = load_scene("cf")
    f = sc.field
    B = FormField.from_names(sc.ambient, 2, {"x1 y1": f.var("x2")})
    rep = br.check_generalized_submanifold(br.BraneData(sc.patches["C"], B))
    assert rep.status_of("i*H + dF = 0") == "fail"


def test_swsign_matches_oracle_brackets():
    sc, bd = _brane("sympbrane")
    xs = sp.symbols("x1 y1 x2 y2 x3 y3")
    Bs = {k: O.to_sympy(v) for k, v in sc.forms["B_other"].comps.items()}
    bd2 = br.BraneData(bd.patch, sc.forms["B_other"], bd.F)
    # members e^B d_c for the chart coordinates (x3, x1, y1, x2, y2) of C
    chart = [xs.index(sp.Symbol(c)) for c in bd2.patch.chart.coords]
    on_C = {xs[5]: 0}

    def member(c):
        vec = [sp.Integer(1 if i == c else 0) for i in range(6)]
        return vec, [O.form_value(Bs, (c, k)) for k in range(6)]

    dF = O.d_form({k: O.to_sympy(v) for k, v in bd2.F.comps.items()}, sp.symbols(" ".join(bd2.patch.chart.coords)), 2)
    for a in range(5):
        for b in range(5):
            br_ab = O.dorfman(member(chart[a]), member(chart[b]), xs)
            for c in range(5):
                lhs = 2 * O.pairing(br_ab, member(chart[c])).subs(on_C)
                assert sp.simplify(lhs - O.form_value(dF, (a, b, c))) == 0
    res = br.swsign_residuals(bd2)
    assert all(sc.field.is_zero(v) for v in res.values())


def test_brane_and_not_brane():
    sc = load_scene("c2-brane")
    bd = br.BraneData(sc.patches["line"], FormField(sc.ambient, 2))
    assert br.check_brane(bd, sc.gcs["J"]).ok
    sc, bd = _brane("cylinder")
    assert not br.check_brane(bd, sc.gcs["J"]).ok
    assert br.check_weak_brane(bd, sc.gcs["J"]).ok


def test_weak_brane_rejects_odd_dimensional_complex_hypersurface():
    sc = load_scene("c2-brane")
    bd = br.BraneData(sc.patches["hyperplane"], FormField(sc.ambient, 2))
    assert not br.check_weak_brane(bd, sc.gcs["J0"]).ok


def test_characteristic_rank_jumps_at_origin():
    sc = load_scene("c2-brane")
    ranks = [r for _, r in br.characteristic_rank(sc.gcs["J"], sc.patches["line"])]
    assert ranks[:2] == [0, 2]


def test_pre_poisson():
    sc = load_scene("prepoisson")
    for p in ("point", "hyperplane"):
        patch = sc.patches[p]
        L = br.BraneData(patch, FormField(sc.ambient, 2)).L
        assert br.pre_poisson_check(L, sc.gcs["Js"], patch).ok, p
    sc = load_scene("c2-brane")
    patch = sc.patches["line"]
    L = br.BraneData(patch, FormField(sc.ambient, 2)).L
    rep = br.pre_poisson_check(L, sc.gcs["J"], patch)
    assert rep.status_of("characteristic distribution sharp N*C cap TC constant rank") == "fail"


def test_cosymplectic_restriction():
    sc = load_scene("cosympl")
    J = sc.gcs["Js"]
    assert br.cosymplectic_check(J, sc.patches["plane"]).ok
    assert not br.cosymplectic_check(J, sc.patches["hyperplane"]).ok
    red, rep = br.cosymplectic_restrict(J, sc.patches["plane"])
    assert rep.ok
    x1 = sp.Symbol("x1")
    W = sp.Matrix([[0, 1 + x1**2], [-(1 + x1**2), 0]])
    Pi = O.bivector_from_symplectic(W)
    got = red.gcs.Pi.table()
    assert all(sp.simplify(O.to_sympy(got[i][j]) - Pi[i, j]) == 0 for i in range(2) for j in range(2))
    with pytest.raises(HypothesisError):
        br.cosymplectic_restrict(J, sc.patches["hyperplane"])


def test_extension_independence():
    sc, bd = _brane("sympbrane")
    assert br.extension_independence(bd, sc.gcs["Js"], sc.forms["B_other"]).ok


def test_symplectic_brane_reduction_against_oracle():
    sc, bd = _brane("sympbrane")
    rb = br.brane_reduce(bd, sc.gcs["Js"], require_brane=True)
    assert rb.report.ok
    patch = bd.patch
    from courantred.reduction import descend_form
    om, ok = descend_form(patch, patch.pullback(sc.forms["omega"]), rb.report, "omega")
    assert ok
    q = patch.qchart.dim
    W = sp.Matrix(q, q, lambda i, j: O.to_sympy(om[i, j]))
    F = sp.Matrix(q, q, lambda i, j: O.to_sympy(rb.Fbar[i, j]))
    # I X is defined by i_{IX} omega = -i_X F
    I_ref = -(W.T).inv() * F.T
    got = sp.Matrix(q, q, lambda i, j: O.to_sympy(rb.I[i][j]))
    assert sp.simplify(got - I_ref) == sp.zeros(q, q)
    assert br.holomorphic_symplectic_check(rb.Fbar, om, rb.I, patch.qsamples).ok
    assert br.gauge_path_check(bd, sc.gcs["Js"], sc.forms["Bg"]).ok


def test_brane_reduce_refuses_non_weak_brane():
    sc = load_scene("c2-brane")
    bd = br.BraneData(sc.patches["hyperplane"], FormField(sc.ambient, 2))
    with pytest.raises(HypothesisError):
        br.brane_reduce(bd, sc.gcs["J0"])
