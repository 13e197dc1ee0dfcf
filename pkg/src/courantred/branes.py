"""Generalized submanifolds, branes and weak branes in the split model, and their reduction.

A brane datum is a patch of C together with a 2-form B on the ambient chart;
F is its pullback to C and L = tau_C^F is framed by
``{e^B T_c : c chart coordinate} + {dg_i}``. For a weak brane the reduction
uses K = N*C + J N*C and the gauged frame ``{e^B T_v, eta_v}``; in that frame
the reduced structure is the pushforward of the -B transformed J.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .courant import GCSMatrix, GenSection, gauge_transform, gauged_blocks, pairing, twisted_bracket
from .errors import HypothesisError
from .forms import FormField
from .linalg import PointSubspace, det_point, join, meet, sym_inverse
from .patch import BracketCache, FramedSubbundle, bracket_along
from .reduction import (_points, auto_basic_frame, descend_form, reduce_courant, reduce_dirac,
                        reduce_gcs)
from .report import Report


@dataclass
class BraneData:
    patch: object
    B: FormField
    F: FormField = None
    L: FramedSubbundle = None

    def __post_init__(self):
        pulled = self.patch.pullback(self.B)
        if self.F is None:
            self.F = pulled
        elif not self.F.equals(pulled):
            raise HypothesisError("i*B differs from F")
        if self.L is None:
            self.L = tau_CF(self.patch, self.F, self.B)

    @property
    def field(self):
        return self.patch.field


@dataclass
class ReducedBrane:
    reduced: object
    report: Report
    Lbar: list = None
    Fbar: FormField = None
    I: list = None
    Pi: FormField = None
    untwisted: GCSMatrix = None
    extras: dict = dc_field(default_factory=dict)


def tau_CF(patch, F, B):
    """Frame of tau_C^F: e^B of the coordinate fields of C, then the conormal frame."""
    if not patch.pullback(B).equals(F):
        raise HypothesisError("i*B differs from F")
    members = []
    for c in patch.chart.coords:
        T = patch.T.get(c)
        if T is None:
            raise HypothesisError(f"no ambient coordinate field for {c!r}")
        members.append(gauge_transform(T, B))
    members += patch.conormal_frame()
    return FramedSubbundle("tau_C^F", members, patch.ambient.dim)


def _pull_H(patch, H):
    ch = patch.chart
    if H is None:
        return FormField(ch, 3)
    return patch.pullback(H)


def check_generalized_submanifold(bd, H=None):
    """i*H + dF = 0 on the chart of C; also verifies L is Lagrangian with pi(L) = TC."""
    patch = bd.patch
    f = patch.field
    rep = Report(f"generalized submanifold {patch.name}")
    res = _pull_H(patch, H) + bd.F.d()
    rep.add("i*H + dF = 0", res.is_zero(), "" if res.is_zero() else f"residual {res.items_by_name()}")
    rL = bd.L.restricted(patch)
    iso = all(f.is_zero(pairing(a, b)) for i, a in enumerate(rL) for b in rL[i:])
    rep.add("tau_C^F isotropic", iso)
    n = patch.ambient.dim
    ranks = {bd.L.at(patch, p).rank for p in patch.samples}
    rep.add("tau_C^F has rank n at samples", ranks == {n}, f"ranks {sorted(ranks)}")
    return rep


def swsign_residuals(bd, H=None):
    """2<[e_a,e_b],e_c> - (i*H + dF)(d_a,d_b,d_c) for the chart-coordinate members of tau_C^F."""
    patch = bd.patch
    ch = patch.chart
    target = _pull_H(patch, H) + bd.F.d()
    members = [m for m in bd.L.ambient_members()[:ch.dim]]
    out = {}
    cache = {}
    for a in range(ch.dim):
        for b in range(ch.dim):
            if (a, b) not in cache:
                cache[(a, b)] = patch.restrict_section(twisted_bracket(members[a], members[b], H))
            for c in range(ch.dim):
                lhs = 2 * pairing(cache[(a, b)], patch.restrict_section(members[c]))
                out[(a, b, c)] = lhs - target[a, b, c]
    return out


def check_brane(bd, J):
    """J maps tau_C^F into itself at every sample."""
    patch = bd.patch
    rep = Report(f"brane {patch.name}")
    Jr = J.substitute(patch.embedding)
    rL = bd.L.restricted(patch)
    images = [Jr.apply(s) for s in rL]
    bad = []
    for p in patch.samples:
        Lp = bd.L.at(patch, p)
        for i, img in enumerate(images):
            if not Lp.contains(img.at(p)):
                bad.append((i, p))
                break
    rep.add("J(L) = L at samples", not bad,
            f"fails at {len(bad)} of {len(patch.samples)} samples" if bad else "")
    return rep


def K_of(bd, J):
    """K = N*C + J N*C, framed by dg_i and J dg_i (rank computed at the first sample)."""
    patch = bd.patch
    nc = patch.conormal_frame()
    members = nc + [J.apply(s) for s in nc]
    p0 = patch.samples[0]
    rank = PointSubspace(2 * patch.ambient.dim,
                         [patch.restrict_section(m).at(p0) for m in members]).rank
    # drop dependent J dg_i so that the frame is a frame
    keep = list(nc)
    for m in members[len(nc):]:
        trial = keep + [m]
        r = PointSubspace(2 * patch.ambient.dim, [patch.restrict_section(x).at(p0) for x in trial]).rank
        if r == len(trial):
            keep.append(m)
    return FramedSubbundle("K = N*C + J N*C", keep, rank)


def characteristic_rank(J, patch):
    """Rank of sharp(N*C) at each sample, as a list of (point, rank)."""
    f = patch.field
    n = patch.ambient.dim
    vecs = [J.apply(s).vec for s in patch.conormal_frame()]
    vecs = [[patch.restrict(x) for x in v] for v in vecs]
    out = []
    for p in patch.samples:
        out.append((p, PointSubspace(n, [[f.evaluate(x, p) for x in v] for v in vecs]).rank))
    return out


def modified_A(J, B):
    """A + Pi B as an ambient table (row = component, column = input direction)."""
    return [list(r) for r in gauged_blocks(J, B).A]


def check_weak_brane(bd, J, H=None):
    patch = bd.patch
    f = patch.field
    amb = patch.ambient
    rep = Report(f"weak brane {patch.name}")
    # coisotropic: sharp N*C tangent to C
    sharp = [J.apply(s) for s in patch.conormal_frame()]
    not_tan = [i for i, s in enumerate(sharp) if patch.chart_vector_of([patch.restrict(x) for x in s.vec]) is None]
    rep.add("C coisotropic (sharp N*C in TC)", not not_tan, f"conormal members {not_tan}" if not_tan else "")
    # (A + Pi B) preserves TC
    Jt = gauged_blocks(J, bd.B)
    At = Jt.A
    bad = []
    for c in patch.chart.coords:
        T = patch.T[c]
        img = [sum((At[i][j] * T.vec[j] for j in range(amb.dim) if T.vec[j] and At[i][j]), f.zero)
               for i in range(amb.dim)]
        if patch.chart_vector_of([patch.restrict(x) for x in img]) is None:
            bad.append(c)
    rep.add("A + Pi B preserves TC", not bad, f"images of d/d{bad} leave TC" if bad else "")
    rep.outputs["A + Pi B"] = [list(r) for r in At]
    # descent of dF + i*H along the leaves
    three = _pull_H(patch, H) + bd.F.d()
    _, ok = descend_form(patch, three, rep, "dF + i*H")
    # direct form of the definition
    K = K_of(bd, J)
    rep.outputs["K rank"] = K.rank
    pts = _points(patch, K)
    inL = True
    for pd in pts:
        Lp = bd.L.at(patch, pd.p)
        for s in sharp:
            if not Lp.contains(patch.restrict_section(s).at(pd.p)):
                inL = False
    rep.add("J(N*C) in L at samples", inL)
    cache = BracketCache(H)
    bad_kl = []
    for i, k in enumerate(K.frame):
        for j, l in enumerate(bd.L.frame):
            try:
                br = bracket_along(patch, k, l, cache)
            except HypothesisError:
                bad_kl.append((i, j))
                continue
            for pd in pts:
                if not bd.L.at(patch, pd.p).contains(br.at(pd.p)):
                    bad_kl.append((i, j))
                    break
    rep.add("[K, L] in L at samples", not bad_kl, f"{bad_kl[:4]}" if bad_kl else "")
    return rep


def pushforward_blocks(bd, J):
    """Reduced blocks as pushforwards of (A+Pi B)|TC, Pi and i*(omega - B Pi B - BA - A*B)."""
    patch = bd.patch
    f = patch.field
    amb = patch.ambient
    q = len(patch.quotient)
    Jt = gauged_blocks(J, bd.B)
    At = Jt.A
    A = [[f.zero] * q for _ in range(q)]
    for j, v in enumerate(patch.quotient):
        T = patch.T[v]
        img = [sum((At[i][k] * T.vec[k] for k in range(amb.dim) if T.vec[k] and At[i][k]), f.zero)
               for i in range(amb.dim)]
        w = patch.chart_vector_of([patch.restrict(x) for x in img])
        if w is None:
            raise HypothesisError("A + Pi B does not preserve TC")
        for i, pos in enumerate(patch.quotient_positions()):
            A[i][j] = w[pos]
    Pi = [[f.zero] * q for _ in range(q)]
    om = [[f.zero] * q for _ in range(q)]
    for a, v in enumerate(patch.quotient):
        for b, w in enumerate(patch.quotient):
            ev, ew = patch.eta[v].form, patch.eta[w].form
            Pi[a][b] = patch.restrict(sum((ev[i] * ew[j] * Jt.Pi[i, j] for i in range(amb.dim)
                                           for j in range(amb.dim) if ev[i] and ew[j]), f.zero))
            Tv, Tw = patch.T[v].vec, patch.T[w].vec
            om[a][b] = patch.restrict(sum((Tv[i] * Tw[j] * Jt.omega[i, j] for i in range(amb.dim)
                                           for j in range(amb.dim) if Tv[i] and Tw[j]), f.zero))
    out = {"A": A, "Pi": Pi, "omega": om}
    for k, tab in out.items():
        for r in tab:
            for x in r:
                if not patch.is_leaf_independent(x):
                    raise HypothesisError(f"pushforward of {k} depends on leaf coordinates")
        out[k] = [[patch.descend(x) for x in r] for r in tab]
    return out


def tangent_nijenhuis(chart, I):
    """N_I(d_a, d_b) for an endomorphism table I of the tangent bundle; list of residual vectors."""
    f = chart.field
    n = chart.dim
    col = lambda j: [I[i][j] for i in range(n)]
    apply = lambda X: [sum((I[i][k] * X[k] for k in range(n) if X[k] and I[i][k]), f.zero) for i in range(n)]

    def lie(X, Y):
        return [sum((X[i] * chart.d(Y[j], i) - Y[i] * chart.d(X[j], i) for i in range(n)), f.zero)
                for j in range(n)]

    out = []
    for a in range(n):
        for b in range(a + 1, n):
            ea = [f.one if i == a else f.zero for i in range(n)]
            eb = [f.one if i == b else f.zero for i in range(n)]
            Ia, Ib = col(a), col(b)
            t = lie(Ia, Ib)
            u = apply(lie(Ia, eb))
            v = apply(lie(ea, Ib))
            w = lie(ea, eb)
            out.append([t[i] - u[i] - v[i] - w[i] for i in range(n)])
    return out


def _table_equal(f, a, b):
    return all(f.is_zero(x - y) for r, s in zip(a, b) for x, y in zip(r, s))


def brane_reduce(bd, J, H=None, untwisted=True, require_brane=False):
    """Reduction of a weak brane; the brane-only steps run when J(L) = L.

    With ``require_brane`` a failing J(L) = L test is a failed check, otherwise
    it is only recorded in the outputs.
    """
    patch = bd.patch
    f = patch.field
    rep = Report(f"brane reduce {patch.name}")
    weak = check_weak_brane(bd, J, H)
    rep.extend(weak, "weak brane: ")
    if not weak.ok:
        raise HypothesisError("weak brane conditions fail: " + "; ".join(c.name for c in weak.failed))
    ranks = {r for _, r in characteristic_rank(J, patch)}
    rep.add("characteristic distribution constant rank", len(ranks) == 1 and ranks == {len(patch.leaf)},
            f"ranks {sorted(ranks)}, leaf dimension {len(patch.leaf)}")
    if len(ranks) != 1:
        raise HypothesisError("characteristic distribution has a rank jump")
    K = K_of(bd, J)
    frame = auto_basic_frame(patch, bd.B)
    red = reduce_courant(patch, K, frame)
    rep.extend(red.report, "courant: ")
    red, grep = reduce_gcs(J, patch, K, frame, red)
    rep.extend(grep, "gcs: ")
    Jbar = red.gcs
    out = ReducedBrane(red, rep)
    # Severa representative = pushforward of dF + i*H
    three, ok = descend_form(patch, _pull_H(patch, H) + bd.F.d(), rep, "dF + i*H")
    if ok:
        rep.add("H-bar of the gauged frame = pushforward of dF + i*H", red.twist.equals(three))
    push = pushforward_blocks(bd, J)
    rep.add("reduced A = pushforward of (A + Pi B)|TC", _table_equal(f, Jbar.A, push["A"]))
    rep.add("reduced Pi = pushforward of Pi", _table_equal(f, Jbar.Pi.table(), push["Pi"]))
    rep.add("reduced omega = pushforward of i*(omega - B Pi B - BA - A*B)",
            _table_equal(f, Jbar.omega.table(), push["omega"]))
    rep.outputs["J-bar"] = {"A": [list(r) for r in Jbar.A], "Pi": Jbar.Pi, "omega": Jbar.omega}
    brane = check_brane(bd, J)
    if require_brane or brane.ok:
        rep.extend(brane, "")
    rep.outputs["is brane"] = brane.ok
    if not brane.ok:
        return out
    rows, drep = reduce_dirac(bd.L, patch, K, frame, red)
    rep.extend(drep, "dirac: ")
    if rows is None:
        return out
    q = len(patch.quotient)
    out.Lbar = rows
    # L-bar is the tangent part of the gauged splitting, so J-bar is triangular there
    rep.add("L-bar = image of the gauged splitting", PointSubspace(2 * q, [[1 if i == a else 0 for i in range(2 * q)]
                                                                            for a in range(q)]).same_as(
        PointSubspace(2 * q, [[f.evaluate(x, patch.qsamples[0]) for x in r] for r in rows])))
    rep.add("J-bar preserves L-bar (omega block vanishes)", Jbar.omega.is_zero())
    I = [list(r) for r in Jbar.A]
    sq = [[sum((I[i][k] * I[k][j] for k in range(q)), f.zero) for j in range(q)] for i in range(q)]
    rep.add("I-bar^2 = -Id", all(f.is_zero(sq[i][j] + (1 if i == j else 0)) for i in range(q) for j in range(q)))
    nij = tangent_nijenhuis(patch.qchart, I)
    rep.add("I-bar integrable", all(f.is_zero(x) for v in nij for x in v))
    out.I = I
    out.Pi = Jbar.Pi
    rep.outputs["I-bar"] = I
    if not untwisted:
        return out
    # untwisted view: the splitting with B = 0
    try:
        frame0 = auto_basic_frame(patch, None)
        red0 = reduce_courant(patch, K, frame0, check_axioms_on_model=False, perturb=False)
    except HypothesisError as exc:
        rep.add("untwisted splitting is basic", "error", str(exc))
        return out
    red0, g0 = reduce_gcs(J, patch, K, frame0, red0, "gcs reduce (B = 0)")
    rep.extend(g0, "untwisted gcs: ")
    rows0, d0 = reduce_dirac(bd.L, patch, K, frame0, red0)
    Fbar, okF = descend_form(patch, bd.F, rep, "F")
    if not okF:
        return out
    out.Fbar = Fbar
    rep.outputs["F-bar"] = Fbar
    graphF = d0.outputs.get("F")
    rep.add("L-bar = graph(F-bar) in the untwisted splitting", graphF is not None and graphF.equals(Fbar))
    rep.add("-dF-bar = curvature of the untwisted reduced splitting", (-Fbar.d()).equals(red0.twist))
    out.extras["untwisted twist"] = red0.twist
    J0 = red0.gcs
    out.untwisted = J0
    rep.add("untwisted J-bar = gauge of J-bar by F-bar", gauge_transform(Jbar, Fbar).equals(J0))
    # tangent component of J0 on graph(F-bar) is I-bar
    Ftab = Fbar.table()
    exp = [[f.zero] * q for _ in range(q)]
    for j in range(q):
        xi = [Ftab[j][k] for k in range(q)]  # i_{d_j} F
        img = J0.apply(GenSection(patch.qchart, [f.one if i == j else f.zero for i in range(q)], xi))
        for i in range(q):
            exp[i][j] = img.vec[i]
    rep.add("I-bar = tangent part of J0 on graph(F-bar)", _table_equal(f, exp, I))
    return out


def holomorphic_symplectic_check(Fbar, omegabar, I, points=()):
    """F + i omega closed, of type (2,0) for -I, and nondegenerate at ``points``.

    Type (2,0) for a complex structure J means s(JX, Y) = i s(X, Y); for
    F + i omega and J = -I that is omega(IX, Y) = -F(X, Y) and F(IX, Y) = omega(X, Y).
    A (2,0)-form is nondegenerate on T^{1,0} iff its real part is nondegenerate.
    """
    ch = Fbar.chart
    f = ch.field
    q = ch.dim
    rep = Report("holomorphic symplectic")
    rep.add("F-bar + i omega-bar closed", Fbar.d().is_zero() and omegabar.d().is_zero())
    Ft, Wt = Fbar.table(), omegabar.table()
    IX = lambda tab, a, b: sum((I[k][a] * tab[k][b] for k in range(q) if I[k][a]), f.zero)
    t1 = all(f.is_zero(IX(Wt, a, b) + Ft[a][b]) for a in range(q) for b in range(q))
    t2 = all(f.is_zero(IX(Ft, a, b) - Wt[a][b]) for a in range(q) for b in range(q))
    rep.add("F-bar + i omega-bar of type (2,0) for -I-bar", t1 and t2)
    if points:
        bad = [p for p in points if det_point([[f.evaluate(x, p) for x in r] for r in Ft]) == 0]
        rep.add("F-bar + i omega-bar nondegenerate at samples", not bad, f"degenerate at {bad[:2]}" if bad else "")
    return rep


def symplectic_inverse_check(Fbar, omegabar, I):
    """I = -omega^{-1} F as maps TC -> TC."""
    ch = Fbar.chart
    f = ch.field
    q = ch.dim
    W = [[omegabar[i, j] for i in range(q)] for j in range(q)]
    Fm = [[Fbar[i, j] for i in range(q)] for j in range(q)]
    Winv = sym_inverse(f, W)
    exp = [[-sum((Winv[i][k] * Fm[k][j] for k in range(q)), f.zero) for j in range(q)] for i in range(q)]
    return _table_equal(f, exp, I), exp


def extension_independence(bd, J, B2, H=None):
    """Weak-brane verdicts and pushed-forward blocks do not change when B -> B2 with i*B2 = i*B."""
    rep = Report(f"extension independence {bd.patch.name}")
    f = bd.field
    other = BraneData(bd.patch, B2, bd.F)
    w1, w2 = check_weak_brane(bd, J, H), check_weak_brane(other, J, H)
    rep.add("same weak-brane verdicts", [c.status for c in w1.checks] == [c.status for c in w2.checks])
    if w1.ok and w2.ok:
        p1, p2 = pushforward_blocks(bd, J), pushforward_blocks(other, J)
        rep.add("same pushforward of (A + Pi B)|TC", _table_equal(f, p1["A"], p2["A"]))
        rep.add("same pushforward of Pi", _table_equal(f, p1["Pi"], p2["Pi"]))
    return rep


def gauge_path_check(bd, J, Bg, H=None):
    """Gauge everything by a closed ambient Bg, reduce in the B = 0 splitting, compare with
    gauging the reduced structure by the pushforward of i*Bg."""
    patch = bd.patch
    rep = Report(f"gauge path {patch.name}")
    if not Bg.d().is_zero():
        raise HypothesisError("global gauge form is not closed")
    K = K_of(bd, J)
    frame0 = auto_basic_frame(patch, None)
    red = reduce_courant(patch, K, frame0, check_axioms_on_model=False, perturb=False)
    red, _ = reduce_gcs(J, patch, K, frame0, red)
    Jg = gauge_transform(J, Bg)
    Kg = FramedSubbundle("K gauged", [gauge_transform(m, Bg) for m in K.ambient_members()], K.rank)
    frameg = [gauge_transform(e, Bg) for e in frame0[:len(patch.quotient)]] + frame0[len(patch.quotient):]
    redg = reduce_courant(patch, Kg, frameg, check_axioms_on_model=False, perturb=False)
    redg, _ = reduce_gcs(Jg, patch, Kg, frameg, redg)
    bbar, ok = descend_form(patch, patch.pullback(Bg), rep, "i*Bg")
    if ok:
        # redg's frame is e^{Bg} of the untwisted one, so it sees the same matrix
        rep.add("reduction in the transported frame unchanged", redg.gcs.equals(red.gcs))
        frameg0 = frame0
        redg0 = reduce_courant(patch, Kg, frameg0, check_axioms_on_model=False, perturb=False)
        redg0, _ = reduce_gcs(Jg, patch, Kg, frameg0, redg0)
        rep.add("gauged reduction in the B = 0 splitting = gauge of reduction by pushforward",
                redg0.gcs.equals(gauge_transform(red.gcs, bbar)))
    return rep


# ---------------------------------------------------------------------------
# cosymplectic and pre-Poisson


def cosymplectic_check(J, patch):
    """sharp N*M~ + TM~ = TM with trivial intersection, at samples."""
    f = patch.field
    n = patch.ambient.dim
    rep = Report(f"cosymplectic {patch.name}")
    sharp = [[patch.restrict(x) for x in J.apply(s).vec] for s in patch.conormal_frame()]
    bad = []
    for p in patch.samples:
        S = PointSubspace(n, [[f.evaluate(x, p) for x in v] for v in sharp])
        jac = [[f.evaluate(x, p) for x in row] for row in patch.jac]
        T = PointSubspace(n, [list(c) for c in zip(*jac)])
        if join(S, T).rank != n or meet(S, T).rank != 0:
            bad.append(p)
    rep.add("sharp N*M~ + TM~ = TM (direct)", not bad, f"fails at {len(bad)} samples" if bad else "")
    return rep


def cosymplectic_restrict(J, patch):
    """Induced generalized complex structure on a cosymplectic submanifold (quotient chart = its chart)."""
    rep = Report(f"cosymplectic restrict {patch.name}")
    cs = cosymplectic_check(J, patch)
    rep.extend(cs, "")
    if not cs.ok:
        raise HypothesisError("submanifold is not cosymplectic")
    if patch.leaf:
        raise HypothesisError("cosymplectic restriction takes a chart without leaf coordinates")
    K = FramedSubbundle("N*M~", patch.conormal_frame())
    n = patch.ambient.dim
    pts = _points(patch, K)
    Jr = J.substitute(patch.embedding)
    triv = True
    for pd in pts:
        Jm = Jr.at(pd.p)
        JK = PointSubspace(2 * n, [[sum(Jm[i][k] * v[k] for k in range(2 * n)) for i in range(2 * n)]
                                   for v in pd.K.basis])
        if meet(JK, pd.Kperp).rank != 0:
            triv = False
    rep.add("J K cap K^perp = 0", triv)
    frame = auto_basic_frame(patch, None)
    red = reduce_courant(patch, K, frame, check_axioms_on_model=False)
    rep.extend(red.report, "courant: ")
    red, g = reduce_gcs(J, patch, K, frame, red)
    rep.extend(g, "gcs: ")
    return red, rep


def pre_poisson_check(L, J, patch, inner=None, inner_J=None):
    """Pre-Poisson hypotheses for (C, L); optionally the weak-brane check inside a cosymplectic M~.

    ``inner`` is a BraneData whose ambient chart is the chart of M~ and
    ``inner_J`` the structure induced there (see :func:`cosymplectic_restrict`).
    """
    f = patch.field
    n = patch.ambient.dim
    rep = Report(f"pre-Poisson {patch.name}")
    nc = patch.conormal_frame()
    JN = [patch.restrict_section(J.apply(s)) for s in nc]
    cont_bad, r_int, r_sum, r_char = [], set(), set(), set()
    for p in patch.samples:
        jac = [[f.evaluate(x, p) for x in row] for row in patch.jac]
        TC = PointSubspace(n, [list(c) for c in zip(*jac)])
        JNp = PointSubspace(2 * n, [s.at(p) for s in JN])
        piinv = PointSubspace(2 * n, [list(v) + [0] * n for v in TC.basis] +
                              [[0] * n + [1 if i == j else 0 for i in range(n)] for j in range(n)])
        inter = meet(JNp, piinv)
        r_int.add(inter.rank)
        if not inter.issubspace(L.at(patch, p)):
            cont_bad.append(p)
        S = PointSubspace(n, [s.at(p)[:n] for s in JN])
        r_sum.add(join(S, TC).rank)
        r_char.add(meet(S, TC).rank)
    rep.add("J(N*C) cap pi^-1(TC) in L at samples", not cont_bad, f"fails at {len(cont_bad)} samples" if cont_bad else "")
    rep.add("J(N*C) cap pi^-1(TC) constant rank", len(r_int) == 1, f"ranks {sorted(r_int)}")
    rep.add("sharp N*C + TC constant rank", len(r_sum) == 1, f"ranks {sorted(r_sum)}")
    rep.add("characteristic distribution sharp N*C cap TC constant rank", len(r_char) == 1,
            f"ranks {sorted(r_char)}")
    rep.outputs["rank of sharp N*C + TC"] = sorted(r_sum)
    if r_sum == {n}:
        rep.outputs["note"] = "sharp N*C + TC = TM: already a weak-brane candidate, M~ = M"
    if inner is not None:
        wb = check_weak_brane(inner, inner_J)
        rep.extend(wb, "inside M~: ")
    return rep
