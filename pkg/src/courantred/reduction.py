"""Reduction of exact Courant algebroids and of the structures they carry.

Input is a :class:`~courantred.patch.PatchSetup` (a foliation-adapted chart of
C), an isotropic subbundle K of E|_C given by a frame, and a frame of basic
sections of K^perp whose classes span K^perp/K. Everything downstream lives on
the quotient chart with the basic frame as basis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations

from .courant import (GCSMatrix, GenSection, coordinate_sections, gauge_transform,
                      nijenhuis, pairing, split_pairing_matrix, twisted_bracket)
from .errors import HypothesisError
from .forms import FormField
from .linalg import (PointSubspace, join, meet, pairing_perp, rref, sym_inverse, sym_nullspace,
                     sym_rref, sym_solve)
from .patch import AlongSection, BracketCache, bracket_along
from .report import Report


def _split_gram_point(n):
    half = Fraction(1, 2)
    return [[half if (j == i + n or i == j + n) else Fraction(0) for j in range(2 * n)]
            for i in range(2 * n)]


class PointData:
    """K_p, K^perp_p and TC_p at a sample point, computed once."""

    def __init__(self, patch, K, p):
        n = patch.ambient.dim
        f = patch.field
        self.p = p
        self.K = K.at(patch, p)
        self.Kperp = pairing_perp(self.K, _split_gram_point(n))
        jac = [[f.evaluate(x, p) for x in row] for row in patch.jac]
        self.TC = PointSubspace(n, [list(col) for col in zip(*jac)])
        leaf_cols = [[row[i] for row in jac] for i in patch.leaf_positions()]
        self.leafspace = PointSubspace(n, leaf_cols)


def _points(patch, K):
    return [PointData(patch, K, p) for p in patch.samples]


def _anchor_space(sub, n):
    return PointSubspace(n, [v[:n] for v in sub.basis])


# ---------------------------------------------------------------------------
# setup and basic sections


def check_setup(K, patch, pts=None):
    """Hypotheses of the reduction theorem, each as a separate check."""
    rep = Report(f"setup {patch.name}/{K.name}")
    f = patch.field
    n = patch.ambient.dim
    rK = K.restricted(patch)
    bad = [(i, j) for i in range(len(rK)) for j in range(i, len(rK))
           if not f.is_zero(pairing(rK[i], rK[j]))]
    rep.add("(i) K isotropic", not bad, f"non-isotropic pairs {bad[:4]}" if bad else "")
    pts = pts or _points(patch, K)
    bad_span, bad_leaf, ranks = [], [], set()
    for pd in pts:
        ranks.add(pd.K.rank)
        if not _anchor_space(pd.Kperp, n).same_as(pd.TC):
            bad_span.append(pd.p)
        if not _anchor_space(pd.K, n).same_as(pd.leafspace):
            bad_leaf.append(pd.p)
    rep.add("(ii) pi(K^perp) = TC at samples", not bad_span,
            f"fails at {len(bad_span)} samples" if bad_span else "")
    rep.add("(iii) pi(K) = leaf directions at samples", not bad_leaf,
            f"fails at {len(bad_leaf)} samples" if bad_leaf else "")
    rep.add("(iv) K has constant rank", len(ranks) == 1 and K.rank in ranks,
            f"ranks {sorted(ranks)}, declared {K.rank}")
    # [K, K] in K, on ambient frame members whose anchors are tangent
    amb = [m for m in K.ambient_members() if m is not None]
    if len(amb) == len(K.frame) and not bad_span and not bad_leaf:
        cache = BracketCache(patch.H)
        bad_kk = []
        for i, j in combinations(range(len(amb)), 2):
            b = bracket_along(patch, amb[i], amb[j], cache)
            for pd in pts:
                if not pd.K.contains(b.at(pd.p)):
                    bad_kk.append((i, j))
                    break
        rep.add("[K, K] in K at samples", not bad_kk, f"{bad_kk[:4]}" if bad_kk else "")
    return rep


def is_basic(e, K, patch, pts=None, cache=None, report=None):
    """True iff e is in K^perp and [k_i, e] lies in K at every sample."""
    f = patch.field
    e = AlongSection.of(e)
    re_ = e.restrict(patch)
    for k in K.restricted(patch):
        if not f.is_zero(pairing(re_, k)):
            if report is not None:
                report.append("not in K^perp")
            return False
    pts = pts or _points(patch, K)
    cache = cache or BracketCache(patch.H)
    for k in K.frame:
        b = bracket_along(patch, k, e, cache)
        for pd in pts:
            if not pd.K.contains(b.at(pd.p)):
                if report is not None:
                    report.append(f"[k, e] not in K at {pd.p}")
                return False
    return True


def bracket_extension_check(patch, K, e1, e2, seed=0, pts=None):
    """The bracket along C of ambient sections e1, e2 of K^perp depends only on their restrictions.

    Each slot is perturbed by g * e_hat with g a multiple of a defining function
    and e_hat a random ambient section; the restricted brackets must agree modulo K.
    """
    rep = Report(f"bracket extension independence {patch.name}")
    f = patch.field
    amb = patch.ambient
    for label, e in (("first", e1), ("second", e2)):
        if patch.chart_vector_of([patch.restrict(x) for x in e.vec]) is None:
            raise HypothesisError(f"anchor of the {label} section is not tangent to C")
    if not patch.defining:
        rep.add("C open: nothing to perturb", True)
        return rep
    rng = random.Random(f"extension-{seed}-{patch.name}")

    def lin():
        e = f.const(rng.randint(-3, 3))
        for c in amb.coords:
            e = e + f.const(rng.randint(-2, 2)) * f.var(c)
        return e

    pts = pts or _points(patch, K)
    base = patch.restrict_section(twisted_bracket(e1, e2, patch.H))
    for slot in ("first", "second"):
        g = patch.defining[rng.randrange(len(patch.defining))] * lin()
        ehat = GenSection(amb, [lin() for _ in amb.coords], [lin() for _ in amb.coords])
        bump = ehat.scale(g)
        if slot == "first":
            other = twisted_bracket(e1 + bump, e2, patch.H)
        else:
            other = twisted_bracket(e1, e2 + bump, patch.H)
        diff = patch.restrict_section(other) - base
        bad = [pd.p for pd in pts if not pd.K.contains(diff.at(pd.p))]
        rep.add(f"perturbing the {slot} slot changes the bracket by K only", not bad,
                f"fails at {len(bad)} samples" if bad else "")
    return rep


def auto_basic_frame(patch, B=None):
    """{e^B T_v} followed by {eta_v}: a split-form candidate basic frame."""
    out = []
    for v in patch.quotient:
        T = patch.T.get(v)
        if T is None:
            raise HypothesisError(f"no ambient coordinate field supplied for quotient coordinate {v!r}")
        out.append(gauge_transform(T, B) if B is not None else T)
    for v in patch.quotient:
        eta = patch.eta.get(v)
        if eta is None:
            raise HypothesisError(f"no closed 1-form supplied for quotient coordinate {v!r}")
        out.append(eta)
    return out


# ---------------------------------------------------------------------------
# framed algebroid on the quotient chart


class FramedAlgebroid:
    """Courant algebroid on a chart presented by a global frame.

    Sections are lists of coefficient functions. ``G`` is the Gram matrix,
    ``rho[a]`` the anchor of frame element a (chart vector), ``c[a][b]`` the
    frame coefficients of [e_a, e_b].
    """

    def __init__(self, chart, G, rho, c):
        self.chart = chart
        self.field = chart.field
        self.G = G
        self.Ginv = sym_inverse(self.field, G)
        self.rho = rho
        self.c = c
        self.rank = len(G)

    def anchor(self, s):
        f = self.field
        out = [f.zero] * self.chart.dim
        for a, coef in enumerate(s):
            if coef:
                out = [x + coef * y if y else x for x, y in zip(out, self.rho[a])]
        return out

    def pairing(self, s, t):
        f = self.field
        total = f.zero
        for a, x in enumerate(s):
            if not x:
                continue
            for b, y in enumerate(t):
                if y and self.G[a][b]:
                    total = total + x * y * self.G[a][b]
        return total

    def D(self, fn):
        """Frame coefficients of D f, defined by <D f, e> = pi(e) f / 2."""
        f = self.field
        vals = [self.chart.apply_vector(self.rho[d], fn) / 2 for d in range(self.rank)]
        return [sum((self.Ginv[c][d] * vals[d] for d in range(self.rank) if vals[d] and self.Ginv[c][d]),
                    f.zero) for c in range(self.rank)]

    def bracket(self, s, t):
        f = self.field
        m = self.rank
        out = [f.zero] * m
        for a, x in enumerate(s):
            if not x:
                continue
            for b, y in enumerate(t):
                if not y:
                    continue
                xy = x * y
                for c in range(m):
                    if self.c[a][b][c]:
                        out[c] = out[c] + xy * self.c[a][b][c]
                out[b] = out[b] + x * self.chart.apply_vector(self.rho[a], y)
                out[a] = out[a] - y * self.chart.apply_vector(self.rho[b], x)
                if self.G[a][b]:
                    dx = self.D(x)
                    coef = 2 * y * self.G[a][b]
                    out = [o + coef * d if d else o for o, d in zip(out, dx)]
        return out

    def basis(self, a):
        f = self.field
        return [f.one if i == a else f.zero for i in range(self.rank)]

    def check_axioms(self, sections, functions=(), label="reduced axioms"):
        f = self.field
        rep = Report(label)
        ch = self.chart
        br = self.bracket
        eq = lambda u, v: all(f.is_zero(a - b) for a, b in zip(u, v))
        add = lambda u, v: [a + b for a, b in zip(u, v)]
        fails = {k: [] for k in ("C1", "C2", "C3", "C4", "C5")}
        n = len(sections)
        memo = {}

        def B(i, j):
            if (i, j) not in memo:
                memo[(i, j)] = br(sections[i], sections[j])
            return memo[(i, j)]

        for i in range(n):
            for j in range(n):
                e1, e2 = sections[i], sections[j]
                lie = _lie(ch, self.anchor(e1), self.anchor(e2))
                if not all(f.is_zero(a - b) for a, b in zip(self.anchor(B(i, j)), lie)):
                    fails["C2"].append((i, j))
                for fi, fn in enumerate(functions):
                    lhs = br(e1, [fn * x for x in e2])
                    rhs = add([fn * x for x in B(i, j)], [ch.apply_vector(self.anchor(e1), fn) * x for x in e2])
                    if not eq(lhs, rhs):
                        fails["C3"].append((i, j, fi))
                for k in range(n):
                    e3 = sections[k]
                    if not eq(br(e1, B(j, k)), add(br(B(i, j), e3), br(e2, B(i, k)))):
                        fails["C1"].append((i, j, k))
                    lhs4 = ch.apply_vector(self.anchor(e1), self.pairing(e2, e3))
                    rhs4 = self.pairing(B(i, j), e3) + self.pairing(e2, B(i, k))
                    if not f.is_zero(lhs4 - rhs4):
                        fails["C4"].append((i, j, k))
            if not eq(B(i, i), self.D(self.pairing(sections[i], sections[i]))):
                fails["C5"].append(i)
        for name, bad in fails.items():
            rep.add(name, not bad, f"{len(bad)} failures, e.g. {bad[:3]}" if bad else "")
        return rep


def _lie(chart, X, Y):
    f = chart.field
    out = []
    for j in range(chart.dim):
        acc = f.zero
        for i in range(chart.dim):
            if X[i] and Y[j]:
                acc = acc + X[i] * chart.d(Y[j], i)
            if Y[i] and X[j]:
                acc = acc - Y[i] * chart.d(X[j], i)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# reduced structure


@dataclass
class ReducedStructure:
    patch: object
    K: object
    frame: list
    pairing: list            # quotient-chart Gram matrix
    anchor: list             # anchor[a] = quotient-chart vector
    structure: list          # structure[a][b] = coefficient list
    split: bool
    twist: FormField = None  # H-bar of the frame splitting, when split
    algebroid: FramedAlgebroid = None
    report: Report = None
    gcs: GCSMatrix = None
    gcs_matrix: list = None
    dirac_rows: list = None
    extras: dict = dc_field(default_factory=dict)

    @property
    def qchart(self):
        return self.patch.qchart

    @property
    def rank(self):
        return len(self.pairing)

    def as_split_gcs(self):
        return self.gcs


def _coeffs(patch, Ginv, vec_restricted, frame_restricted):
    f = patch.field
    prs = [pairing(vec_restricted, e) for e in frame_restricted]
    m = len(frame_restricted)
    return [sum((Ginv[c][d] * prs[d] for d in range(m) if prs[d] and Ginv[c][d]), f.zero)
            for c in range(m)]


def _descend_all(patch, exprs, rep, what):
    bad = [i for i, e in enumerate(exprs) if e and not patch.is_leaf_independent(e)]
    if bad:
        rep.add(f"{what} independent of leaf coordinates", False, f"entries {bad[:4]}")
        return None
    return [patch.descend(e) for e in exprs]


def reduced_data(patch, K, frame, cache=None, rep=None, pts=None, check=True):
    """Pairing, anchor and structure functions of the reduced algebroid.

    Returns a dict of chart-variable (not yet descended) data, or None with the
    failure recorded in ``rep``.
    """
    f = patch.field
    rep = rep if rep is not None else Report("reduced data")
    cache = cache or BracketCache(patch.H)
    frame = [AlongSection.of(e) for e in frame]
    rf = [e.restrict(patch) for e in frame]
    m = len(frame)
    G = [[pairing(rf[a], rf[b]) for b in range(m)] for a in range(m)]
    try:
        Ginv = sym_inverse(f, G)
    except HypothesisError:
        rep.add("reduced pairing nondegenerate", False)
        return None
    anchor = []
    for a in range(m):
        w = patch.chart_vector_of(list(rf[a].vec))
        if w is None:
            rep.add("anchors tangent to C", False, f"frame member {a}")
            return None
        anchor.append([w[i] for i in patch.quotient_positions()])
    rK = K.restricted(patch)
    struct = [[None] * m for _ in range(m)]
    bad_perp = []
    for a in range(m):
        for b in range(m):
            br = bracket_along(patch, frame[a], frame[b], cache)
            if check:
                for i, k in enumerate(rK):
                    if not f.is_zero(pairing(br, k)):
                        bad_perp.append((a, b, i))
            struct[a][b] = _coeffs(patch, Ginv, br, rf)
    if check:
        rep.add("brackets of frame members stay in K^perp", not bad_perp,
                f"{bad_perp[:4]}" if bad_perp else "")
    return {"G": G, "Ginv": Ginv, "anchor": anchor, "struct": struct, "restricted": rf}


def _split_form(f, G, anchor, q):
    m = len(G)
    if m != 2 * q:
        return False
    half = f.const(Fraction(1, 2))
    for a in range(m):
        for b in range(m):
            want = half if (b == a + q or a == b + q) else f.zero
            if not f.is_zero(G[a][b] - want):
                return False
    for a in range(m):
        for i in range(q):
            want = f.one if a == i else f.zero
            if not f.is_zero(anchor[a][i] - want):
                return False
    return True


def reduce_courant(patch, K, frame, check_axioms_on_model=True, perturb=True, seed=0):
    """Reduced Courant algebroid K^perp/K on the quotient chart in the given basic frame."""
    f = patch.field
    rep = Report(f"reduce {patch.name}/{K.name}")
    pts = _points(patch, K)
    setup = check_setup(K, patch, pts)
    rep.extend(setup, "setup: ")
    if not setup.ok:
        raise HypothesisError("setup hypotheses fail: " + "; ".join(c.name for c in setup.failed))
    frame = [AlongSection.of(e) for e in frame]
    cache = BracketCache(patch.H)
    nonbasic = [i for i, e in enumerate(frame) if not is_basic(e, K, patch, pts, cache)]
    rep.add("frame members basic", not nonbasic, f"members {nonbasic}" if nonbasic else "")
    n = patch.ambient.dim
    m = len(frame)
    span_bad = []
    for pd in pts:
        vecs = [e.restrict(patch).at(pd.p) for e in frame]
        total = join(PointSubspace(2 * n, vecs), pd.K)
        if not total.same_as(pd.Kperp) or pd.Kperp.rank - pd.K.rank != m:
            span_bad.append(pd.p)
    rep.add("frame spans K^perp/K at samples", not span_bad,
            f"fails at {len(span_bad)} samples" if span_bad else "")
    if nonbasic or span_bad:
        raise HypothesisError("basic frame hypotheses fail")
    data = reduced_data(patch, K, frame, cache, rep)
    if data is None:
        raise HypothesisError("reduced data could not be formed")
    G = _descend_all(patch, [x for row in data["G"] for x in row], rep, "pairing")
    anchor = _descend_all(patch, [x for row in data["anchor"] for x in row], rep, "anchor")
    struct = _descend_all(patch, [x for r1 in data["struct"] for r2 in r1 for x in r2], rep, "structure functions")
    if G is None or anchor is None or struct is None:
        raise HypothesisError("reduced data depend on leaf coordinates")
    q = len(patch.quotient)
    G = [G[a * m:(a + 1) * m] for a in range(m)]
    anchor = [anchor[a * q:(a + 1) * q] for a in range(m)]
    struct = [[struct[(a * m + b) * m:(a * m + b + 1) * m] for b in range(m)] for a in range(m)]
    rep.add("reduced rank = 2 dim(quotient)", m == 2 * q, f"{m} vs 2*{q}")
    sym_ok = all(f.is_zero(G[a][b] - G[b][a]) for a in range(m) for b in range(m))
    rep.add("reduced pairing symmetric", sym_ok)
    alg = FramedAlgebroid(patch.qchart, G, anchor, struct)
    split = _split_form(f, G, anchor, q)
    twist = None
    if split:
        comps = {}
        for a, b, c in combinations(range(q), 3):
            val = 2 * alg.pairing(struct[a][b], alg.basis(c))
            if val:
                comps[(a, b, c)] = val
        twist = FormField(patch.qchart, 3, comps)
        # all structure functions must agree with the split model with this twist
        bad = []
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    want = f.zero
                    if a < q and b < q and c >= q:
                        want = twist[a, b, c - q]
                    if not f.is_zero(struct[a][b][c] - want):
                        bad.append((a, b, c))
        rep.add("structure functions = split model with H-bar", not bad, f"{bad[:4]}" if bad else "")
        rep.add("H-bar closed", twist.d().is_zero())
    if check_axioms_on_model:
        secs = [alg.basis(a) for a in range(m)]
        fns = [f.var(v) for v in patch.quotient[:1]]
        if patch.quotient:
            v0 = f.var(patch.quotient[0])
            secs.append([v0 * x for x in alg.basis(0)])
        ax = alg.check_axioms(secs, fns)
        rep.extend(ax, "reduced ")
    red = ReducedStructure(patch, K, frame, G, anchor, struct, split, twist, alg, rep)
    if perturb:
        rep.extend(representative_independence(red, seed=seed), "")
    return red


def _random_chart_poly(patch, rng, degree=1):
    f = patch.field
    coords = patch.chart.coords
    e = f.const(rng.randint(-3, 3))
    for c in coords:
        e = e + f.const(Fraction(rng.randint(-3, 3), rng.randint(1, 3))) * f.var(c)
    if degree > 1 and coords:
        c = coords[rng.randrange(len(coords))]
        e = e + f.var(c) ** 2
    return e


def representative_independence(red, seed=0):
    """Replace every frame member e by e + sum f_i k_i and compare all reduced data."""
    patch, K = red.patch, red.K
    f = patch.field
    rep = Report("representative independence")
    rng = random.Random(f"perturb-{seed}-{patch.name}")
    new_frame = []
    for e in red.frame:
        extra = AlongSection([])
        for k in K.frame:
            extra = extra + k.scale(_random_chart_poly(patch, rng))
        new_frame.append(e + extra)
    sub = Report("perturbed")
    data = reduced_data(patch, K, new_frame, None, sub, check=False)
    if data is None:
        rep.add("perturbed reduced data exist", False)
        return rep
    m = red.rank
    q = len(patch.quotient)
    bad = []
    for a in range(m):
        for b in range(m):
            if not f.is_zero(patch.descend(data["G"][a][b]) - red.pairing[a][b]) or \
                    not patch.is_leaf_independent(data["G"][a][b]):
                bad.append(("G", a, b))
            for c in range(m):
                x = data["struct"][a][b][c]
                if not patch.is_leaf_independent(x) or not f.is_zero(patch.descend(x) - red.structure[a][b][c]):
                    bad.append(("c", a, b, c))
        for i in range(q):
            x = data["anchor"][a][i]
            if not f.is_zero(patch.descend(x) - red.anchor[a][i]):
                bad.append(("rho", a, i))
    rep.add("reduced data unchanged under e -> e + k", not bad, f"{bad[:4]}" if bad else "",
            compared=m * m * m + m * m + m * q)
    return rep


# ---------------------------------------------------------------------------
# adapted splittings


def splitting_section(patch, b, c):
    T = patch.T.get(c)
    if T is None:
        raise HypothesisError(f"no ambient coordinate field for {c!r}")
    return gauge_transform(T, b) if b is not None else T


def check_adapted_splitting(b, K, patch, pts=None):
    """Is X -> X + i_X b adapted to K? Returns a Report (truthy when adapted)."""
    f = patch.field
    rep = Report(f"adapted splitting on {patch.name}")
    pts = pts or _points(patch, K)
    amb = patch.ambient
    if b is not None:
        sig = [gauge_transform(GenSection(amb, amb.basis_vector(i)), b) for i in range(amb.dim)]
        iso = all(f.is_zero(pairing(sig[i], sig[j])) for i in range(amb.dim) for j in range(i, amb.dim))
    else:
        iso = True
    rep.add("(a) isotropic image", iso)
    rK = K.restricted(patch)
    not_perp = []
    for c in patch.chart.coords:
        s = patch.restrict_section(splitting_section(patch, b, c))
        if not all(f.is_zero(pairing(s, k)) for k in rK):
            not_perp.append(c)
    rep.add("(b) sigma(TC) in K^perp", not not_perp,
            f"sigma(d/d{', d/d'.join(not_perp)}) not in K^perp" if not_perp else "")
    cache = BracketCache(patch.H)
    nonbasic = []
    if not not_perp:
        for v in patch.quotient:
            if not is_basic(splitting_section(patch, b, v), K, patch, pts, cache):
                nonbasic.append(v)
    rep.add("(c) sigma(projectable coordinate fields) basic", not not_perp and not nonbasic,
            "skipped: (b) fails" if not_perp else (f"{nonbasic}" if nonbasic else ""))
    bad_k = []
    for i, k in enumerate(rK):
        w = list(k.vec)
        if b is not None:
            extra = b.substitute(patch.embedding).contract_vector(w)
        else:
            extra = [f.zero] * amb.dim
        sk = GenSection(amb, w, extra)
        for pd in pts:
            if not pd.K.contains(sk.at(pd.p)):
                bad_k.append(i)
                break
    rep.add("sigma(pi(K)) in K", not bad_k, f"{bad_k}" if bad_k else "")
    return rep


def severa_representative(b, patch, K, b2=None):
    """Push forward j^* H_sigma to the quotient chart. Returns ``(form, report)``.

    With a second adapted splitting ``b2`` the report also records the
    witness 2-form whose differential is the difference of representatives.
    """
    rep = Report(f"severa representative on {patch.name}")
    adapted = check_adapted_splitting(b, K, patch)
    rep.extend(adapted, "adapted: ")
    if not adapted.ok:
        raise HypothesisError("splitting is not adapted to K")
    H3 = _curvature(patch, b)
    form, ok = descend_form(patch, patch.pullback(H3), rep, "j*H_sigma")
    if not ok:
        raise HypothesisError("j*H_sigma does not descend")
    rep.outputs["H_bar"] = form
    if b2 is not None:
        ad2 = check_adapted_splitting(b2, K, patch)
        rep.extend(ad2, "second adapted: ")
        if not ad2.ok:
            raise HypothesisError("second splitting is not adapted to K")
        form2, ok2 = descend_form(patch, patch.pullback(_curvature(patch, b2)), rep, "second j*H_sigma")
        zero2 = FormField(patch.ambient, 2)
        diff = (b2 if b2 is not None else zero2) - (b if b is not None else zero2)
        wit, ok3 = descend_form(patch, patch.pullback(diff), rep, "j*(b2 - b)")
        if ok2 and ok3:
            rep.add("difference of representatives = d(witness)", (form2 - form).equals(wit.d()))
            rep.outputs["witness"] = wit
            rep.outputs["H_bar_2"] = form2
    return form, rep


def _curvature(patch, b):
    amb = patch.ambient
    H = patch.H if patch.H is not None else FormField(amb, 3)
    return H + b.d() if b is not None else H


def descend_form(patch, form, rep, label):
    """Check a chart form is basic (leaf-contractions vanish, leaf-independent) and descend."""
    ch = patch.chart
    lp = patch.leaf_positions()
    bad_contract = [u for u in lp if not form.interior(ch.basis_vector(u)).is_zero()] if form.degree else []
    bad_dep = [k for k, v in form.comps.items() if not patch.is_leaf_independent(v)]
    ok = not bad_contract and not bad_dep
    rep.add(f"{label} descends", ok,
            (f"contraction with leaf field nonzero {[patch.chart.coords[u] for u in bad_contract]}" if bad_contract
             else f"leaf-dependent components {bad_dep[:3]}" if bad_dep else ""))
    if not ok:
        return None, False
    off = len(patch.leaf)
    comps = {}
    for idx, v in form.comps.items():
        if all(i >= off for i in idx):
            comps[tuple(i - off for i in idx)] = patch.descend(v)
    return FormField(patch.qchart, form.degree, comps), True


def find_adapted_splitting(patch, K, frame, degree=2, denominator=None):
    """Search b = (polynomial coefficients of bounded degree) / denominator with
    sigma_b(TC) contained in span(first q frame members) + K.

    Returns ``(b or None, report)``. Generators are treated as independent
    variables when collecting coefficients, so a miss is not a proof of absence.
    """
    from sympy.polys.monomials import itermonomials  # local: only needed here
    from sympy import symbols

    f = patch.field
    amb = patch.ambient
    n = amb.dim
    q = len(patch.quotient)
    rep = Report(f"adapted splitting search on {patch.name}")
    frame = [AlongSection.of(e) for e in frame]
    Lframe = [frame[a].restrict(patch) for a in range(q)] + K.restricted(patch)
    den = f.one if denominator is None else (f.parse(denominator) if isinstance(denominator, str) else f.const(denominator))
    syms = symbols(" ".join(amb.coords))
    monos = sorted(itermonomials(list(syms), degree), key=lambda m: (m.as_poly(*syms).total_degree(), str(m)))
    mono_exprs = []
    for mono in monos:
        degs = mono.as_poly(*syms).monoms()[0]
        e = f.one
        for c, k in zip(amb.coords, degs):
            if k:
                e = e * f.var(c) ** k
        mono_exprs.append(e / den)
    pairs = list(combinations(range(n), 2))
    unknowns = [(ij, mi) for ij in pairs for mi in range(len(mono_exprs))]
    # equations: <T_c + i_{T_c} b, l> = <T_c, l> + b(T_c, X_l)/2 on C
    rows = []
    for c in patch.chart.coords:
        T = patch.T.get(c)
        if T is None:
            raise HypothesisError(f"no ambient coordinate field for {c!r}")
        rT = patch.restrict_section(T)
        for l in Lframe:
            const = pairing(rT, l)
            coeffs = []
            for (i, j), mi in unknowns:
                # b = sum p dx_i ^ dx_j, b(T, X) = T^i X^j - T^j X^i
                val = (rT.vec[i] * l.vec[j] - rT.vec[j] * l.vec[i]) / 2
                coeffs.append(val * patch.restrict(mono_exprs[mi]) if val else f.zero)
            rows.append((const, coeffs))
    # clear denominators and collect monomial coefficients
    lin = []
    for const, coeffs in rows:
        exprs = [const] + coeffs
        common = f.ring.one
        for e in exprs:
            if e:
                common = common.lcm(e.den)
        table = {}
        for k, e in enumerate(exprs):
            if not e:
                continue
            num = e.num * common.exquo(e.den)
            for monom, cf in num.items():
                table.setdefault(monom, [Fraction(0)] * len(exprs))
                table[monom][k] += Fraction(int(cf.numerator), int(cf.denominator))
        lin.extend(table.values())
    # solve sum_k coef_k p_k = -const
    A = [[v for v in row[1:]] + [-row[0]] for row in lin]
    red, piv = rref(A) if A else ([], [])
    nun = len(unknowns)
    if nun in piv:
        rep.add("polynomial splitting found", False, f"no solution with degree <= {degree}")
        return None, rep
    sol = [Fraction(0)] * nun
    for row, p in zip(red, piv):
        sol[p] = row[nun]
    comps = {}
    for ((i, j), mi), val in zip(unknowns, sol):
        if val:
            comps[(i, j)] = comps.get((i, j), f.zero) + f.const(val) * mono_exprs[mi]
    b = FormField(amb, 2, comps)
    ok = check_adapted_splitting(b, K, patch)
    rep.extend(ok, "found: ")
    rep.add("polynomial splitting found", ok.ok)
    rep.outputs["b"] = b
    return (b if ok.ok else None), rep


def frame_from_splitting(patch, b):
    """The spanning basic frame produced by an adapted splitting (check with reduce_courant)."""
    return auto_basic_frame(patch, b)


# ---------------------------------------------------------------------------
# Dirac reduction


def reduce_dirac(L, patch, K, frame, red=None):
    """Image of L cap K^perp in K^perp/K, in the classes of the basic frame."""
    f = patch.field
    rep = Report(f"dirac reduce {patch.name}/{L.name}")
    n = patch.ambient.dim
    red = red or reduce_courant(patch, K, frame, check_axioms_on_model=False, perturb=False)
    rL = L.restricted(patch)
    bad = [(i, j) for i in range(len(rL)) for j in range(i, len(rL)) if not f.is_zero(pairing(rL[i], rL[j]))]
    rep.add("L isotropic", not bad, f"{bad[:4]}" if bad else "")
    pts = _points(patch, K)
    rk = {L.at(patch, pd.p).rank for pd in pts}
    rep.add("L maximal (rank n at samples)", rk == {n}, f"ranks {sorted(rk)}")
    rK = K.restricted(patch)
    P = [[pairing(l, k) for l in rL] for k in rK]
    ker = sym_nullspace(f, P, len(rL)) if rK else [[f.one if i == j else f.zero for j in range(len(rL))]
                                                    for i in range(len(rL))]
    LK = [AlongSection([]) for _ in ker]
    for t, mu in enumerate(ker):
        acc = AlongSection([])
        for j, c in enumerate(mu):
            if c:
                acc = acc + L.frame[j].scale(c)
        LK[t] = acc
    ranks = set()
    for pd in pts:
        Lp = L.at(patch, pd.p)
        ranks.add(meet(Lp, pd.Kperp).rank)
    rep.add("L cap K^perp constant rank", len(ranks) == 1 and ranks == {len(ker)},
            f"ranks {sorted(ranks)}, symbolic {len(ker)}")
    if len(ranks) != 1:
        raise HypothesisError("L cap K^perp has a rank jump")
    cache = BracketCache(patch.H)
    bad_des = []
    for i, k in enumerate(K.frame):
        for t, l in enumerate(LK):
            br = bracket_along(patch, k, l, cache)
            for pd in pts:
                LpK = join(L.at(patch, pd.p), pd.K)
                if not LpK.contains(br.at(pd.p)):
                    bad_des.append((i, t))
                    break
    rep.add("[K, L cap K^perp] in L + K at samples", not bad_des, f"{bad_des[:4]}" if bad_des else "")
    if bad_des:
        rep.outputs["reduced frame"] = None
        return None, rep
    rf = [e.restrict(patch) for e in red.frame]
    Ginv = sym_inverse(f, [[pairing(a, b) for b in rf] for a in rf])
    rows = [_coeffs(patch, Ginv, l.restrict(patch), rf) for l in LK]
    canon, piv = sym_rref(f, rows)
    m = red.rank
    flat = _descend_all(patch, [x for r in canon for x in r], rep, "reduced Dirac frame")
    if flat is None:
        return None, rep
    canon = [flat[i * m:(i + 1) * m] for i in range(len(canon))]
    alg = red.algebroid
    rep.add("reduced frame has half rank", len(canon) * 2 == m, f"{len(canon)} of {m}")
    iso = all(f.is_zero(alg.pairing(a, b)) for a in canon for b in canon)
    rep.add("reduced Dirac structure isotropic", iso)
    inv_bad = []
    for i, a in enumerate(canon):
        for j, b in enumerate(canon):
            br = alg.bracket(a, b)
            for k, c in enumerate(canon):
                if not f.is_zero(alg.pairing(br, c)):
                    inv_bad.append((i, j, k))
    rep.add("reduced Dirac structure involutive", not inv_bad, f"{inv_bad[:4]}" if inv_bad else "")
    red.dirac_rows = canon
    rep.outputs["frame"] = canon
    if red.split:
        q = len(patch.quotient)
        graph = dirac_as_graph(f, canon, q)
        rep.outputs.update({k: FormField.from_table(patch.qchart, v) for k, v in graph.items()})
    return canon, rep


def dirac_as_graph(f, rows, q):
    """Describe a split-frame Lagrangian as graph(Pi) and/or graph(F) when transverse."""
    out = {}
    X = [r[:q] for r in rows]
    xi = [r[q:] for r in rows]
    for name, src, dst in (("Pi", xi, X), ("F", X, xi)):
        try:
            inv = sym_inverse(f, src)
        except HypothesisError:
            continue
        # rows: (src_t, dst_t); find combos with src = unit vector j
        tab = [[f.zero] * q for _ in range(q)]
        for j in range(q):
            comb = [inv[j][t] for t in range(len(rows))]
            for k in range(q):
                tab[j][k] = sum((comb[t] * dst[t][k] for t in range(len(rows)) if comb[t] and dst[t][k]), f.zero)
        out[name] = tab
    return out


# ---------------------------------------------------------------------------
# generalized complex reduction


def reduce_gcs(J, patch, K, frame, red=None, label=None):
    """Reduced generalized complex structure in the classes of the basic frame."""
    f = patch.field
    rep = Report(label or f"gcs reduce {patch.name}/{K.name}")
    n = patch.ambient.dim
    red = red or reduce_courant(patch, K, frame, check_axioms_on_model=False, perturb=False)
    pts = _points(patch, K)
    Jr = J.substitute(patch.embedding)
    ranks, contained = set(), True
    for pd in pts:
        Jm = Jr.at(pd.p)
        JK = PointSubspace(2 * n, [[sum(Jm[i][k] * v[k] for k in range(2 * n)) for i in range(2 * n)]
                                   for v in pd.K.basis])
        inter = meet(JK, pd.Kperp)
        ranks.add(inter.rank)
        if not inter.issubspace(pd.K):
            contained = False
    rep.add("J K cap K^perp contained in K", contained)
    rep.add("J K cap K^perp constant rank", len(ranks) == 1, f"ranks {sorted(ranks)}")
    if not contained or len(ranks) != 1:
        raise HypothesisError("J K cap K^perp hypotheses fail")
    rK = K.restricted(patch)
    frame = red.frame
    rf = [e.restrict(patch) for e in frame]
    # corrections k_a in K with J(e_a + k_a) in K^perp
    JKr = [Jr.apply(k) for k in rK]
    M = [[pairing(JKr[i], rK[j]) for i in range(len(rK))] for j in range(len(rK))]
    lifted = []
    for a, e in enumerate(frame):
        Je = Jr.apply(rf[a])
        rhs = [-pairing(Je, k) for k in rK]
        if rK:
            lam, ok = sym_solve(f, M, rhs)
            if not ok:
                rep.add("correction into K^perp cap J K^perp", False, f"frame member {a}")
                raise HypothesisError("frame member has no representative in K^perp cap J K^perp")
        else:
            lam = []
        corr = e
        for i, c in enumerate(lam):
            if c:
                corr = corr + K.frame[i].scale(c)
        lifted.append(corr)
    images = [x.apply(J) for x in lifted]
    cache = BracketCache(patch.H)
    nonbasic = [a for a, img in enumerate(images) if not is_basic(img, K, patch, pts, cache)]
    rep.add("J maps basic representatives to basic sections", not nonbasic,
            f"members {nonbasic}" if nonbasic else "")
    if nonbasic:
        raise HypothesisError("J does not preserve basic sections")
    Ginv = sym_inverse(f, [[pairing(a, b) for b in rf] for a in rf])
    cols = [_coeffs(patch, Ginv, img.restrict(patch), rf) for img in images]
    m = red.rank
    flat = _descend_all(patch, [cols[a][c] for c in range(m) for a in range(m)], rep, "reduced J")
    if flat is None:
        raise HypothesisError("reduced J depends on leaf coordinates")
    Mbar = [flat[c * m:(c + 1) * m] for c in range(m)]
    alg = red.algebroid
    sq_bad = []
    for i in range(m):
        for j in range(m):
            acc = sum((Mbar[i][k] * Mbar[k][j] for k in range(m) if Mbar[i][k] and Mbar[k][j]), f.zero)
            if not f.is_zero(acc + (1 if i == j else 0)):
                sq_bad.append((i, j))
    rep.add("reduced J^2 = -Id", not sq_bad, f"{sq_bad[:4]}" if sq_bad else "")
    orth_bad = []
    for a in range(m):
        for b in range(m):
            ja = [Mbar[c][a] for c in range(m)]
            jb = [Mbar[c][b] for c in range(m)]
            if not f.is_zero(alg.pairing(ja, jb) - red.pairing[a][b]):
                orth_bad.append((a, b))
    rep.add("reduced J preserves the pairing", not orth_bad, f"{orth_bad[:4]}" if orth_bad else "")
    Japply = lambda s: [sum((Mbar[c][a] * s[a] for a in range(m) if s[a] and Mbar[c][a]), f.zero)
                        for c in range(m)]
    nij_bad = []
    for a in range(m):
        for b in range(a, m):
            ea, eb = alg.basis(a), alg.basis(b)
            Ja, Jb = Japply(ea), Japply(eb)
            t1 = alg.bracket(Ja, Jb)
            t2 = alg.bracket(ea, eb)
            t3 = Japply([x + y for x, y in zip(alg.bracket(ea, Jb), alg.bracket(Ja, eb))])
            res = [x - y - z for x, y, z in zip(t1, t2, t3)]
            if not all(f.is_zero(x) for x in res):
                nij_bad.append((a, b))
    rep.add("reduced Nijenhuis tensor vanishes on frame", not nij_bad, f"{nij_bad[:4]}" if nij_bad else "")
    red.gcs_matrix = Mbar
    rep.outputs["matrix"] = Mbar
    if red.split:
        Jbar = GCSMatrix.from_matrix(patch.qchart, Mbar)
        red.gcs = Jbar
        rep.outputs["A"] = [list(r) for r in Jbar.A]
        rep.outputs["Pi"] = Jbar.Pi
        rep.outputs["omega"] = Jbar.omega
        secs = coordinate_sections(patch.qchart)
        bad = [(i, j) for i in range(len(secs)) for j in range(i, len(secs))
               if not nijenhuis(Jbar, secs[i], secs[j], red.twist).is_zero()]
        rep.add("Nijenhuis vanishes in the split model", not bad, f"{bad[:4]}" if bad else "")
    return red, rep


def positive_definite_point(S):
    """Sylvester test on leading principal minors (exact or float)."""
    from .linalg import det_point
    for k in range(1, len(S) + 1):
        if not det_point([r[:k] for r in S[:k]]) > 0:
            return False
    return True


def kahler_metric_matrix(J1, J2):
    """Gram matrix of G(e, e') = <J1 J2 e, e'> on the coordinate frame."""
    from .courant import matmul_sym
    f = J1.field
    n = J1.chart.dim
    P = matmul_sym(f, J1.matrix(), J2.matrix())
    Gs = split_pairing_matrix(f, n)
    # G[a][b] = sum_{k,l} P[k][a] Gs[k][l] delta_lb
    return [[sum((P[k][a] * Gs[k][b] for k in range(2 * n) if P[k][a] and Gs[k][b]), f.zero)
             for b in range(2 * n)] for a in range(2 * n)]


def reduce_kahler(J1, J2, patch, K, frame):
    f = patch.field
    from .courant import matmul_sym
    rep = Report(f"kahler reduce {patch.name}/{K.name}")
    A = matmul_sym(f, J1.matrix(), J2.matrix())
    B = matmul_sym(f, J2.matrix(), J1.matrix())
    comm = all(f.is_zero(a - b) for ra, rb in zip(A, B) for a, b in zip(ra, rb))
    if not comm:
        raise HypothesisError("J1 and J2 do not commute")
    rep.add("J1 J2 = J2 J1", True)
    G = kahler_metric_matrix(J1, J2)
    pts = _points(patch, K)
    pos = True
    for pd in pts:
        S = [[f.evaluate(patch.restrict(x), pd.p) for x in r] for r in G]
        if not positive_definite_point(S):
            pos = False
    if not pos:
        raise HypothesisError("G = <J1 J2 ., .> is not positive definite")
    rep.add("G positive definite at samples", True)
    n = patch.ambient.dim
    J1r = J1.substitute(patch.embedding)
    inv = True
    for pd in pts:
        Jm = J1r.at(pd.p)
        img = PointSubspace(2 * n, [[sum(Jm[i][k] * v[k] for k in range(2 * n)) for i in range(2 * n)]
                                    for v in pd.K.basis])
        if not img.same_as(pd.K):
            inv = False
    if not inv:
        raise HypothesisError("J1 K != K")
    rep.add("J1 K = K at samples", True)
    red1 = reduce_courant(patch, K, frame, check_axioms_on_model=False, perturb=False)
    red1, r1 = reduce_gcs(J1, patch, K, frame, red1, "reduce J1")
    rep.extend(r1, "J1: ")
    red2 = reduce_courant(patch, K, frame, check_axioms_on_model=False, perturb=False)
    red2, r2 = reduce_gcs(J2, patch, K, frame, red2, "reduce J2")
    rep.extend(r2, "J2: ")
    M1, M2 = red1.gcs_matrix, red2.gcs_matrix
    m = len(M1)
    P = [[sum((M1[i][k] * M2[k][j] for k in range(m)), f.zero) for j in range(m)] for i in range(m)]
    Q = [[sum((M2[i][k] * M1[k][j] for k in range(m)), f.zero) for j in range(m)] for i in range(m)]
    rep.add("reduced pair commutes", all(f.is_zero(a - b) for ra, rb in zip(P, Q) for a, b in zip(ra, rb)))
    Gbar = [[sum((P[k][a] * red1.pairing[k][b] for k in range(m)), f.zero) for b in range(m)] for a in range(m)]
    ok = True
    for qp in patch.qsamples:
        S = [[f.evaluate(x, qp) for x in r] for r in Gbar]
        if not positive_definite_point(S):
            ok = False
    rep.add("reduced G positive definite at quotient samples", ok)
    return (red1, red2), rep
