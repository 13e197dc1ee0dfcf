"""The split exact Courant algebroid TM + T*M on a chart.

Conventions:

* pairing  <X+a, Y+b> = (b(X) + a(Y)) / 2
* bracket  [X1+a1, X2+a2]_H = [X1,X2] + L_{X1} a2 - i_{X2} d a1 + i_{X2} i_{X1} H
* D f = df, so that [e,e] = D<e,e>
* gauge    e^B (X+a) = X + a + i_X B, and [e^B u, e^B v]_H = e^B [u, v]_{H+dB}

Sections store components in the coordinate basis of their chart. A section
"restricted" to a submanifold keeps ambient indices but its coefficients are
written in the submanifold's chart variables; such sections may be paired and
evaluated, but must not be differentiated.
"""

from __future__ import annotations

from functools import singledispatch
from itertools import combinations

from .errors import HypothesisError
from .forms import FormField
from .linalg import PointSubspace, sym_inverse
from .report import Report


class GenSection:
    __slots__ = ("chart", "vec", "form")

    def __init__(self, chart, vec=None, form=None):
        f = chart.field
        n = chart.dim
        vec = [f.zero] * n if vec is None else [f.const(x) for x in vec]
        form = [f.zero] * n if form is None else [f.const(x) for x in form]
        if len(vec) != n or len(form) != n:
            raise ValueError(f"section needs {n} vector and {n} covector components")
        self.chart = chart
        self.vec = tuple(vec)
        self.form = tuple(form)

    @classmethod
    def from_names(cls, chart, vector=None, form=None):
        """``GenSection.from_names(ch, {"x1": "y1"}, {"x2": "1"})`` = y1 d/dx1 + dx2."""
        v = chart.vector(vector or {})
        w = chart.vector(form or {})
        return cls(chart, v, w)

    @classmethod
    def zero(cls, chart):
        return cls(chart)

    @property
    def field(self):
        return self.chart.field

    def components(self):
        return self.vec + self.form

    def __add__(self, other):
        return GenSection(self.chart, [a + b for a, b in zip(self.vec, other.vec)],
                          [a + b for a, b in zip(self.form, other.form)])

    def __sub__(self, other):
        return GenSection(self.chart, [a - b for a, b in zip(self.vec, other.vec)],
                          [a - b for a, b in zip(self.form, other.form)])

    def __neg__(self):
        return GenSection(self.chart, [-a for a in self.vec], [-a for a in self.form])

    def scale(self, f):
        f = self.field.const(f)
        return GenSection(self.chart, [a * f for a in self.vec], [a * f for a in self.form])

    def is_zero(self):
        fz = self.field.is_zero
        return all(fz(x) for x in self.components())

    def equals(self, other):
        return (self - other).is_zero()

    def restrict(self, mapping):
        """Substitute an embedding into the coefficients (indices stay ambient)."""
        s = self.field.subs
        return GenSection(self.chart, [s(x, mapping) for x in self.vec],
                          [s(x, mapping) for x in self.form])

    def at(self, point):
        ev = self.field.evaluate
        return [ev(x, point) for x in self.components()]

    def anchor(self):
        return list(self.vec)

    def __repr__(self):
        names = self.chart.coords
        parts = [f"({x})*d/d{n}" for x, n in zip(self.vec, names) if x]
        parts += [f"({x})*d{n}" for x, n in zip(self.form, names) if x]
        return "GenSection(" + (" + ".join(parts) or "0") + ")"


def pairing(e1, e2):
    f = e1.field
    total = f.zero
    for x, a in zip(e1.vec, e2.form):
        if x and a:
            total = total + x * a
    for x, a in zip(e2.vec, e1.form):
        if x and a:
            total = total + x * a
    return total / 2 if total else total


def split_pairing_matrix(field, n):
    """Gram matrix of the coordinate frame (d/dx_i, dx_i)."""
    half = field.const(1) / 2
    z = field.zero
    return [[half if (j == i + n or i == j + n) else z for j in range(2 * n)] for i in range(2 * n)]


class _Diff:
    """Memoised partial derivatives of section components."""

    def __init__(self, chart):
        self.chart = chart
        self.cache = {}

    def __call__(self, e, i):
        if not e:
            return e
        key = (id(e), i)
        hit = self.cache.get(key)
        if hit is None:
            hit = (e, self.chart.d(e, i))
            self.cache[key] = hit
        return hit[1]


def lie_bracket(chart, X, Y, d=None):
    d = d or _Diff(chart)
    n = chart.dim
    f = chart.field
    out = []
    for j in range(n):
        acc = f.zero
        for i in range(n):
            if X[i] and Y[j]:
                t = d(Y[j], i)
                if t:
                    acc = acc + X[i] * t
            if Y[i] and X[j]:
                t = d(X[j], i)
                if t:
                    acc = acc - Y[i] * t
        out.append(acc)
    return out


def twisted_bracket(e1, e2, H=None, drop_twist=False):
    """Twisted Courant (Dorfman) bracket. ``drop_twist`` exists for negative controls."""
    ch = e1.chart
    f = ch.field
    n = ch.dim
    d = _Diff(ch)
    X1, a1, X2, a2 = e1.vec, e1.form, e2.vec, e2.form
    vec = lie_bracket(ch, X1, X2, d)
    form = []
    for j in range(n):
        acc = f.zero
        for i in range(n):
            # L_{X1} a2 = X1^i d_i a2_j + a2_i d_j X1^i
            if X1[i] and a2[j]:
                t = d(a2[j], i)
                if t:
                    acc = acc + X1[i] * t
            if a2[i] and X1[i]:
                t = d(X1[i], j)
                if t:
                    acc = acc + a2[i] * t
            # - i_{X2} d a1 = - X2^i (d_i a1_j - d_j a1_i)
            if X2[i]:
                t = d(a1[j], i) - d(a1[i], j)
                if t:
                    acc = acc - X2[i] * t
        form.append(acc)
    if H is not None and not drop_twist and H.comps:
        tw = H.interior(X1).interior(X2).vector()
        form = [a + b for a, b in zip(form, tw)]
    return GenSection(ch, vec, form)


bracket = twisted_bracket


def d_operator(chart, fn):
    """D f = df (as a section with zero vector part)."""
    return GenSection(chart, None, [chart.d(fn, i) for i in range(chart.dim)])


def apply_vector_field(chart, X, fn):
    return chart.apply_vector(X, fn)


# ---------------------------------------------------------------------------
# generalized complex structures


class GCSMatrix:
    """Endomorphism J = [[A, Pi], [omega, -A*]] of TM + T*M.

    ``A[i][j]`` is the i-th component of A(d/dx_j); ``Pi`` is a bivector
    (FormField container) with Pi#(xi) = Pi(xi, .); ``omega`` a 2-form with
    omega(X) = omega(X, .).
    """

    __slots__ = ("chart", "A", "Pi", "omega")

    def __init__(self, chart, A=None, Pi=None, omega=None):
        f = chart.field
        n = chart.dim
        self.chart = chart
        self.A = tuple(tuple(f.const(x) for x in row) for row in
                       (A if A is not None else [[f.zero] * n for _ in range(n)]))
        self.Pi = Pi if Pi is not None else FormField(chart, 2)
        self.omega = omega if omega is not None else FormField(chart, 2)
        if len(self.A) != n or any(len(r) != n for r in self.A):
            raise ValueError("A block has the wrong shape")

    @classmethod
    def symplectic(cls, omega):
        ch = omega.chart
        f = ch.field
        n = ch.dim
        W = [[omega[i, j] for i in range(n)] for j in range(n)]  # W[j][i] = omega_ij
        try:
            P = sym_inverse(f, W)
        except HypothesisError:
            raise HypothesisError("symplectic form is degenerate") from None
        Pi = FormField.from_table(ch, [[-P[j][i] for j in range(n)] for i in range(n)])
        return cls(ch, None, Pi, omega)

    @classmethod
    def complex(cls, chart, A):
        return cls(chart, A, None, None)

    @classmethod
    def from_matrix(cls, chart, M):
        n = chart.dim
        f = chart.field
        A = [[M[i][j] for j in range(n)] for i in range(n)]
        Pi = FormField.from_table(chart, [[M[j][n + i] for j in range(n)] for i in range(n)])
        om = FormField.from_table(chart, [[M[n + j][i] for j in range(n)] for i in range(n)])
        J = cls(chart, A, Pi, om)
        for i in range(n):
            for j in range(n):
                if not f.is_zero(M[n + j][n + i] + A[i][j]):
                    raise HypothesisError("lower-right block is not -A*")
        for i in range(n):
            for j in range(n):
                if not f.is_zero(M[j][n + i] + M[i][n + j]) or not f.is_zero(M[n + j][i] + M[n + i][j]):
                    raise HypothesisError("off-diagonal blocks are not antisymmetric")
        return J

    @property
    def field(self):
        return self.chart.field

    def matrix(self):
        n = self.chart.dim
        f = self.field
        M = [[f.zero] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            for j in range(n):
                M[i][j] = self.A[i][j]
                M[j][n + i] = self.Pi[i, j]
                M[n + j][i] = self.omega[i, j]
                M[n + j][n + i] = -self.A[i][j]
        return M

    def apply(self, e):
        n = self.chart.dim
        f = self.field
        X, a = e.vec, e.form
        vec = [f.zero] * n
        form = [f.zero] * n
        for i in range(n):
            for j in range(n):
                if X[j] and self.A[i][j]:
                    vec[i] = vec[i] + self.A[i][j] * X[j]
                if a[j] and self.A[j][i]:
                    form[i] = form[i] - self.A[j][i] * a[j]
        pv = self.Pi.contract_vector(list(a)) if self.Pi.comps else None
        ov = self.omega.contract_vector(list(X)) if self.omega.comps else None
        if pv:
            vec = [x + y for x, y in zip(vec, pv)]
        if ov:
            form = [x + y for x, y in zip(form, ov)]
        return GenSection(e.chart, vec, form)

    __call__ = apply

    def substitute(self, mapping):
        s = self.field.subs
        return GCSMatrix(self.chart, [[s(x, mapping) for x in r] for r in self.A],
                         self.Pi.substitute(mapping), self.omega.substitute(mapping))

    def at(self, point):
        ev = self.field.evaluate
        return [[ev(x, point) for x in r] for r in self.matrix()]

    def __add__(self, other):
        return GCSMatrix(self.chart, [[a + b for a, b in zip(r, s)] for r, s in zip(self.A, other.A)],
                         self.Pi + other.Pi, self.omega + other.omega)

    def equals(self, other):
        f = self.field
        return all(f.is_zero(a - b) for r, s in zip(self.matrix(), other.matrix()) for a, b in zip(r, s))

    def validate(self):
        """Algebraic invariants: J^2 = -Id and <J.,J.> = <.,.>. Returns a Report."""
        rep = Report("gcs algebraic invariants")
        f = self.field
        M = self.matrix()
        m = len(M)
        sq_bad = []
        for i in range(m):
            for j in range(m):
                acc = f.zero
                for k in range(m):
                    if M[i][k] and M[k][j]:
                        acc = acc + M[i][k] * M[k][j]
                if i == j:
                    acc = acc + 1
                if not f.is_zero(acc):
                    sq_bad.append((i, j))
        rep.add("J^2 = -Id", not sq_bad, f"nonzero entries {sq_bad[:4]}" if sq_bad else "")
        # orthogonality: M^T G M = G with G the split Gram matrix
        n = m // 2
        G = split_pairing_matrix(f, n)
        orth_bad = []
        for i in range(m):
            for j in range(i, m):
                acc = f.zero
                for k in range(m):
                    for l in range(m):
                        if G[k][l] and M[k][i] and M[l][j]:
                            acc = acc + M[k][i] * G[k][l] * M[l][j]
                if not f.is_zero(acc - G[i][j]):
                    orth_bad.append((i, j))
        rep.add("pairing preserved", not orth_bad, f"nonzero entries {orth_bad[:4]}" if orth_bad else "")
        return rep


def matmul_sym(field, a, b):
    out = []
    for row in a:
        new = []
        for j in range(len(b[0])):
            acc = field.zero
            for k, x in enumerate(row):
                if x and b[k][j]:
                    acc = acc + x * b[k][j]
            new.append(acc)
        out.append(new)
    return out


def gauge_matrix(B, sign=1):
    ch = B.chart
    f = ch.field
    n = ch.dim
    M = [[f.one if i == j else f.zero for j in range(2 * n)] for i in range(2 * n)]
    for i in range(n):
        for j in range(n):
            # (i_X B)_j = X^i B_ij
            if B[i, j]:
                M[n + j][i] = B[i, j] if sign > 0 else -B[i, j]
    return M


@singledispatch
def gauge_transform(x, B):
    raise TypeError(f"cannot gauge-transform {type(x).__name__}")


@gauge_transform.register
def _(x: GenSection, B):
    extra = B.contract_vector(list(x.vec))
    return GenSection(x.chart, x.vec, [a + b for a, b in zip(x.form, extra)])


@gauge_transform.register
def _(x: GCSMatrix, B):
    """Conjugation J -> e^B J e^{-B}."""
    f = x.field
    M = matmul_sym(f, matmul_sym(f, gauge_matrix(B, 1), x.matrix()), gauge_matrix(B, -1))
    return GCSMatrix.from_matrix(x.chart, M)


@gauge_transform.register
def _(x: FormField, B):
    """Twist: the H' with e^B : (E, H') -> (E, H) an isomorphism is H + dB."""
    if x.degree != 3:
        raise TypeError("only 3-form twists can be gauge transformed")
    return x + B.d()


def gauged_blocks(J, B):
    """Blocks of e^{-B} J e^{B} written out: (A + Pi B, Pi, omega - B Pi B - B A - A* B)."""
    return gauge_transform(J, -B)


# ---------------------------------------------------------------------------
# axioms and tensors


def check_axioms(H, sections, functions=(), triples=None, bracket_fn=None, label="axioms"):
    """Verify C1-C5 on ``sections``; C3 uses each function of ``functions``.

    ``triples`` defaults to all ordered triples; ``bracket_fn(e1, e2)`` replaces
    the bracket (for negative controls).
    """
    br = bracket_fn or (lambda a, b: twisted_bracket(a, b, H))
    rep = Report(label)
    secs = list(sections)
    if not secs:
        return rep
    ch = secs[0].chart
    if triples is None:
        triples = [(a, b, c) for a in range(len(secs)) for b in range(len(secs)) for c in range(len(secs))]
    memo = {}

    def B(i, j, x=None, y=None):
        if x is None:
            key = (i, j)
            if key not in memo:
                memo[key] = br(secs[i], secs[j])
            return memo[key]
        return br(x, y)

    fails = {k: [] for k in ("C1", "C2", "C3", "C4", "C5")}
    seen_pairs = set()
    for (i, j, k) in triples:
        e1, e2, e3 = secs[i], secs[j], secs[k]
        lhs = br(e1, B(j, k))
        rhs = br(B(i, j), e3) + br(e2, B(i, k))
        if not lhs.equals(rhs):
            fails["C1"].append((i, j, k))
        p1 = pairing(B(i, j), e3) + pairing(e2, B(i, k))
        p0 = ch.apply_vector(list(e1.vec), pairing(e2, e3))
        if not ch.field.is_zero(p0 - p1):
            fails["C4"].append((i, j, k))
        if (i, j) not in seen_pairs:
            seen_pairs.add((i, j))
            lie = lie_bracket(ch, e1.vec, e2.vec)
            if not all(ch.field.is_zero(a - b) for a, b in zip(B(i, j).vec, lie)):
                fails["C2"].append((i, j))
            for fi, fn in enumerate(functions):
                lhs3 = br(e1, e2.scale(fn))
                rhs3 = B(i, j).scale(fn) + e2.scale(ch.apply_vector(list(e1.vec), fn))
                if not lhs3.equals(rhs3):
                    fails["C3"].append((i, j, fi))
    for i in range(len(secs)):
        if not B(i, i).equals(d_operator(ch, pairing(secs[i], secs[i]))):
            fails["C5"].append(i)
    for name in ("C1", "C2", "C3", "C4", "C5"):
        bad = fails[name]
        rep.add(name, not bad, f"{len(bad)} failing cases, e.g. {bad[:3]}" if bad else "",
                failures=len(bad))
    rep.outputs["triples"] = len(triples)
    return rep


def nijenhuis(J, e1, e2, H=None):
    br = lambda a, b: twisted_bracket(a, b, H)
    Je1, Je2 = J.apply(e1), J.apply(e2)
    return br(Je1, Je2) - br(e1, e2) - J.apply(br(e1, Je2) + br(Je1, e2))


def coordinate_sections(chart):
    out = []
    for i in range(chart.dim):
        out.append(GenSection(chart, chart.basis_vector(i), None))
    for i in range(chart.dim):
        out.append(GenSection(chart, None, chart.basis_vector(i)))
    return out


def poisson_of_gcs(J):
    """The bivector Pi with Pi# = pi o J o pi* (the upper-right block)."""
    return J.Pi


def schouten_residual(Pi):
    """Components of the Jacobiator of a bivector; all zero iff Pi is Poisson."""
    ch = Pi.chart
    n = ch.dim
    f = ch.field
    T = Pi.table()
    out = {}
    for i, j, k in combinations(range(n), 3):
        acc = f.zero
        for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
            for l in range(n):
                if T[l][a] and T[b][c]:
                    acc = acc + T[l][a] * ch.d(T[b][c], l)
        if acc:
            out[(i, j, k)] = acc
    return FormField(ch, 3, out)


def is_poisson(Pi):
    return schouten_residual(Pi).is_zero()


def dirac_check(frame, H, points, label="dirac"):
    """Isotropy (exact), rank n at points and bracket closure of a frame."""
    rep = Report(label)
    if not frame:
        rep.error("frame", "empty frame")
        return rep
    ch = frame[0].chart
    f = ch.field
    n = ch.dim
    if len(frame) != n:
        rep.add("frame size", False, f"{len(frame)} members, expected {n}")
    bad_iso = [(i, j) for i in range(len(frame)) for j in range(i, len(frame))
               if not f.is_zero(pairing(frame[i], frame[j]))]
    rep.add("isotropic", not bad_iso, f"pairs {bad_iso[:4]}" if bad_iso else "")
    ranks = []
    for p in points:
        ranks.append(PointSubspace(2 * n, [e.at(p) for e in frame]).rank)
    rep.add("rank n at samples", all(r == n for r in ranks), f"ranks {sorted(set(ranks))}")
    brs = {(i, j): twisted_bracket(frame[i], frame[j], H)
           for i in range(len(frame)) for j in range(len(frame)) if i != j}
    # symbolic: a maximal isotropic L is closed iff <[a,b], c> == 0 for frame members
    bad_sym = [(i, j, k) for (i, j), b in brs.items() for k in range(len(frame))
               if not f.is_zero(pairing(b, frame[k]))]
    rep.add("involutive (pairing test)", not bad_sym, f"triples {bad_sym[:4]}" if bad_sym else "")
    bad_pt = []
    for p in points:
        L = PointSubspace(2 * n, [e.at(p) for e in frame])
        for key, b in brs.items():
            if not L.contains(b.at(p)):
                bad_pt.append(key)
                break
    rep.add("involutive at samples", not bad_pt, f"pairs {bad_pt[:4]}" if bad_pt else "")
    return rep


def graph_frame(chart, b):
    """Frame {d/dx_i + i_{d/dx_i} b} of the graph of a 2-form."""
    return [gauge_transform(GenSection(chart, chart.basis_vector(i)), b) for i in range(chart.dim)]


def poisson_graph_frame(chart, Pi):
    """Frame {(Pi#dx_i, dx_i)} of the graph of a bivector."""
    out = []
    for i in range(chart.dim):
        a = chart.basis_vector(i)
        out.append(GenSection(chart, Pi.contract_vector(a), a))
    return out


def splitting_curvature(b, H=None):
    """Curvature of the splitting X -> X + i_X b: H + db, cross-checked on coordinate fields.

    Returns ``(form, report)``.
    """
    ch = b.chart
    Hs = b.d() if H is None else H + b.d()
    rep = Report("splitting curvature")
    sig = [gauge_transform(GenSection(ch, ch.basis_vector(i)), b) for i in range(ch.dim)]
    bad = []
    for i, j, k in combinations(range(ch.dim), 3):
        val = pairing(twisted_bracket(sig[i], sig[j], H), sig[k]) * 2
        if not ch.field.is_zero(val - Hs[i, j, k]):
            bad.append((i, j, k))
    rep.add("H_sigma(X,Y,Z) = 2<[sX,sY],sZ>", not bad, f"{bad[:3]}" if bad else "")
    return Hs, rep
