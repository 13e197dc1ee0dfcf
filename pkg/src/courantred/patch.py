"""Submanifold patches and sections along them.

A :class:`PatchSetup` describes a submanifold C of the ambient chart through
an embedding ``phi`` of a foliation-adapted chart ``(u..., v...)``: the leaves
are the slices v = const, and the v's are coordinates on the leaf space.
Alongside the embedding the user supplies

* defining functions g_i cutting out C (their differentials frame N*C),
* ambient vector fields ``T_c`` with ``T_c|_C = phi_* d/dc`` (defaults are
  computed when the chart coordinates are also ambient coordinates),
* ambient closed 1-forms ``eta_v`` with ``phi^* eta_v = dv``.

Sections along C are written as :class:`AlongSection`: finite sums
``sum lambda_j s_j`` of ambient sections with coefficients that are
functions on the chart.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from .courant import GenSection, pairing, twisted_bracket
from .errors import HypothesisError, PoleError, UnknownNameError
from .forms import Chart, FormField, embedding_jacobian
from .linalg import PointSubspace, sym_inverse, sym_rref
from .report import Report


class PatchSetup:
    def __init__(self, name, ambient, leaf, quotient, embedding, defining=(), H=None,
                 coordinate_fields=None, quotient_forms=None, points=(), ranges=None,
                 random_count=10, lattice=2, seed=0, quotient_points=()):
        f = ambient.field
        self.name = name
        self.ambient = ambient
        self.field = f
        self.H = H
        self.leaf = tuple(leaf)
        self.quotient = tuple(quotient)
        self.chart = Chart(f, self.leaf + self.quotient)
        self.qchart = Chart(f, self.quotient)
        self.embedding = {k: f.const(v) for k, v in embedding.items()}
        for k in ambient.coords:
            if k not in self.embedding:
                raise UnknownNameError(f"patch {name!r}: embedding misses ambient coordinate {k!r}")
        for k, e in self.embedding.items():
            bad = e.variables() - set(self.chart.coords) - set(f.generator_names)
            if bad:
                raise UnknownNameError(f"patch {name!r}: embedding of {k!r} uses {sorted(bad)}")
        self.defining = [f.const(g) for g in defining]
        self.jac = embedding_jacobian(ambient, self.chart, self.embedding)
        self._pivots, self._linv = self._left_inverse()
        self.ranges = dict(ranges or {})
        self.seed = seed
        self._restrict_cache = {}
        self._tangent_cache = {}
        self.T = self._coordinate_fields(coordinate_fields or {})
        self.eta = self._quotient_forms(quotient_forms or {})
        self.samples = self._make_samples(points, random_count, lattice)
        self.qsamples = self._make_qsamples(quotient_points, random_count, lattice)

    # ------------------------------------------------------------------ setup
    def _left_inverse(self):
        d = self.chart.dim
        f = self.field
        red, piv = sym_rref(f, [list(r) for r in zip(*self.jac)])  # rows = chart directions
        if len(piv) < d:
            raise HypothesisError(f"patch {self.name!r}: embedding is not an immersion")
        rows = piv[:d]
        sub = [[self.jac[j][c] for c in range(d)] for j in rows]
        inv = sym_inverse(f, sub)
        return rows, inv

    def _coordinate_fields(self, given):
        f = self.field
        amb = self.ambient
        out = {}
        for ci, c in enumerate(self.chart.coords):
            if c in given:
                vec = given[c]
                vec = amb.vector(vec) if isinstance(vec, dict) else [f.const(x) for x in vec]
            else:
                vec = [self.jac[j][ci] for j in range(amb.dim)]
                allowed = set(amb.coords)
                if any(x.variables() - allowed for x in vec):
                    vec = None
                elif any(x.has_generators() for x in vec):
                    vec = None
            out[c] = GenSection(amb, vec) if vec is not None else None
        return out

    def _quotient_forms(self, given):
        f = self.field
        amb = self.ambient
        out = {}
        for v in self.quotient:
            if v in given:
                w = given[v]
                w = amb.vector(w) if isinstance(w, dict) else [f.const(x) for x in w]
                out[v] = GenSection(amb, None, w)
            elif v in amb.coords and self.embedding.get(v) == f.var(v):
                out[v] = GenSection(amb, None, amb.basis_vector(amb.position(v)))
            else:
                out[v] = None
        return out

    def _regular(self, pt):
        f = self.field
        try:
            for e in self.embedding.values():
                val = f.evaluate(e, pt)
                if isinstance(val, float) and abs(val) > 1e8:
                    return False
            for row in self.jac:
                for e in row:
                    f.evaluate(e, pt)
        except (PoleError, ValueError, OverflowError, ZeroDivisionError):
            return False
        return True

    def _grid(self, coords, lattice):
        if not coords or lattice <= 0:
            return [{}] if not coords else []
        axes = []
        for c in coords:
            lo, hi = self._range(c)
            axes.append([lo + (hi - lo) * Fraction(k, lattice + 1) for k in range(1, lattice + 1)])
        return [dict(zip(coords, vals)) for vals in product(*axes)]

    def _range(self, c):
        r = self.ranges.get(c) or self.field.ranges.get(c)
        if r is None:
            return Fraction(-2), Fraction(2)
        return Fraction(r[0]), Fraction(r[1])

    def _random(self, coords, count, salt):
        rng = random.Random((self.seed, self.name, salt).__repr__())
        out = []
        for _ in range(count):
            pt = {}
            for c in coords:
                lo, hi = self._range(c)
                pt[c] = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
            out.append(pt)
        return out

    def _make_samples(self, points, random_count, lattice):
        coords = self.chart.coords
        pts = [{k: Fraction(v) for k, v in p.items()} for p in points]
        for p in pts:
            missing = set(coords) - set(p)
            if missing:
                raise UnknownNameError(f"sample point {p} misses {sorted(missing)}")
        pts += self._grid(coords, lattice) + self._random(coords, random_count, "chart")
        good = [p for p in pts if self._regular(p)]
        if not good:
            raise HypothesisError(f"patch {self.name!r}: no regular sample points")
        return good

    def _make_qsamples(self, points, random_count, lattice):
        q = self.quotient
        pts = [{k: Fraction(v) for k, v in p.items()} for p in points]
        pts += self._grid(q, lattice) + self._random(q, random_count, "quotient")
        return pts or [{}]

    def with_samples(self, points):
        clone = object.__new__(PatchSetup)
        clone.__dict__.update(self.__dict__)
        clone.samples = [{k: Fraction(v) for k, v in p.items()} for p in points]
        return clone

    def base_leaf_point(self):
        """Leaf-coordinate values used when descending u-independent data."""
        p = self.samples[0]
        return {u: p[u] for u in self.leaf}

    # ------------------------------------------------------------ restriction
    def restrict(self, e):
        key = (e.num, e.den)
        hit = self._restrict_cache.get(key)
        if hit is None:
            hit = self.field.subs(e, self.embedding)
            self._restrict_cache[key] = hit
        return hit

    def restrict_section(self, s):
        return GenSection(s.chart, [self.restrict(x) for x in s.vec], [self.restrict(x) for x in s.form])

    def chart_vector_of(self, V):
        """Chart components w with dphi . w = V (V ambient components along C).

        Returns ``None`` when V is not tangent to C.
        """
        key = tuple((x.num, x.den) for x in V)
        if key in self._tangent_cache:
            return self._tangent_cache[key]
        f = self.field
        d = self.chart.dim
        VR = [V[j] for j in self._pivots]
        w = []
        for c in range(d):
            acc = f.zero
            for k in range(d):
                if self._linv[c][k] and VR[k]:
                    acc = acc + self._linv[c][k] * VR[k]
            w.append(acc)
        ok = True
        for j in range(self.ambient.dim):
            if j in self._pivots:
                continue
            acc = -V[j]
            for c in range(d):
                if self.jac[j][c] and w[c]:
                    acc = acc + self.jac[j][c] * w[c]
            if not f.is_zero(acc):
                ok = False
                break
        out = w if ok else None
        self._tangent_cache[key] = out
        return out

    def push(self, w):
        """Ambient components (along C) of the chart vector w."""
        f = self.field
        return [sum((self.jac[j][c] * w[c] for c in range(len(w)) if w[c] and self.jac[j][c]), f.zero)
                for j in range(self.ambient.dim)]

    def lift_covector(self, grad):
        """Ambient covector zeta along C with phi^* zeta = sum grad_c dc."""
        f = self.field
        d = self.chart.dim
        zeta = [f.zero] * self.ambient.dim
        for k, j in enumerate(self._pivots):
            acc = f.zero
            for c in range(d):
                if self._linv[c][k] and grad[c]:
                    acc = acc + self._linv[c][k] * grad[c]
            zeta[j] = acc
        return zeta

    def conormal_frame(self):
        amb = self.ambient
        return [GenSection(amb, None, [amb.d(g, i) for i in range(amb.dim)]) for g in self.defining]

    def leaf_positions(self):
        return list(range(len(self.leaf)))

    def quotient_positions(self):
        return list(range(len(self.leaf), self.chart.dim))

    # -------------------------------------------------------------- descent
    def is_leaf_independent(self, e):
        return all(self.field.is_zero(self.chart.d(e, i)) for i in self.leaf_positions())

    def descend(self, e):
        """Write a leaf-independent chart function on the quotient chart."""
        if not self.leaf:
            return e
        gens_on_leaf = any(self.field._rules.get(u) for u in self.leaf)
        if gens_on_leaf:
            return e
        base = {u: self.field.const(v) for u, v in self.base_leaf_point().items()}
        return self.field.subs(e, base)

    def quotient_point(self, p):
        return {v: p[v] for v in self.quotient}

    def pullback(self, form):
        return form.pullback(self.chart, self.embedding, self.jac)

    def validate(self):
        """Structural checks on the patch data. Returns a Report."""
        rep = Report(f"patch {self.name}")
        f = self.field
        amb = self.ambient
        bad = [i for i, g in enumerate(self.defining) if not f.is_zero(self.restrict(g))]
        rep.add("defining functions vanish on C", not bad, f"indices {bad}" if bad else "")
        codim = amb.dim - self.chart.dim
        rep.add("number of defining functions = codimension", len(self.defining) == codim,
                f"{len(self.defining)} vs {codim}")
        nc = self.conormal_frame()
        ranks = set()
        for p in self.samples:
            rows = [[f.evaluate(self.restrict(x), p) for x in s.form] for s in nc]
            ranks.add(PointSubspace(amb.dim, rows).rank if rows else 0)
        rep.add("conormal frame independent at samples", ranks <= {len(nc)}, f"ranks {sorted(ranks)}")
        bad_t = []
        missing_t = []
        for ci, c in enumerate(self.chart.coords):
            T = self.T.get(c)
            if T is None:
                missing_t.append(c)
                continue
            want = [self.jac[j][ci] for j in range(amb.dim)]
            got = [self.restrict(x) for x in T.vec]
            if not all(f.is_zero(a - b) for a, b in zip(got, want)):
                bad_t.append(c)
        rep.add("coordinate fields restrict to phi_* d/dc", not bad_t, f"{bad_t}" if bad_t else "")
        if missing_t:
            rep.outputs["coordinate fields not supplied"] = missing_t
        bad_e = []
        for v, eta in self.eta.items():
            if eta is None:
                continue
            form = FormField(amb, 1, {(i,): x for i, x in enumerate(eta.form) if x})
            pb = self.pullback(form)
            target = [f.one if c == v else f.zero for c in self.chart.coords]
            closed = form.d().is_zero()
            if not closed or not all(f.is_zero(pb[i] - t) for i, t in enumerate(target)):
                bad_e.append(v)
        rep.add("quotient coframe closed with phi^* eta_v = dv", not bad_e, f"{bad_e}" if bad_e else "")
        if self.H is not None:
            rep.add("H closed", self.H.d().is_zero())
        return rep


class AlongSection:
    """``sum_j coef_j * s_j`` with chart-function coefficients and ambient sections."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple((c, s) for c, s in terms if c)

    @classmethod
    def of(cls, x, field=None):
        if isinstance(x, AlongSection):
            return x
        return cls([(x.field.one, x)])

    def __add__(self, other):
        return AlongSection(self.terms + AlongSection.of(other).terms)

    def scale(self, c):
        return AlongSection([(a * c, s) for a, s in self.terms])

    def __neg__(self):
        return AlongSection([(-a, s) for a, s in self.terms])

    def __sub__(self, other):
        return self + (-AlongSection.of(other))

    def apply(self, endo):
        """Apply a C-infinity-linear endomorphism (e.g. a GCSMatrix) termwise."""
        return AlongSection([(a, endo.apply(s)) for a, s in self.terms])

    def restrict(self, patch):
        amb = patch.ambient
        f = patch.field
        vec = [f.zero] * amb.dim
        form = [f.zero] * amb.dim
        for a, s in self.terms:
            rs = patch.restrict_section(s)
            vec = [x + a * y if y else x for x, y in zip(vec, rs.vec)]
            form = [x + a * y if y else x for x, y in zip(form, rs.form)]
        return GenSection(amb, vec, form)


class BracketCache:
    """Ambient brackets keyed by object identity (the key objects are kept alive)."""

    def __init__(self, H):
        self.H = H
        self.store = {}

    def __call__(self, s, t):
        key = (id(s), id(t))
        hit = self.store.get(key)
        if hit is None:
            hit = (s, t, twisted_bracket(s, t, self.H))
            self.store[key] = hit
        return hit[2]


def along_pairing(patch, a, b):
    return pairing(AlongSection.of(a).restrict(patch), AlongSection.of(b).restrict(patch))


def _derivative_along(patch, anchor_restricted, fn, what):
    if fn.is_constant():
        return patch.field.zero
    w = patch.chart_vector_of(anchor_restricted)
    if w is None:
        raise HypothesisError(f"anchor of {what} is not tangent to C")
    return patch.chart.apply_vector(w, fn)


def bracket_along(patch, a, b, cache=None):
    """Restriction to C of the bracket of two sections along C (meaningful modulo K).

    Uses [f s, g t] = fg[s,t] + f (pi(s) g) t - g (pi(t) f) s + 2 g <s,t> D f, with
    derivatives of chart functions taken along the anchors, which must be tangent
    to C whenever the corresponding coefficient is not constant.
    """
    a = AlongSection.of(a)
    b = AlongSection.of(b)
    cache = cache or BracketCache(patch.H)
    f = patch.field
    amb = patch.ambient
    vec = [f.zero] * amb.dim
    form = [f.zero] * amb.dim

    def acc(coef, sec):
        nonlocal vec, form
        if not coef:
            return
        vec = [x + coef * y if y else x for x, y in zip(vec, sec.vec)]
        form = [x + coef * y if y else x for x, y in zip(form, sec.form)]

    for lam, s in a.terms:
        rs = patch.restrict_section(s)
        for mu, t in b.terms:
            rt = patch.restrict_section(t)
            acc(lam * mu, patch.restrict_section(cache(s, t)))
            if not mu.is_constant():
                acc(lam * _derivative_along(patch, list(rs.vec), mu, "left section"), rt)
            if not lam.is_constant():
                acc(-mu * _derivative_along(patch, list(rt.vec), lam, "right section"), rs)
                p = pairing(rs, rt)
                if p:
                    grad = [patch.chart.d(lam, i) for i in range(patch.chart.dim)]
                    zeta = patch.lift_covector(grad)
                    form = [x + 2 * mu * p * z if z else x for x, z in zip(form, zeta)]
    return GenSection(amb, vec, form)


def frame_at(patch, frame, p):
    return [AlongSection.of(e).restrict(patch).at(p) for e in frame]


class FramedSubbundle:
    """A subbundle of E|_C given by a frame of sections along C."""

    def __init__(self, name, frame, rank=None):
        self.name = name
        self.frame = [AlongSection.of(e) for e in frame]
        self.rank = len(self.frame) if rank is None else rank
        self._restricted = {}

    def restricted(self, patch):
        key = id(patch)
        if key not in self._restricted:
            self._restricted[key] = (patch, [e.restrict(patch) for e in self.frame])
        return self._restricted[key][1]

    def at(self, patch, p):
        n2 = 2 * patch.ambient.dim
        return PointSubspace(n2, [s.at(p) for s in self.restricted(patch)])

    def ambient_members(self):
        """Members that are plain ambient sections (coefficient one)."""
        out = []
        for e in self.frame:
            if len(e.terms) == 1 and e.terms[0][0] == e.terms[0][1].field.one:
                out.append(e.terms[0][1])
            else:
                out.append(None)
        return out

    def __len__(self):
        return len(self.frame)
