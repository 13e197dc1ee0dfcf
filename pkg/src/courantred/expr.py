"""Exact scalar field: rational functions in coordinates and declared generators.

A :class:`DiffField` owns a polynomial ring over QQ whose variables are the
coordinates followed by the generators. Generators are opaque symbols such as
``tg`` standing for ``tan(theta)``; they carry derivative rules (``d tg/d theta
= 1 + tg^2``) and a float model used only for randomized zero tests and
evaluation. Values are :class:`ScalarExpr`, stored as a reduced fraction of
two polynomials with monic denominator, so that expressions free of
generators have a unique normal form.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from sympy import QQ
from sympy.polys.rings import PolyRing

from .errors import ExprSyntaxError, PoleError, UnknownNameError
from .parsing import compile_numeric, parse_tree, tree_names

DEFAULT_RANGE = (Fraction(-2), Fraction(2))


def _to_fraction(c):
    return Fraction(int(c.numerator), int(c.denominator))


def as_fraction(value):
    """Coerce ints, Fractions and ``"p/q"`` strings to Fraction; floats pass through."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return _to_fraction(value)
    raise TypeError(f"cannot use {value!r} as a number")


class ScalarExpr:
    """Immutable rational function ``num/den`` over a :class:`DiffField`."""

    __slots__ = ("num", "den", "field", "_terms")

    def __init__(self, field, num, den=None, _normalized=False):
        self.field = field
        ring = field.ring
        if den is None:
            den = ring.one
        if not _normalized:
            if not den:
                raise PoleError("zero denominator")
            if not num:
                den = ring.one
            elif not den.is_one:
                _, num, den = num.cofactors(den)
                lc = den.LC
                if lc != 1:
                    num = num.quo_ground(lc)
                    den = den.quo_ground(lc)
        self.num = num
        self.den = den
        self._terms = None

    # construction helpers -------------------------------------------------
    def _new(self, num, den=None, normalized=False):
        return ScalarExpr(self.field, num, den, _normalized=normalized)

    def _coerce(self, other):
        if isinstance(other, ScalarExpr):
            if other.field is not self.field:
                raise ValueError("expressions belong to different fields")
            return other
        return self.field.const(other)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if not o.num:
            return self
        if not self.num:
            return o
        if self.den.is_one and o.den.is_one:
            return self._new(self.num + o.num, None, True)
        if self.den == o.den:
            return self._new(self.num + o.num, self.den)
        return self._new(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.num, self.den, True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if not self.num or not o.num:
            return self.field.zero
        if self.den.is_one and o.den.is_one:
            return self._new(self.num * o.num, None, True)
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if not d2.is_one:
            _, n1, d2 = n1.cofactors(d2)
        if not d1.is_one:
            _, n2, d1 = n2.cofactors(d1)
        num, den = n1 * n2, d1 * d2
        lc = den.LC
        if lc != 1:
            num = num.quo_ground(lc)
            den = den.quo_ground(lc)
        return self._new(num, den, True)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise PoleError("division by the zero expression")
        return self._new(self.den, self.num)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return self.field.one
        return self._new(self.num ** k, self.den ** k, True)

    # comparisons ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, ScalarExpr):
            return self.field is other.field and self.num == other.num and self.den == other.den
        try:
            o = self.field.const(other)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    # inspection ---------------------------------------------------------------
    def is_constant(self):
        return self.num.is_ground and self.den.is_ground

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return _to_fraction(self.num.LC) / _to_fraction(self.den.LC) if self.num else Fraction(0)

    def variables(self):
        """Names of ring variables that actually occur."""
        names = self.field.names
        degs = [max(a, b) for a, b in zip(self.num.degrees(), self.den.degrees())]
        return {names[i] for i, d in enumerate(degs) if d > 0}

    def has_generators(self):
        gens = self.field.generator_slice
        if not self.field.generators:
            return False
        nd = self.num.degrees()
        dd = self.den.degrees()
        return any(nd[i] > 0 or dd[i] > 0 for i in range(gens.start, gens.stop))

    def is_polynomial(self):
        return self.den.is_one

    def __str__(self):
        num = str(self.num)
        if self.den.is_one:
            return num
        return f"({num})/({self.den})"

    def __repr__(self):
        return f"ScalarExpr({self})"

    def __format__(self, spec):
        return format(str(self), spec)

    def diff(self, name):
        return self.field.diff(self, name)

    def terms_cache(self):
        if self._terms is None:
            conv = lambda p: [(m, _to_fraction(c)) for m, c in p.items()]
            self._terms = (conv(self.num), conv(self.den))
        return self._terms


@dataclass(frozen=True)
class Generator:
    """Declared transcendental symbol: derivative rules plus a float model."""

    name: str
    derivatives: dict = dc_field(default_factory=dict)  # coord -> expression text
    model: str = ""


def _eval_terms(terms, values, as_float):
    total = 0
    scale = 0.0
    for monom, coeff in terms:
        t = float(coeff) if as_float else coeff
        for i, e in enumerate(monom):
            if e:
                t = t * values[i] ** e
        total += t
        if as_float:
            scale += abs(t)
    return total, scale


class DiffField:
    """Coordinates plus generators, with differentiation and zero testing.

    ``samples`` and ``tolerance`` drive the randomized tier of :meth:`is_zero`
    and the seed makes it deterministic.
    """

    def __init__(self, coords, generators=(), seed=0, samples=25, tolerance=1e-9,
                 ranges=None, max_retries=200):
        coords = tuple(coords)
        if len(set(coords)) != len(coords):
            raise ValueError("coordinate names must be distinct")
        gen_list = []
        for g in generators:
            if isinstance(g, dict):
                g = Generator(g["name"], dict(g.get("derivatives", {})), g.get("model", ""))
            gen_list.append(g)
        gnames = tuple(g.name for g in gen_list)
        if set(gnames) & set(coords) or len(set(gnames)) != len(gnames):
            raise ValueError("generator names must be distinct from each other and from coordinates")
        for n in coords + gnames:
            if not n.isidentifier():
                raise ValueError(f"invalid name {n!r}")
        self.coords = coords
        self.generator_names = gnames
        self.names = coords + gnames
        self.ring = PolyRing(",".join(self.names), QQ)
        self._index = {n: i for i, n in enumerate(self.names)}
        self.generator_slice = slice(len(coords), len(self.names))
        self.seed = seed
        self.samples = samples
        self.tolerance = tolerance
        self.max_retries = max_retries
        self.ranges = {k: (as_fraction(a), as_fraction(b)) for k, (a, b) in (ranges or {}).items()}
        self.zero = ScalarExpr(self, self.ring.zero, None, True)
        self.one = ScalarExpr(self, self.ring.one, None, True)

        self.generators = {g.name: g for g in gen_list}
        self._rules = {c: [] for c in coords}  # coord -> [(gen index, ScalarExpr)]
        self._models = {}
        for g in gen_list:
            for c, text in g.derivatives.items():
                if c not in self._rules:
                    raise UnknownNameError(f"generator {g.name!r}: unknown coordinate {c!r}")
                rule = self.parse(text)
                if rule:
                    self._rules[c].append((self._index[g.name], rule))
            if not g.model:
                raise ValueError(f"generator {g.name!r} needs a numeric model")
            fn, names = compile_numeric(g.model)
            bad = names - set(coords)
            if bad:
                raise UnknownNameError(f"generator {g.name!r} model uses unknown names {sorted(bad)}")
            self._models[g.name] = fn
        self._zero_points = None

    # construction -----------------------------------------------------------
    def const(self, value):
        if isinstance(value, ScalarExpr):
            if value.field is not self:
                raise ValueError("expression from a different field")
            return value
        if isinstance(value, float):
            raise TypeError("floats are not exact; use Fraction or a 'p/q' string")
        v = as_fraction(value)
        if isinstance(v, float):
            raise TypeError("floats are not exact")
        return ScalarExpr(self, self.ring.ground_new(QQ(v.numerator, v.denominator)), None, True)

    def var(self, name):
        try:
            i = self._index[name]
        except KeyError:
            raise UnknownNameError(f"unknown name {name!r}") from None
        return ScalarExpr(self, self.ring.gens[i], None, True)

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNameError(f"unknown name {name!r}") from None

    def parse(self, text, allowed=None):
        """Parse expression text. ``allowed`` optionally restricts usable names."""
        if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
            return self.const(text)
        if isinstance(text, ScalarExpr):
            return self.const(text)
        tree = parse_tree(text)
        return self._lower(tree, text, allowed)

    def _lower(self, n, text, allowed):
        tag = n[0]
        if tag == "num":
            return self.const(n[1])
        if tag == "name":
            name = n[1]
            if name not in self._index or (allowed is not None and name not in allowed):
                raise UnknownNameError(
                    f"unknown name {name!r} in expression {text!r} (column {n[2]})")
            return self.var(name)
        if tag == "neg":
            return -self._lower(n[1], text, allowed)
        if tag == "call":
            raise ExprSyntaxError("function calls are not allowed", text, n[3])
        a = self._lower(n[1], text, allowed)
        if tag == "pow":
            b = self._lower(n[2], text, allowed)
            if not b.is_constant() or b.constant_value().denominator != 1:
                raise ExprSyntaxError("exponent must be an integer constant", text, n[3])
            try:
                return a ** int(b.constant_value())
            except PoleError:
                raise ExprSyntaxError("negative power of zero", text, n[3]) from None
        b = self._lower(n[2], text, allowed)
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return a * b
        try:
            return a / b
        except PoleError:
            raise ExprSyntaxError("division by zero", text, n[3]) from None

    # calculus -----------------------------------------------------------------
    def _dpoly(self, p, i, coord):
        out = ScalarExpr(self, p.diff(self.ring.gens[i]), None, True)
        for gi, rule in self._rules[coord]:
            dp = p.diff(self.ring.gens[gi])
            if dp:
                out = out + ScalarExpr(self, dp, None, True) * rule
        return out

    def diff(self, e, name):
        """Total partial derivative of ``e`` with respect to coordinate ``name``."""
        if name not in self._rules:
            raise UnknownNameError(f"cannot differentiate with respect to {name!r}")
        e = self.const(e)
        i = self._index[name]
        dn = self._dpoly(e.num, i, name)
        if e.den.is_one:
            return dn
        dd = self._dpoly(e.den, i, name)
        num = ScalarExpr(self, e.num, None, True)
        den = ScalarExpr(self, e.den, None, True)
        return (dn * den - num * dd) / (den * den)

    def gradient(self, e, coords):
        return [self.diff(e, c) for c in coords]

    # substitution ---------------------------------------------------------------
    def subs(self, e, mapping):
        """Simultaneously substitute ``name -> ScalarExpr`` (pullback along a map)."""
        e = self.const(e)
        if not mapping:
            return e
        idx = {self._index[k]: self.const(v) for k, v in mapping.items()}
        num = self._compose(e.num, idx)
        if e.den.is_one:
            return num
        return num / self._compose(e.den, idx)

    def _compose(self, p, idx):
        if not p:
            return self.zero
        if all(v.den.is_one for v in idx.values()):
            pairs = [(self.ring.gens[i], v.num) for i, v in idx.items()]
            return ScalarExpr(self, p.compose(pairs), None, True)
        # clear denominators variable by variable, then divide once
        degs = p.degrees()
        pairs = []
        den = self.ring.one
        for i, v in idx.items():
            pairs.append((i, v))
            if not v.den.is_one and degs[i]:
                den = den * v.den ** degs[i]
        total = self.ring.zero
        for monom, coeff in p.items():
            term = self.ring.ground_new(coeff)
            rest = list(monom)
            for i, v in pairs:
                k = monom[i]
                rest[i] = 0
                if v.den.is_one:
                    if k:
                        term = term * v.num ** k
                else:
                    term = term * v.num ** k * v.den ** (degs[i] - k)
            total = total + term * self.ring.from_dict({tuple(rest): QQ(1)}) if any(rest) else total + term
        return ScalarExpr(self, total, den)

    # numerics ---------------------------------------------------------------------
    def _values(self, point):
        vals = [None] * len(self.names)
        for k, v in point.items():
            if k in self._index:
                vals[self._index[k]] = as_fraction(v)
        return vals

    def _fill_generators(self, vals, needed):
        for gname in needed:
            gi = self._index[gname]
            if vals[gi] is not None:
                continue
            env = {c: vals[self._index[c]] for c in self.coords if vals[self._index[c]] is not None}
            try:
                vals[gi] = self._models[gname](env)
            except KeyError as exc:
                raise UnknownNameError(f"point lacks coordinate {exc.args[0]!r} needed by {gname!r}") from None

    def evaluate(self, e, point):
        """Value of ``e`` at ``point`` (mapping name -> number or 'p/q').

        Exact Fraction when no generator occurs and the point is rational.
        """
        e = self.const(e)
        vals = self._values(point)
        used = e.variables()
        missing = [n for n in used if n in self.coords and vals[self._index[n]] is None]
        if missing:
            raise UnknownNameError(f"point does not assign {sorted(missing)}")
        self._fill_generators(vals, [n for n in used if n in self.generators])
        nt, dt = e.terms_cache()
        as_float = any(isinstance(vals[self._index[n]], float) for n in used)
        num, _ = _eval_terms(nt, vals, as_float)
        den, dscale = _eval_terms(dt, vals, as_float)
        if as_float:
            if not math.isfinite(den) or abs(den) <= 1e-13 * max(dscale, 1e-300):
                raise PoleError(f"pole of {e} at {point}")
            return num / den
        if den == 0:
            raise PoleError(f"pole of {e} at {point}")
        return num / den

    def random_point(self, rng, names=None, ranges=None):
        pt = {}
        for c in (names or self.coords):
            lo, hi = (ranges or {}).get(c) or self.ranges.get(c, DEFAULT_RANGE)
            pt[c] = lo + (hi - lo) * Fraction(rng.randint(1, 9999), 10000)
        return pt

    def _zero_sample_points(self):
        if self._zero_points is None:
            rng = random.Random(self.seed * 7919 + 17)
            pts = []
            attempts = 0
            while len(pts) < self.samples and attempts < self.max_retries + self.samples:
                attempts += 1
                pt = self.random_point(rng)
                vals = self._values(pt)
                try:
                    self._fill_generators(vals, self.generator_names)
                except (ValueError, OverflowError, ZeroDivisionError):
                    continue
                if any(isinstance(v, float) and not math.isfinite(v) for v in vals):
                    continue
                pts.append([float(v) for v in vals])
            if len(pts) < self.samples:
                raise PoleError("could not find enough regular sample points")
            self._zero_points = pts
        return self._zero_points

    def is_zero(self, e):
        """Two-tier zero test: exact normal form, else seeded sampling."""
        e = self.const(e)
        if not e.num:
            return True
        if not e.has_generators():
            return False
        nt, _ = e.terms_cache()
        for vals in self._zero_sample_points():
            v, scale = _eval_terms(nt, vals, True)
            if not math.isfinite(v):
                raise PoleError(f"non-finite value while testing {e}")
            if abs(v) > self.tolerance * max(scale, 1.0):
                return False
        return True

    def equal(self, a, b):
        return self.is_zero(self.const(a) - self.const(b))

    def check_generators(self, points=10, step=1e-6):
        """Compare declared derivative rules with central differences of the models.

        Returns a list of ``(generator, coordinate, max relative error)``.
        """
        rng = random.Random(self.seed + 1)
        out = []
        for gname, fn in self._models.items():
            for c in self.coords:
                rule = next((r for gi, r in self._rules[c] if self.names[gi] == gname), self.zero)
                worst = 0.0
                for _ in range(points):
                    pt = {k: float(v) for k, v in self.random_point(rng).items()}
                    hi = dict(pt, **{c: pt[c] + step})
                    lo = dict(pt, **{c: pt[c] - step})
                    fd = (fn(hi) - fn(lo)) / (2 * step)
                    exact = self.evaluate(rule, pt) if rule else 0.0
                    worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
                out.append((gname, c, worst))
        return out

    def with_sampling(self, seed=None, samples=None):
        """A field with identical symbols but different sampling settings.

        Expressions are not shared between fields, so this is only meant to be
        called before anything is parsed.
        """
        gens = list(self.generators.values())
        return DiffField(self.coords, gens, seed=self.seed if seed is None else seed,
                         samples=self.samples if samples is None else samples,
                         tolerance=self.tolerance, ranges=self.ranges,
                         max_retries=self.max_retries)


def names_in(text):
    return tree_names(parse_tree(text))
