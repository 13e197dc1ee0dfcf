"""Charts, differential forms and antisymmetric tensor tables."""

from __future__ import annotations

from itertools import combinations, permutations

from .errors import UnknownNameError


def _perm_sign(seq):
    """Sign of the permutation sorting ``seq``; 0 on repeated entries."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class Chart:
    """An ordered tuple of coordinate names inside a DiffField."""

    __slots__ = ("field", "coords", "_pos")

    def __init__(self, field, coords):
        coords = tuple(coords)
        for c in coords:
            if c not in field.coords:
                raise UnknownNameError(f"chart coordinate {c!r} is not declared")
        if len(set(coords)) != len(coords):
            raise ValueError("repeated chart coordinate")
        self.field = field
        self.coords = coords
        self._pos = {c: i for i, c in enumerate(coords)}

    @property
    def dim(self):
        return len(self.coords)

    def position(self, name):
        try:
            return self._pos[name]
        except KeyError:
            raise UnknownNameError(f"{name!r} is not a coordinate of this chart") from None

    def d(self, e, i):
        """Partial derivative along the i-th chart coordinate."""
        return self.field.diff(e, self.coords[i])

    def zero_vector(self):
        return [self.field.zero] * self.dim

    def basis_vector(self, i):
        v = self.zero_vector()
        v[i] = self.field.one
        return v

    def vector(self, components):
        """Vector from ``{coord: expr}``."""
        v = self.zero_vector()
        for k, x in components.items():
            v[self.position(k)] = self.field.parse(x) if isinstance(x, str) else self.field.const(x)
        return v

    def apply_vector(self, vec, f):
        """Directional derivative ``vec(f)``."""
        total = self.field.zero
        for i, x in enumerate(vec):
            if x:
                df = self.d(f, i)
                if df:
                    total = total + x * df
        return total

    def __eq__(self, other):
        return isinstance(other, Chart) and other.field is self.field and other.coords == self.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"Chart{self.coords}"


class FormField:
    """Antisymmetric k-tensor on a chart, stored by strictly increasing index tuples.

    Used for differential forms and, with the same algebra, for bivector
    tables such as a Poisson tensor.
    """

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart, degree, comps=None):
        self.chart = chart
        self.degree = degree
        clean = {}
        for idx, v in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not match degree {degree}")
            if any(i < 0 or i >= chart.dim for i in idx):
                raise ValueError(f"index {idx} out of range")
            s = _perm_sign(idx)
            if s == 0:
                continue
            v = chart.field.const(v)
            key = tuple(sorted(idx))
            val = clean.get(key, chart.field.zero) + (v if s > 0 else -v)
            if val:
                clean[key] = val
            else:
                clean.pop(key, None)
        self.comps = clean

    # constructors -------------------------------------------------------------
    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree)

    @classmethod
    def from_names(cls, chart, degree, comps):
        """``{"x1 y1": "2*x2", ...}`` or ``{("x1","y1"): expr}``."""
        out = {}
        for key, val in comps.items():
            names = key.split() if isinstance(key, str) else list(key)
            if len(names) != degree:
                raise ValueError(f"component {key!r} does not have {degree} indices")
            idx = tuple(chart.position(n) for n in names)
            expr = chart.field.parse(val) if isinstance(val, str) else chart.field.const(val)
            out.setdefault(idx, chart.field.zero)
            out[idx] = out[idx] + expr
        merged = {}
        for idx, v in out.items():
            s = _perm_sign(idx)
            if s == 0:
                raise ValueError(f"repeated index in component {idx}")
            key = tuple(sorted(idx))
            merged[key] = merged.get(key, chart.field.zero) + (v if s > 0 else -v)
        return cls(chart, degree, merged)

    @classmethod
    def from_table(cls, chart, table):
        """2-tensor from an antisymmetric n x n table (entries (i, j), i < j used)."""
        n = chart.dim
        return cls(chart, 2, {(i, j): table[i][j] for i in range(n) for j in range(i + 1, n)
                              if table[i][j]})

    @classmethod
    def one_form(cls, chart, components):
        return cls(chart, 1, {(i,): c for i, c in enumerate(components) if c})

    # access -------------------------------------------------------------------
    def __getitem__(self, idx):
        if isinstance(idx, int):
            idx = (idx,)
        s = _perm_sign(idx)
        if s == 0:
            return self.chart.field.zero
        v = self.comps.get(tuple(sorted(idx)))
        if v is None:
            return self.chart.field.zero
        return v if s > 0 else -v

    def table(self):
        if self.degree != 2:
            raise ValueError("table() needs a 2-tensor")
        n = self.chart.dim
        return [[self[i, j] for j in range(n)] for i in range(n)]

    def vector(self):
        if self.degree != 1:
            raise ValueError("vector() needs a 1-tensor")
        return [self[i] for i in range(self.chart.dim)]

    def items_by_name(self):
        names = self.chart.coords
        return {" ".join(names[i] for i in idx): v for idx, v in sorted(self.comps.items())}

    @property
    def field(self):
        return self.chart.field

    # algebra ------------------------------------------------------------------
    def _same(self, other):
        if other.chart != self.chart or other.degree != self.degree:
            raise ValueError("forms live on different charts or have different degree")

    def __add__(self, other):
        self._same(other)
        comps = dict(self.comps)
        for k, v in other.comps.items():
            comps[k] = comps.get(k, self.field.zero) + v
        return FormField(self.chart, self.degree, comps)

    def __neg__(self):
        return FormField(self.chart, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        f = self.field.const(f)
        return FormField(self.chart, self.degree, {k: v * f for k, v in self.comps.items()})

    def is_zero(self):
        return all(self.field.is_zero(v) for v in self.comps.values())

    def equals(self, other):
        return (self - other).is_zero()

    def d(self):
        """Exterior derivative."""
        n = self.chart.dim
        out = {}
        for idx, v in self.comps.items():
            for j in range(n):
                if j in idx:
                    continue
                dv = self.chart.d(v, j)
                if not dv:
                    continue
                key = (j,) + idx
                out[key] = out.get(key, self.field.zero) + dv
        return FormField(self.chart, self.degree + 1, out)

    def interior(self, vec):
        """Contraction in the first slot: ``(i_X w)(Y, ...) = w(X, Y, ...)``."""
        if self.degree == 0:
            raise ValueError("cannot contract a function")
        out = {}
        for idx, v in self.comps.items():
            for pos, i in enumerate(idx):
                x = vec[i]
                if not x:
                    continue
                rest = idx[:pos] + idx[pos + 1:]
                term = v * x
                if pos % 2:
                    term = -term
                out[rest] = out.get(rest, self.field.zero) + term
        return FormField(self.chart, self.degree - 1, out)

    def contract_vector(self, vec):
        """For a 2-tensor: components of ``w(vec, .)`` as a list."""
        return self.interior(vec).vector()

    def wedge(self, other):
        if other.chart != self.chart:
            raise ValueError("forms live on different charts")
        out = {}
        for i1, v1 in self.comps.items():
            for i2, v2 in other.comps.items():
                if set(i1) & set(i2):
                    continue
                key = i1 + i2
                out[key] = out.get(key, self.field.zero) + v1 * v2
        return FormField(self.chart, self.degree + other.degree, out)

    def evaluate_on(self, vectors):
        """``w(X1, ..., Xk)`` for symbolic vectors."""
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        total = self.field.zero
        for idx, v in self.comps.items():
            # determinant of the k x k matrix X_b^{i_a}
            acc = self.field.zero
            for perm in permutations(range(self.degree)):
                prod = self.field.one
                for a, b in enumerate(perm):
                    x = vectors[b][idx[a]]
                    if not x:
                        prod = None
                        break
                    prod = prod * x
                if prod is None:
                    continue
                acc = acc + (prod if _perm_sign(perm) > 0 else -prod)
            if acc:
                total = total + v * acc
        return total

    def substitute(self, mapping):
        """Substitute into the coefficients only (restriction to a submanifold)."""
        f = self.field
        return FormField(self.chart, self.degree, {k: f.subs(v, mapping) for k, v in self.comps.items()})

    def pullback(self, target, embedding, jacobian=None):
        """Pullback along ``embedding: ambient name -> expr in target chart``.

        ``jacobian[j][c]`` = d(phi^j)/d(target coord c) may be passed to avoid
        recomputation.
        """
        src = self.chart
        if jacobian is None:
            jacobian = embedding_jacobian(src, target, embedding)
        restricted = self.substitute(embedding)
        out = {}
        for idx in combinations(range(target.dim), self.degree):
            vecs = [[jacobian[j][c] for j in range(src.dim)] for c in idx]
            val = restricted.evaluate_on(vecs)
            if val:
                out[idx] = val
        return FormField(target, self.degree, out)

    def at(self, point):
        return {k: self.field.evaluate(v, point) for k, v in self.comps.items()}

    def __repr__(self):
        body = " + ".join(f"({v})*" + "^".join("d" + self.chart.coords[i] for i in k)
                          for k, v in sorted(self.comps.items()))
        return f"FormField[{self.degree}]({body or '0'})"


def embedding_jacobian(src, target, embedding):
    """``J[j][c] = d phi^j / d c`` for an embedding given as ``{ambient: expr}``."""
    rows = []
    for name in src.coords:
        if name not in embedding:
            raise UnknownNameError(f"embedding does not define ambient coordinate {name!r}")
        e = embedding[name]
        rows.append([target.d(e, c) for c in range(target.dim)])
    return rows


def coordinate_form(chart, name):
    return FormField(chart, 1, {(chart.position(name),): chart.field.one})
