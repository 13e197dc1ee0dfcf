"""Linear algebra at points (exact over Fraction) and symbolically over a DiffField.

Pointwise work uses plain Python numbers. Everything stays exact as long as
the inputs are Fractions; as soon as a float appears (a generator was
evaluated through its numeric model) the elimination switches to floats with
a relative pivot tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .errors import HypothesisError

FLOAT_TOL = 1e-9


def _has_float(rows):
    return any(isinstance(x, float) for r in rows for x in r)


def rref(rows, tol=FLOAT_TOL):
    """Reduced row echelon form. Returns ``(rows, pivot_columns)``.

    Zero rows are dropped. Exact for Fractions; for float input, entries below
    ``tol`` times the largest magnitude count as zero.
    """
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    floaty = _has_float(rows)
    if floaty:
        rows = [[float(x) for x in r] for r in rows]
        big = max((abs(x) for r in rows for x in r), default=0.0)
        eps = tol * max(big, 1.0)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        if floaty:
            best = max(range(r, len(rows)), key=lambda i: abs(rows[i][c]))
            if abs(rows[best][c]) <= eps:
                continue
        else:
            best = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
            if best is None:
                continue
        rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    out = rows[:r]
    if floaty:
        out = [[0.0 if abs(x) <= eps else x for x in row] for row in out]
    return out, pivots


def rank(rows, tol=FLOAT_TOL):
    return len(rref(rows, tol)[1])


def nullspace(rows, ncols=None, tol=FLOAT_TOL):
    """Basis of {x : rows . x = 0}."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    red, piv = rref(rows, tol) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    floaty = _has_float(red)
    one, zero = (1.0, 0.0) if floaty else (Fraction(1), Fraction(0))
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def mat_mul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def transpose(a):
    return [list(r) for r in zip(*a)] if a else []


def solve_point(a, b, tol=FLOAT_TOL):
    """Particular solution of ``a x = b`` or None if inconsistent."""
    n = len(a[0])
    aug = [list(r) + [v] for r, v in zip(a, b)]
    red, piv = rref(aug, tol)
    if n in piv:
        return None
    floaty = _has_float(red)
    x = [0.0 if floaty else Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return x


def det_point(m):
    n = len(m)
    rows = [list(r) for r in m]
    d = Fraction(1) if not _has_float(rows) else 1.0
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return 0 * d
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            d = -d
        d = d * rows[c][c]
        for i in range(c + 1, n):
            f = rows[i][c] / rows[c][c]
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return d


def det_minor_expansion(m):
    """Leibniz-formula determinant; slow, used as an independent oracle."""
    n = len(m)
    total = Fraction(0)
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = Fraction(1)
        for i in range(n):
            prod *= m[i][perm[i]]
        total += sign * prod
    return total


class PointSubspace:
    """Subspace of K^dim given by a canonical basis (reduced echelon rows)."""

    __slots__ = ("dim", "basis", "approximate")

    def __init__(self, dim, vectors=(), tol=FLOAT_TOL):
        vectors = [list(v) for v in vectors]
        for v in vectors:
            if len(v) != dim:
                raise ValueError(f"vector of length {len(v)} in a space of dimension {dim}")
        red, _ = rref(vectors, tol) if vectors else ([], [])
        self.dim = dim
        self.basis = tuple(tuple(r) for r in red)
        self.approximate = _has_float(red)

    @classmethod
    def whole(cls, dim):
        return cls(dim, [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)])

    @property
    def rank(self):
        return len(self.basis)

    def __len__(self):
        return len(self.basis)

    def contains(self, v, tol=FLOAT_TOL):
        return rank(list(self.basis) + [list(v)], tol) == self.rank

    def issubspace(self, other):
        return rank(list(self.basis) + list(other.basis)) == other.rank

    def same_as(self, other):
        return self.rank == other.rank and self.issubspace(other)

    def __eq__(self, other):
        if not isinstance(other, PointSubspace):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if self.approximate or other.approximate:
            return self.same_as(other)
        return self.basis == other.basis

    def __hash__(self):
        return hash((self.dim, self.basis))

    def __repr__(self):
        return f"PointSubspace(dim={self.dim}, rank={self.rank})"


def _check_dims(a, b):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def join(a, b):
    _check_dims(a, b)
    return PointSubspace(a.dim, list(a.basis) + list(b.basis))


def meet(a, b):
    _check_dims(a, b)
    if not a.basis or not b.basis:
        return PointSubspace(a.dim)
    # solve sum s_i a_i = sum t_j b_j
    cols = [list(v) for v in a.basis] + [[-x for x in v] for v in b.basis]
    rows = transpose(cols)
    ker = nullspace(rows, len(cols))
    vecs = []
    for k in ker:
        vecs.append([sum((k[i] * a.basis[i][c] for i in range(a.rank)), 0 * k[0])
                     for c in range(a.dim)])
    return PointSubspace(a.dim, vecs)


def meet_join(a, b):
    return meet(a, b), join(a, b)


def pairing_perp(a, g):
    """Orthogonal complement of ``a`` for the symmetric bilinear form ``g``."""
    n = a.dim
    if len(g) != n or any(len(r) != n for r in g):
        raise ValueError("pairing matrix has the wrong size")
    if rank(g) != n:
        raise HypothesisError("pairing is degenerate at this point")
    rows = [[sum((v[i] * g[i][j] for i in range(n)), 0 * g[0][0]) for j in range(n)]
            for v in a.basis]
    if not rows:
        return PointSubspace.whole(n)
    return PointSubspace(n, nullspace(rows, n))


def annihilator_rows(a):
    """Linear equations cutting out ``a`` (rows of the standard-dual annihilator)."""
    if not a.basis:
        return PointSubspace.whole(a.dim).basis
    return nullspace([list(v) for v in a.basis], a.dim)


def quotient(a, k):
    """Representatives of a basis of ``a/k`` and the projection.

    Returns ``(reps, proj)`` where ``proj(v)`` gives the coordinates of the
    class of ``v`` (for ``v`` in ``a``) with respect to ``reps``.
    """
    _check_dims(a, k)
    if not k.issubspace(a):
        raise HypothesisError("quotient requires k to be contained in a")
    chosen = []
    current = list(k.basis)
    r = len(current)
    for v in a.basis:
        trial = current + [list(v)]
        if rank(trial) > r:
            current = trial
            chosen.append(tuple(v))
            r += 1
    reps = chosen
    kb = list(k.basis)

    def proj(v):
        cols = [list(x) for x in reps] + kb
        sol = solve_point(transpose(cols), list(v))
        if sol is None:
            raise HypothesisError("vector does not lie in the numerator subspace")
        return sol[: len(reps)]

    return reps, proj


def projection_matrix(a, k):
    """Matrix of ``a -> a/k`` in the canonical basis of ``a`` and the chosen reps."""
    reps, proj = quotient(a, k)
    cols = [proj(v) for v in a.basis]
    return reps, transpose(cols) if cols and reps else [[] for _ in reps]


# ---------------------------------------------------------------------------
# matrices of ScalarExpr


class ExactMatrix:
    """Rectangular grid of ScalarExpr over one DiffField."""

    __slots__ = ("field", "entries", "rows", "cols")

    def __init__(self, field, entries):
        entries = [[field.const(x) for x in row] for row in entries]
        if entries and any(len(r) != len(entries[0]) for r in entries):
            raise ValueError("ragged matrix")
        self.field = field
        self.entries = tuple(tuple(r) for r in entries)
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, [[field.zero] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, field, n):
        return cls(field, [[field.one if i == j else field.zero for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return list(self.entries[i])

    def column(self, j):
        return [r[j] for r in self.entries]

    def T(self):
        return ExactMatrix(self.field, [list(r) for r in zip(*self.entries)]) if self.rows else self

    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch")
            ot = list(zip(*other.entries))
            return ExactMatrix(self.field, [[_dot(r, c, self.field) for c in ot] for r in self.entries])
        return [_dot(r, other, self.field) for r in self.entries]

    def __add__(self, other):
        return ExactMatrix(self.field, [[a + b for a, b in zip(r, s)]
                                        for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other):
        return ExactMatrix(self.field, [[a - b for a, b in zip(r, s)]
                                        for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return ExactMatrix(self.field, [[-a for a in r] for r in self.entries])

    def scale(self, c):
        return ExactMatrix(self.field, [[a * c for a in r] for r in self.entries])

    def at(self, point):
        return [[self.field.evaluate(x, point) for x in r] for r in self.entries]

    def is_zero(self):
        return all(self.field.is_zero(x) for r in self.entries for x in r)

    def equals(self, other):
        return (self.rows, self.cols) == (other.rows, other.cols) and (self - other).is_zero()

    def map(self, fn):
        return ExactMatrix(self.field, [[fn(x) for x in r] for r in self.entries])

    def __repr__(self):
        return "ExactMatrix(" + "; ".join(", ".join(str(x) for x in r) for r in self.entries) + ")"


def _dot(a, b, field):
    total = field.zero
    for x, y in zip(a, b):
        if x and y:
            total = total + x * y
    return total


def rank_basis(m, point):
    """Column space of ``m`` at ``point`` and its rank."""
    vals = m.at(point)
    sub = PointSubspace(m.rows, transpose(vals) if vals else [])
    return sub, sub.rank


# symbolic elimination ------------------------------------------------------


def sym_rref(field, rows):
    """Gauss-Jordan over the field; pivots are chosen with :meth:`DiffField.is_zero`."""
    rows = [[field.const(x) for x in r] for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        best = None
        for i in range(r, len(rows)):
            x = rows[i][c]
            if x and not field.is_zero(x):
                if best is None or (x.is_constant() and not rows[best][c].is_constant()):
                    best = i
                    if x.is_constant():
                        break
        if best is None:
            for i in range(r, len(rows)):
                rows[i][c] = field.zero
            continue
        rows[r], rows[best] = rows[best], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv if x else x for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b if b else a for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def sym_solve(field, a, b):
    """Particular solution of ``a x = b`` (lists of ScalarExpr).

    Returns ``(x, consistent)``; free variables are set to zero.
    """
    n = len(a[0]) if a else 0
    aug = [list(r) + [v] for r, v in zip(a, b)]
    red, piv = sym_rref(field, aug)
    if n in piv:
        return None, False
    x = [field.zero] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return x, True


def sym_inverse(field, m):
    n = len(m)
    aug = [list(r) + [field.one if i == j else field.zero for j in range(n)] for i, r in enumerate(m)]
    red, piv = sym_rref(field, aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise HypothesisError("matrix is not invertible")
    return [row[n:] for row in red]


def sym_nullspace(field, rows, ncols):
    red, piv = sym_rref(field, rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [field.zero] * ncols
        v[f] = field.one
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def sym_det(field, m):
    n = len(m)
    rows = [[field.const(x) for x in r] for r in m]
    d = field.one
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] and not field.is_zero(rows[i][c])), None)
        if p is None:
            return field.zero
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            d = -d
        d = d * rows[c][c]
        inv = rows[c][c].inverse()
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return d
