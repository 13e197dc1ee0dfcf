from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from courantred.errors import HypothesisError
from courantred.expr import DiffField
from courantred.linalg import (ExactMatrix, PointSubspace, det_minor_expansion, det_point, join, meet,
                               nullspace, pairing_perp, quotient, rank, rank_basis, rref, sym_inverse,
                               sym_nullspace, sym_solve)

fracs = st.fractions(min_value=-4, max_value=4, max_denominator=5)


def matrices(rows, cols):
    return st.lists(st.lists(fracs, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def as_sympy(m):
    return sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in r] for r in m])


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4).flatmap(lambda r: st.integers(1, 5).flatmap(lambda c: matrices(r, c))))
def test_rref_rank_nullspace_match_sympy(m):
    S = as_sympy(m)
    red, piv = rref(m)
    Sr, Spiv = S.rref()
    assert tuple(piv) == Spiv
    if piv:
        assert as_sympy(red) == Sr[: len(piv), :]
    else:
        assert red == []
    assert rank(m) == S.rank()
    ns = nullspace(m)
    assert len(ns) == len(m[0]) - S.rank()
    for v in ns:
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in m)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: matrices(n, n)))
def test_determinants_agree(m):
    d = as_sympy(m).det()
    assert det_point(m) == Fraction(str(d))
    assert det_minor_expansion(m) == Fraction(str(d))


@settings(max_examples=60, deadline=None)
@given(matrices(2, 4), matrices(2, 4))
def test_lattice_dimension_formula(a, b):
    A, B = PointSubspace(4, a), PointSubspace(4, b)
    assert join(A, B).rank + meet(A, B).rank == A.rank + B.rank
    assert meet(A, B).issubspace(A) and meet(A, B).issubspace(B)
    assert A.issubspace(join(A, B))


def test_canonical_basis_equality():
    A = PointSubspace(3, [[1, 2, 3], [0, 1, 1]])
    B = PointSubspace(3, [[1, 3, 4], [2, 4, 6]])
    assert A == B
    assert A.contains([1, 1, 2])
    assert not A.contains([0, 0, 1])


def test_pairing_perp_split_form():
    g = [[Fraction(int(abs(i - j) == 2), 2) for j in range(4)] for i in range(4)]
    L = PointSubspace(4, [[1, 0, 0, 0], [0, 1, 0, 0]])  # tangent directions are Lagrangian
    assert pairing_perp(L, g) == L
    with pytest.raises(HypothesisError):
        pairing_perp(L, [[0] * 4 for _ in range(4)])


def test_quotient_projection():
    a = PointSubspace(3, [[1, 0, 0], [0, 1, 0]])
    k = PointSubspace(3, [[1, 1, 0]])
    reps, proj = quotient(a, k)
    assert len(reps) == 1
    assert proj([1, 1, 0]) == [0]
    with pytest.raises(HypothesisError):
        quotient(k, a)


def test_float_path_tolerance():
    # generator-valued samples produce floats; near-zero entries are treated as zero
    m = [[1.0, 2.0], [0.5, 1.0 + 1e-14]]
    assert rank(m) == 1


def test_symbolic_inverse_and_solve():
    f = DiffField(["x"])
    x = f.var("x")
    m = [[x, f.one], [f.zero, x]]
    inv = sym_inverse(f, m)
    assert inv[0][0] == 1 / x and inv[0][1] == -1 / x ** 2
    sol, ok = sym_solve(f, m, [f.one, x])
    assert ok and sol == [f.zero, f.one]
    assert sym_solve(f, [[x], [x]], [f.one, f.zero])[1] is False
    ns = sym_nullspace(f, [[x, x ** 2]], 2)
    assert len(ns) == 1 and ns[0][0] * x + ns[0][1] * x ** 2 == 0
    with pytest.raises(HypothesisError):
        sym_inverse(f, [[x, x], [x, x]])


def test_rank_basis_at_point():
    f = DiffField(["x"])
    m = ExactMatrix(f, [[f.var("x"), f.zero], [f.zero, f.one]])
    assert rank_basis(m, {"x": 0})[1] == 1
    assert rank_basis(m, {"x": 2})[1] == 2
