"""Independent reference computations in plain sympy.

Nothing here imports the package's kernel: sections are pairs of lists of
sympy expressions and forms are dicts keyed by sorted index tuples.
"""

from itertools import combinations, product

import sympy as sp


def to_sympy(e):
    return sp.sympify(str(e))


def perm_sign(p):
    p = list(p)
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def form_value(form, idx):
    """Component of an alternating form at an arbitrary index tuple."""
    if len(set(idx)) < len(idx):
        return sp.Integer(0)
    key = tuple(sorted(idx))
    return perm_sign([sorted(idx).index(i) for i in idx]) * form.get(key, sp.Integer(0))


def d_form(form, xs, degree):
    out = {}
    n = len(xs)
    for idx in combinations(range(n), degree + 1):
        acc = sp.Integer(0)
        for pos, i in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1:]
            acc += (-1) ** pos * sp.diff(form_value(form, rest), xs[i])
        acc = sp.simplify(acc)
        if acc != 0:
            out[idx] = acc
    return out


def evaluate_form(form, vectors):
    """form(v1, ..., vk) for component lists v_i."""
    k = len(vectors)
    n = len(vectors[0])
    acc = sp.Integer(0)
    for idx in product(range(n), repeat=k):
        c = form_value(form, idx)
        if c == 0:
            continue
        t = c
        for v, i in zip(vectors, idx):
            t *= v[i]
        acc += t
    return sp.simplify(acc)


def lie(X, Y, xs):
    n = len(xs)
    return [sum(X[i] * sp.diff(Y[j], xs[i]) - Y[i] * sp.diff(X[j], xs[i]) for i in range(n)) for j in range(n)]


def pairing(e1, e2):
    (X, a), (Y, b) = e1, e2
    return sp.Rational(1, 2) * sum(x * bb + y * aa for x, aa, y, bb in zip(X, a, Y, b))


def dorfman(e1, e2, xs, H=None):
    """[X+a, Y+b]_H = [X,Y] + L_X b - i_Y da + H(X, Y, .)."""
    (X, a), (Y, b) = e1, e2
    n = len(xs)
    vec = lie(X, Y, xs)
    form = []
    for j in range(n):
        t = sum(X[i] * sp.diff(b[j], xs[i]) + b[i] * sp.diff(X[i], xs[j]) for i in range(n))
        t -= sum(Y[i] * (sp.diff(a[j], xs[i]) - sp.diff(a[i], xs[j])) for i in range(n))
        if H:
            t += sum(form_value(H, (i, k, j)) * X[i] * Y[k] for i in range(n) for k in range(n))
        form.append(t)
    return vec, form


def gauge(e, B):
    X, a = e
    n = len(X)
    return X, [a[j] + sum(X[i] * form_value(B, (i, j)) for i in range(n)) for j in range(n)]


def same_section(e1, e2):
    return all(sp.simplify(p - q) == 0 for p, q in zip(e1[0] + e1[1], e2[0] + e2[1]))


def bivector_from_symplectic(W):
    """Pi with Pi# o omega-flat = -Id, i.e. Pi = -W^-1 for W[i][j] = omega(d_i, d_j)."""
    return -sp.Matrix(W).inv()

