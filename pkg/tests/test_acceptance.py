"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed
in the terminal summary (see conftest.py) or when run as a script."""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import sympy as sp

from courantred import branes as br
from courantred import reduction as rd
from courantred.courant import (check_axioms, coordinate_sections, gauge_transform, nijenhuis,
                                splitting_curvature, twisted_bracket)
from courantred.expr import DiffField
from courantred.forms import Chart, FormField
from courantred.scene import load_scene, run_scene

import oracles as O
from conftest import R4, as_oracle_form, as_oracle_section, random_poly, random_section, random_two_form

RESULTS = {}


@contextmanager
def criterion(n, title, limit=None):
    t0 = time.perf_counter()
    try:
        yield
        dt = time.perf_counter() - t0
        if limit is not None:
            assert dt < limit, f"took {dt:.1f}s, limit {limit}s"
    except BaseException as exc:
        RESULTS[n] = ("FAIL", title, f"{time.perf_counter() - t0:.2f}s: {exc}".splitlines()[0])
        raise
    RESULTS[n] = ("PASS", title, f"{time.perf_counter() - t0:.2f}s")


def summary_lines():
    return [f"criterion {n:2d} {status}: {title} ({info})" for n, (status, title, info) in sorted(RESULTS.items())]


def _r4():
    f = DiffField(R4)
    return f, Chart(f, R4)


def _triples(k, count, rng):
    allt = [(a, b, c) for a in range(k) for b in range(k) for c in range(k)]
    rng.shuffle(allt)
    return allt[:count]


def test_01_axioms_on_random_triples():
    with criterion(1, "C1-C5 on >= 100 random triples for H = 0 and H = dB", limit=30):
        f, ch = _r4()
        rng = random.Random(2024)
        xs = sp.symbols(" ".join(R4))
        B = random_two_form(ch, rng)
        for H in (None, B.d()):
            secs = [random_section(ch, rng) for _ in range(5)]
            fns = [random_poly(f, rng, R4)]
            rep = check_axioms(H, secs, fns, triples=_triples(5, 100, rng))
            assert rep.ok, [c.name for c in rep.failed]
            # brackets agree with the independent oracle
            Hs = as_oracle_form(H) if H is not None else None
            for i, j in ((0, 1), (2, 3), (4, 0)):
                ours = as_oracle_section(twisted_bracket(secs[i], secs[j], H))
                ref = O.dorfman(as_oracle_section(secs[i]), as_oracle_section(secs[j]), xs, Hs)
                assert O.same_section(ours, ref)
        # negative control: dropping the H term for one first argument breaks C1.
        # Dropping it everywhere would just give the untwisted bracket.
        H = B.d()
        assert not H.is_zero()
        secs = [random_section(ch, rng) for _ in range(3)]
        bad = check_axioms(H, secs, bracket_fn=lambda a, b: twisted_bracket(a, b, H, drop_twist=(a is secs[0])))
        assert bad.status_of("C1") == "fail"


def test_02_gauge_identity():
    with criterion(2, "[e^B a, e^B b]_H = e^B [a, b]_{H + dB} on 20 random triples", limit=10):
        f, ch = _r4()
        rng = random.Random(77)
        H = random_two_form(ch, rng, degree=1).d()
        for _ in range(20):
            B = random_two_form(ch, rng)
            a, b = random_section(ch, rng), random_section(ch, rng)
            lhs = twisted_bracket(gauge_transform(a, B), gauge_transform(b, B), H)
            rhs = gauge_transform(twisted_bracket(a, b, gauge_transform(H, B)), B)
            assert lhs.equals(rhs)


def test_03_swsign_identity():
    with criterion(3, "2<[e1,e2],e3> = (i*H + dF)(X1,X2,X3) on tau frames of two scenes", limit=10):
        for name in ("halfspace", "sympbrane", "cylinder"):
            sc = load_scene(name)
            bd = br.BraneData(sc.patches["C"], sc.forms["B"])
            res = br.swsign_residuals(bd, sc.H)
            assert res and all(sc.field.is_zero(v) for v in res.values()), name


def test_04_c2_brane():
    with criterion(4, "c2-brane: Nijenhuis zero at 20 points, brane, characteristic ranks 0 and 2"):
        sc = load_scene("c2-brane")
        J = sc.gcs["J"]
        secs = coordinate_sections(sc.ambient)
        res = [nijenhuis(J, secs[i], secs[j], sc.H) for i in range(8) for j in range(i, 8)]
        assert all(r.is_zero() for r in res)
        rng = random.Random(4)
        for _ in range(20):
            p = {c: Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for c in sc.ambient.coords}
            assert all(x == 0 for r in res for x in r.at(p))
        bd = br.BraneData(sc.patches["line"], FormField(sc.ambient, 2))
        assert br.check_generalized_submanifold(bd).ok and br.check_brane(bd, J).ok
        patch = sc.patches["line"].with_samples([{"x1": 0, "y1": 0}, {"x1": 1, "y1": 0}])
        assert [r for _, r in br.characteristic_rank(J, patch)] == [0, 2]


def test_05_halfspace():
    with criterion(5, "halfspace: A + Pi B on d/dx1, d/dy1, d/dx2 and the reduced matrix"):
        sc = load_scene("halfspace")
        f = sc.field
        x1, y1 = f.var("x1"), f.var("y1")
        At = br.modified_A(sc.gcs["J"], sc.forms["B"])
        col = lambda j: [At[i][j] for i in range(4)]
        # d/dx1 -> d/dy1, d/dy1 -> -(x1/y1) d/dy1, d/dx2 -> -(x1/y1) d/dx2
        expected = {0: [0, 1, 0, 0], 1: [0, -x1 / y1, 0, 0], 2: [0, 0, -x1 / y1, 0]}
        for j, want in expected.items():
            assert all(f.is_zero(a - f.const(b)) for a, b in zip(col(j), want)), j
        bd = br.BraneData(sc.patches["C"], sc.forms["B"])
        rb = br.brane_reduce(bd, sc.gcs["J"])
        assert rb.report.ok
        Jb = rb.reduced.gcs
        tg = f.var("tg")
        assert all(f.is_zero(Jb.A[i][j] - (-tg if i == j else 0)) for i in range(2) for j in range(2))
        assert Jb.Pi.items_by_name() == {"th x2": f.one}
        assert f.is_zero(Jb.omega[0, 1] - (1 + tg * tg))
        for th in (-1.2, -0.4, 0.1, 0.9, 1.4):
            p = {"th": th, "x2": 0.5}
            assert abs(f.evaluate(Jb.A[0][0], p) + math.tan(th)) < 1e-9
            assert abs(f.evaluate(Jb.omega[0, 1], p) - (1 + math.tan(th) ** 2)) < 1e-9 * (1 + math.tan(th) ** 2)


def test_06_cylinder():
    with criterion(6, "cylinder: reduced matrix with lambda = -b y1 + c x1, not a brane"):
        sc = load_scene("cylinder")
        f = sc.field
        bd = br.BraneData(sc.patches["C"], sc.forms["B"])
        rb = br.brane_reduce(bd, sc.gcs["J"])
        assert rb.report.ok
        # b = 2 and c = x1 + 1 from B, restricted to x1 = sin th, y1 = cos th
        sn, cs = f.var("sn"), f.var("cs")
        lam = -2 * cs + (sn + 1) * sn
        Jb = rb.reduced.gcs
        assert all(f.is_zero(Jb.A[i][j] - (lam if i == j else 0)) for i in range(2) for j in range(2))
        assert Jb.Pi.items_by_name() == {"th x2": f.one}
        assert f.is_zero(Jb.omega[0, 1] - (1 + lam * lam))
        for th in (-2.5, -0.3, 1.0, 2.9):
            want = -2 * math.cos(th) + (math.sin(th) + 1) * math.sin(th)
            assert abs(f.evaluate(Jb.A[0][0], {"th": th, "x2": 0.0}) - want) < 1e-9
        assert not br.check_brane(bd, sc.gcs["J"]).ok
        assert rb.report.outputs["is brane"] is False


def test_07_hopf():
    with criterion(7, "hopf: H_sigma = p*F ds, Severa pushforward F ds, b = 0 rejected"):
        sc = load_scene("hopf")
        patch, K = sc.patches["P"], sc.frames["K"][1]
        a1, a2, t, s = xs = sp.symbols("a1 a2 t s")
        # curvature of the connection A = (a1 da2 - a2 da1)/(1 + a1^2 + a2^2)
        D = 1 + a1**2 + a2**2
        A = {(0,): -a2 / D, (1,): a1 / D}
        F = O.d_form(A, xs, 1)
        assert set(F) == {(0, 1)} and sp.simplify(F[(0, 1)] - 2 / D**2) == 0
        Hs, rep = splitting_curvature(sc.forms["b"], sc.H)
        ours = as_oracle_form(Hs)
        assert set(ours) == {(0, 1, 3)} and sp.simplify(ours[(0, 1, 3)] - F[(0, 1)]) == 0
        form, srep = rd.severa_representative(sc.forms["b"], patch, K)
        assert srep.ok
        ours = as_oracle_form(form)
        assert set(ours) == {(0, 1, 2)} and sp.simplify(ours[(0, 1, 2)] - F[(0, 1)]) == 0
        assert not rd.check_adapted_splitting(None, K, patch).ok


def test_08_coiso():
    with criterion(8, "coiso: reduced Dirac structure is graph(-W-bar^-1)"):
        sc = load_scene("coiso")
        patch, K = sc.patches["C"], sc.frames["K"][1]
        rows, rep = rd.reduce_dirac(sc.frames["L"][1], patch, K, rd.auto_basic_frame(patch))
        assert rep.ok
        # omega-bar = dx1 dy1 on (x1, y1)
        Pi = O.bivector_from_symplectic(sp.Matrix([[0, 1], [-1, 0]]))
        got = rep.outputs["Pi"].table()
        assert all(sp.simplify(O.to_sympy(got[i][j]) - Pi[i, j]) == 0 for i in range(2) for j in range(2))


REDUCTIONS = [("cf", "C", "K", None), ("nstar", "C", "K", None), ("coiso", "C", "K", None),
              ("hopf", "P", "K", "b"), ("sympfol", "M", "F", None), ("kahler", "M", "zero", None),
              ("complex-foliation", "M", "F", None)]


def test_09_representative_independence():
    with criterion(9, "reduced data unchanged under e -> e + k on all reduction scenes"):
        checked = 0
        for name, p, k, b in REDUCTIONS:
            sc = load_scene(name)
            patch, K = sc.patches[p], sc.frames[k][1]
            red = rd.reduce_courant(patch, K, rd.auto_basic_frame(patch, sc.forms.get(b)), perturb=False)
            for seed in (0, 1):
                rep = rd.representative_independence(red, seed=seed)
                assert rep.ok, (name, seed)
                checked += 1
        # brane reductions use K = N*C + J N*C
        for name in ("halfspace", "cylinder", "sympbrane"):
            sc = load_scene(name)
            bd = br.BraneData(sc.patches["C"], sc.forms["B"])
            K = br.K_of(bd, sc.gcs.get("J") or sc.gcs["Js"])
            red = rd.reduce_courant(bd.patch, K, rd.auto_basic_frame(bd.patch, bd.B), perturb=False)
            assert rd.representative_independence(red, seed=3).ok, name
            checked += 1
        # the scene runner reports the same check for every reduce command
        for name in ("cf", "nstar", "hopf", "sympfol", "complex-foliation"):
            for r in run_scene(load_scene(name), "reduce"):
                assert r.status_of("reduced data unchanged under e -> e + k") == "pass", name
        assert checked >= 17


def test_10_symplectic_brane():
    with criterion(10, "sympbrane: I = -omega^-1 F, F + i omega closed, -dF = reduced curvature"):
        sc = load_scene("sympbrane")
        bd = br.BraneData(sc.patches["C"], sc.forms["B"])
        rb = br.brane_reduce(bd, sc.gcs["Js"], require_brane=True)
        assert rb.report.ok
        assert rb.report.status_of("-dF-bar = curvature of the untwisted reduced splitting") == "pass"
        patch = bd.patch
        om, ok = rd.descend_form(patch, patch.pullback(sc.forms["omega"]), rb.report, "omega")
        assert ok
        q = patch.qchart.dim
        W = sp.Matrix(q, q, lambda i, j: O.to_sympy(om[i, j]))
        F = sp.Matrix(q, q, lambda i, j: O.to_sympy(rb.Fbar[i, j]))
        I = sp.Matrix(q, q, lambda i, j: O.to_sympy(rb.I[i][j]))
        assert sp.simplify(I + W.T.inv() * F.T) == sp.zeros(q, q)
        qs = sp.symbols(" ".join(patch.qchart.coords))
        assert not O.d_form(as_oracle_form(rb.Fbar), qs, 2) and not O.d_form(as_oracle_form(om), qs, 2)
        assert br.holomorphic_symplectic_check(rb.Fbar, om, rb.I, patch.qsamples).ok
        # witness: -dF-bar against the curvature of the untwisted reduced splitting
        minus_dF = {k: -v for k, v in O.d_form(as_oracle_form(rb.Fbar), qs, 2).items()}
        assert minus_dF == as_oracle_form(rb.extras["untwisted twist"])

if __name__ == "__main__":
    import sys
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except Exception:
                failed += 1
    print("\n".join(summary_lines()))
    sys.exit(1 if failed else 0)
