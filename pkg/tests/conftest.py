import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from courantred.courant import GenSection  # noqa: E402
from courantred.expr import DiffField  # noqa: E402
from courantred.forms import Chart, FormField  # noqa: E402

R4 = ("x1", "y1", "x2", "y2")


@pytest.fixture
def r4():
    f = DiffField(R4)
    return f, Chart(f, R4)


def random_poly(f, rng, names, degree=2, terms=3):
    e = f.zero
    for _ in range(terms):
        t = f.const(rng.randint(-3, 3))
        for _ in range(rng.randint(0, degree)):
            t = t * f.var(rng.choice(names))
        e = e + t
    return e


def random_section(ch, rng, degree=2):
    f = ch.field
    return GenSection(ch, [random_poly(f, rng, ch.coords, degree) for _ in ch.coords],
                      [random_poly(f, rng, ch.coords, degree) for _ in ch.coords])


def random_two_form(ch, rng, degree=2):
    n = ch.dim
    return FormField(ch, 2, {(i, j): random_poly(ch.field, rng, ch.coords, degree)
                             for i in range(n) for j in range(i + 1, n)})


def as_oracle_section(e):
    from oracles import to_sympy
    return [to_sympy(x) for x in e.vec], [to_sympy(x) for x in e.form]


def as_oracle_form(form):
    from oracles import to_sympy
    return {k: to_sympy(v) for k, v in form.comps.items()}


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
