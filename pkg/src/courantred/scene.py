"""Scene documents: parsing, validation and command dispatch.

A scene is a JSON object. Expressions are strings in the infix language of
:mod:`courantred.parsing`; rationals are written ``"p/q"``. Top-level keys:

``scene``       name
``coords``      every coordinate name (ambient and chart-only)
``ambient``     ambient coordinates, default ``coords``
``generators``  ``[{"name", "derivatives": {coord: expr}, "model": float expr}]``
``sampling``    ``{"seed", "zero_samples", "tolerance", "random", "lattice", "ranges"}``
``twist``       components of H, ``{"x1 y1 x2": expr}``
``forms``       ``{name: {"degree": k, "components": {...}}}`` ambient forms
``sections``    ``{name: {"vector": {...}, "form": {...}}}``
``gcs``         ``{name: {"A": {src: {tgt: expr}}, "Pi": {...}, "omega": {...}}}``
                or ``{name: {"symplectic": form name or components}}``
``patches``     ``{name: {"leaf", "quotient", "embedding", "defining",
                "coordinate_fields", "quotient_forms", "points", "ranges", ...}}``
``frames``      ``{name: {"patch", "members": [...]}}`` or a derived kind
``commands``    list of ``{"command", "name", "expect", ...}``

See README.md for the per-command keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import branes as br
from . import reduction as rd
from .courant import (GCSMatrix, GenSection, check_axioms, coordinate_sections, dirac_check, gauge_transform,
                      graph_frame, is_poisson, nijenhuis, poisson_graph_frame, splitting_curvature,
                      twisted_bracket)
from .errors import (CourantError, ExprSyntaxError, HypothesisError, PoleError, SceneParseError,
                     UnknownNameError)
from .expr import DiffField, ScalarExpr
from .forms import Chart, FormField
from .linalg import ExactMatrix, rank_basis
from .patch import FramedSubbundle, PatchSetup
from .report import ERROR, Report

COMMANDS = ("check", "reduce", "dirac-reduce", "gcs-reduce", "brane-check", "brane-reduce",
            "severa", "rank", "eval")


@dataclass
class Scene:
    name: str
    field: DiffField
    ambient: Chart
    H: FormField = None
    forms: dict = dc_field(default_factory=dict)
    sections: dict = dc_field(default_factory=dict)
    gcs: dict = dc_field(default_factory=dict)
    patches: dict = dc_field(default_factory=dict)
    frames: dict = dc_field(default_factory=dict)
    commands: list = dc_field(default_factory=list)
    seed: int = 0
    samples: int = 10
    description: str = ""


class _Locator:
    """Maps string values back to line/column positions in the source text."""

    def __init__(self, text):
        self.text = text or ""

    def find(self, value):
        if not self.text or not isinstance(value, str):
            return None, None
        needle = json.dumps(value)
        pos = self.text.find(needle)
        if pos < 0:
            return None, None
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 2  # first character inside the quotes
        return line, col


class _Builder:
    def __init__(self, doc, text, path, seed, samples):
        self.doc = doc
        self.loc = _Locator(text)
        self.path = path
        self.seed = seed
        self.samples = samples

    def fail(self, message, where, value=None):
        line, col = self.loc.find(value) if value is not None else (None, None)
        raise SceneParseError(message, line, col, where)

    def need(self, obj, key, where, kind=None):
        if not isinstance(obj, dict) or key not in obj:
            self.fail(f"missing key {key!r}", where)
        val = obj[key]
        if kind is not None and not isinstance(val, kind):
            self.fail(f"{key!r} has the wrong type", f"{where}.{key}")
        return val

    def expr(self, text, where):
        f = self.field
        if isinstance(text, bool) or not isinstance(text, (str, int)):
            self.fail("expression must be a string or integer", where)
        try:
            return f.parse(text if isinstance(text, str) else str(text))
        except ExprSyntaxError as exc:
            line, col = self.loc.find(text)
            if line is not None and exc.column is not None:
                col += exc.column - 1
            raise SceneParseError(exc.message, line, col, where) from None
        except UnknownNameError as exc:
            line, col = self.loc.find(text)
            raise SceneParseError(str(exc), line, col, where) from None

    def comps(self, chart, degree, table, where):
        if not isinstance(table, dict):
            self.fail("form components must be an object", where)
        out = {}
        for key, val in table.items():
            names = key.split()
            if len(names) != degree:
                self.fail(f"component {key!r} needs {degree} indices", where, key)
            for n in names:
                if n not in chart.coords:
                    self.fail(f"unknown coordinate {n!r} in component {key!r}", where, key)
            out[key] = self.expr(val, f"{where}.{key}")
        try:
            return FormField.from_names(chart, degree, out)
        except ValueError as exc:
            self.fail(str(exc), where)

    def vector(self, chart, table, where):
        if table is None:
            return None
        if not isinstance(table, dict):
            self.fail("vector components must be an object", where)
        vec = [self.field.zero] * chart.dim
        for k, v in table.items():
            if k not in chart.coords:
                self.fail(f"unknown coordinate {k!r}", where, k)
            vec[chart.position(k)] = self.expr(v, f"{where}.{k}")
        return vec

    def point(self, p, where):
        if not isinstance(p, dict):
            self.fail("points must be objects", where)
        try:
            return {k: Fraction(str(v)) for k, v in p.items()}
        except (ValueError, ZeroDivisionError):
            self.fail("point coordinates must be rationals", where)

    # ---------------------------------------------------------------- build
    def build(self):
        doc = self.doc
        if not isinstance(doc, dict):
            self.fail("scene document must be an object", "$")
        name = self.need(doc, "scene", "$", str)
        coords = self.need(doc, "coords", "$", list)
        sampling = doc.get("sampling", {})
        seed = self.seed if self.seed is not None else int(sampling.get("seed", 0))
        samples = self.samples if self.samples is not None else int(sampling.get("random", 10))
        ranges = {k: tuple(v) for k, v in sampling.get("ranges", {}).items()}
        try:
            self.field = DiffField(coords, doc.get("generators", ()), seed=seed,
                                   samples=int(sampling.get("zero_samples", 25)),
                                   tolerance=float(sampling.get("tolerance", 1e-9)), ranges=ranges)
        except (ValueError, UnknownNameError, ExprSyntaxError) as exc:
            self.fail(f"field declaration: {exc}", "$.generators")
        f = self.field
        amb_names = doc.get("ambient", coords)
        bad = [c for c in amb_names if c not in coords]
        if bad:
            self.fail(f"ambient coordinates {bad} not declared in coords", "$.ambient")
        amb = Chart(f, amb_names)
        sc = Scene(name, f, amb, seed=seed, samples=samples, description=doc.get("description", ""))
        self.scene = sc
        if doc.get("twist"):
            sc.H = self.comps(amb, 3, doc["twist"], "$.twist")
            if not sc.H.d().is_zero():
                self.fail("twist H is not closed", "$.twist")
        for k, spec in doc.get("forms", {}).items():
            deg = int(spec.get("degree", 2))
            sc.forms[k] = self.comps(amb, deg, self.need(spec, "components", f"$.forms.{k}"), f"$.forms.{k}")
        for k, spec in doc.get("sections", {}).items():
            sc.sections[k] = self.section(spec, f"$.sections.{k}")
        for k, spec in doc.get("gcs", {}).items():
            sc.gcs[k] = self.gcs(spec, f"$.gcs.{k}")
        lattice_default = int(sampling.get("lattice", 2))
        for k, spec in doc.get("patches", {}).items():
            sc.patches[k] = self.patch(k, spec, f"$.patches.{k}", lattice_default, ranges)
        for k, spec in doc.get("frames", {}).items():
            sc.frames[k] = self.frame(k, spec, f"$.frames.{k}")
        cmds = doc.get("commands", [])
        if not isinstance(cmds, list):
            self.fail("commands must be a list", "$.commands")
        for i, c in enumerate(cmds):
            sc.commands.append(self.command(i, c, f"$.commands[{i}]"))
        return sc

    def section(self, spec, where):
        amb = self.scene.ambient
        if isinstance(spec, str):
            if spec not in self.scene.sections:
                self.fail(f"unknown section {spec!r}", where, spec)
            return self.scene.sections[spec]
        if not isinstance(spec, dict):
            self.fail("section must be an object or a section name", where)
        s = GenSection(amb, self.vector(amb, spec.get("vector"), where + ".vector"),
                       self.vector(amb, spec.get("form"), where + ".form"))
        if "gauge" in spec:
            s = gauge_transform(s, self.ref("forms", spec["gauge"], where + ".gauge"))
        if "apply" in spec:
            s = self.ref("gcs", spec["apply"], where + ".apply").apply(s)
        return s

    def ref(self, table, key, where):
        tab = getattr(self.scene, table)
        if key not in tab:
            self.fail(f"unknown {table[:-1]} {key!r}", where, key)
        return tab[key]

    def gcs(self, spec, where):
        amb = self.scene.ambient
        f = self.field
        n = amb.dim
        if "symplectic" in spec:
            om = spec["symplectic"]
            om = self.ref("forms", om, where) if isinstance(om, str) else self.comps(amb, 2, om, where + ".symplectic")
            try:
                J = GCSMatrix.symplectic(om)
            except HypothesisError as exc:
                self.fail(str(exc), where)
        else:
            A = [[f.zero] * n for _ in range(n)]
            for src, col in spec.get("A", {}).items():
                if src not in amb.coords:
                    self.fail(f"unknown coordinate {src!r}", where + ".A", src)
                for tgt, val in col.items():
                    if tgt not in amb.coords:
                        self.fail(f"unknown coordinate {tgt!r}", where + ".A", tgt)
                    A[amb.position(tgt)][amb.position(src)] = self.expr(val, f"{where}.A.{src}.{tgt}")
            Pi = self.comps(amb, 2, spec.get("Pi", {}), where + ".Pi")
            om = self.comps(amb, 2, spec.get("omega", {}), where + ".omega")
            J = GCSMatrix(amb, A, Pi, om)
        if spec.get("gauge"):
            J = gauge_transform(J, self.ref("forms", spec["gauge"], where + ".gauge"))
        val = J.validate()
        if not val.ok:
            self.fail("generalized complex structure fails: " + ", ".join(c.name for c in val.failed), where)
        return J

    def patch(self, name, spec, where, lattice, ranges):
        sc = self.scene
        amb = sc.ambient
        f = self.field
        leaf = spec.get("leaf", [])
        quotient = self.need(spec, "quotient", where, list)
        for c in list(leaf) + list(quotient):
            if c not in f.coords:
                self.fail(f"unknown chart coordinate {c!r}", where, c)
        emb_spec = spec.get("embedding", {c: c for c in amb.coords})
        emb = {}
        for k in amb.coords:
            if k not in emb_spec:
                self.fail(f"embedding misses ambient coordinate {k!r}", where + ".embedding")
            emb[k] = self.expr(emb_spec[k], f"{where}.embedding.{k}")
        defining = [self.expr(g, f"{where}.defining[{i}]") for i, g in enumerate(spec.get("defining", []))]
        cf = {c: self.vector(amb, v, f"{where}.coordinate_fields.{c}")
              for c, v in spec.get("coordinate_fields", {}).items()}
        qf = {c: self.vector(amb, v, f"{where}.quotient_forms.{c}")
              for c, v in spec.get("quotient_forms", {}).items()}
        pts = [self.point(p, f"{where}.points[{i}]") for i, p in enumerate(spec.get("points", []))]
        qpts = [self.point(p, f"{where}.quotient_points[{i}]") for i, p in enumerate(spec.get("quotient_points", []))]
        rng = dict(ranges)
        rng.update({k: tuple(v) for k, v in spec.get("ranges", {}).items()})
        try:
            return PatchSetup(name, amb, leaf, quotient, emb, defining, sc.H, cf, qf, pts, rng,
                              random_count=int(spec.get("random", self.scene.samples)),
                              lattice=int(spec.get("lattice", lattice)), seed=self.scene.seed,
                              quotient_points=qpts)
        except (UnknownNameError, HypothesisError, ValueError) as exc:
            self.fail(f"patch {name!r}: {exc}", where)

    def frame(self, name, spec, where):
        sc = self.scene
        pname = self.need(spec, "patch", where, str)
        patch = self.ref("patches", pname, where + ".patch")
        kind = spec.get("kind", "members")
        try:
            if kind == "members":
                members = []
                for i, m in enumerate(self.need(spec, "members", where, list)):
                    if m == "conormal":
                        members += patch.conormal_frame()
                    elif isinstance(m, dict) and m.get("conormal"):
                        J = self.ref("gcs", m["conormal"], f"{where}.members[{i}]")
                        members += [J.apply(s) for s in patch.conormal_frame()]
                    else:
                        members.append(self.section(m, f"{where}.members[{i}]"))
                sub = FramedSubbundle(name, members, spec.get("rank"))
            elif kind == "graph-of-bivector":
                J = self.ref("gcs", self.need(spec, "gcs", where, str), where + ".gcs")
                sub = FramedSubbundle(name, poisson_graph_frame(sc.ambient, J.Pi))
            elif kind == "graph-of-form":
                B = self.ref("forms", self.need(spec, "form", where, str), where + ".form")
                sub = FramedSubbundle(name, graph_frame(sc.ambient, B))
            elif kind == "tau":
                B = self.ref("forms", self.need(spec, "form", where, str), where + ".form")
                sub = br.tau_CF(patch, patch.pullback(B), B)
                sub.name = name
            else:
                self.fail(f"unknown frame kind {kind!r}", where + ".kind", kind)
        except HypothesisError as exc:
            self.fail(str(exc), where)
        return pname, sub

    _REFS = {"patch": "patches", "K": "frames", "L": "frames", "J": "gcs", "J2": "gcs", "B": "forms",
             "B2": "forms", "Bg": "forms", "b": "forms", "b2": "forms", "omega": "forms", "form": "forms"}

    def command(self, i, c, where):
        if not isinstance(c, dict):
            self.fail("command must be an object", where)
        cmd = self.need(c, "command", where, str)
        if cmd not in COMMANDS:
            self.fail(f"unknown command {cmd!r}", where, cmd)
        for key, table in self._REFS.items():
            if key in c and c[key] is not None:
                self.ref(table, c[key], f"{where}.{key}")
        fr = c.get("frame")
        if isinstance(fr, list):
            for j, m in enumerate(fr):
                self.section(m, f"{where}.frame[{j}]")
        for key in ("sections",):
            for j, m in enumerate(c.get(key, [])):
                self.section(m, f"{where}.{key}[{j}]")
        expect = c.get("expect", "pass")
        if expect not in ("pass", "fail", "error"):
            self.fail(f"expect must be pass, fail or error, not {expect!r}", where, expect)
        out = dict(c)
        out.setdefault("name", f"{cmd}#{i}")
        out["expect"] = expect
        return out


def parse_scene(text, path=None, seed=None, samples=None):
    """Parse and validate a scene document (string). Raises SceneParseError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(exc.msg, exc.lineno, exc.colno, path) from None
    return _Builder(doc, text, path, seed, samples).build()


def scene_source(name_or_path):
    """Read a scene file, or a shipped scene by name (``"hopf"``)."""
    p = Path(name_or_path)
    if p.exists():
        return p.read_text(), str(p)
    stem = name_or_path[:-5] if name_or_path.endswith(".json") else name_or_path
    res = resources.files("courantred") / "scenes" / f"{stem}.json"
    if res.is_file():
        return res.read_text(), f"scenes/{stem}.json"
    raise FileNotFoundError(f"no scene file or shipped scene named {name_or_path!r}")


def shipped_scenes():
    root = resources.files("courantred") / "scenes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scene(name_or_path, seed=None, samples=None):
    text, path = scene_source(name_or_path)
    return parse_scene(text, path, seed, samples)


# ---------------------------------------------------------------------------
# running commands


def _frame_for(sc, cmd, patch, B=None):
    spec = cmd.get("frame", "auto")
    if spec == "auto":
        b = sc.forms[cmd["b"]] if cmd.get("b") else B
        return rd.auto_basic_frame(patch, b)
    b = _Builder({}, "", None, None, None)
    b.field = sc.field
    b.scene = sc
    return [b.section(m, "frame") for m in spec]


def _subbundle(sc, key):
    return sc.frames[key][1]


def _compare(sc, rep, label, computed, expected, chart=None):
    """Add a check comparing a computed value with an expected literal."""
    f = sc.field
    b = _Builder({}, "", None, None, None)
    b.field = f
    b.scene = sc
    try:
        if isinstance(computed, FormField):
            exp = b.comps(computed.chart, computed.degree, expected, label)
            ok = computed.equals(exp)
        elif isinstance(computed, list) and computed and isinstance(computed[0], list):
            ok = len(computed) == len(expected) and all(
                len(r) == len(e) and all(f.is_zero(f.const(x) - b.expr(y, label)) for x, y in zip(r, e))
                for r, e in zip(computed, expected))
        elif isinstance(computed, (ScalarExpr, int, Fraction)):
            ok = f.is_zero(f.const(computed) - b.expr(expected, label))
        else:
            ok = computed == expected
    except SceneParseError as exc:
        rep.error(f"expected {label}", str(exc))
        return
    rep.add(f"expected {label}", ok, "" if ok else "computed value differs")


def _values_check(sc, rep, values, cmd):
    for key, exp in cmd.get("values", {}).items():
        if key not in values:
            rep.error(f"expected {key}", "no such computed value")
            continue
        _compare(sc, rep, key, values[key], exp)


def run(sc, cmd):
    """Run one command entry. Never raises for hypothesis failures: they become error checks."""
    handler = _HANDLERS[cmd["command"]]
    try:
        rep, values = handler(sc, cmd)
    except HypothesisError as exc:
        rep = Report(f"{cmd['name']}")
        rep.error("precondition", str(exc))
        values = {}
    except (PoleError, UnknownNameError) as exc:
        rep = Report(f"{cmd['name']}")
        rep.error("evaluation", str(exc))
        values = {}
    rep.title = f"{cmd['name']} [{cmd['command']}]"
    if values:
        _values_check(sc, rep, values, cmd)
    rep.expect = cmd.get("expect", "pass")
    return rep


def _run_check(sc, cmd):
    what = cmd.get("what", "patch")
    H = sc.H
    if what == "patch":
        return sc.patches[cmd["patch"]].validate(), {}
    if what == "gcs":
        J = sc.gcs[cmd["J"]]
        rep = J.validate()
        secs = _sections(sc, cmd) or coordinate_sections(sc.ambient)
        bad = [(i, j) for i in range(len(secs)) for j in range(i, len(secs))
               if not nijenhuis(J, secs[i], secs[j], H).is_zero()]
        rep.add("Nijenhuis tensor vanishes", not bad, f"pairs {bad[:4]}" if bad else "")
        rep.add("induced bivector is Poisson", is_poisson(J.Pi))
        return rep, {"Pi": J.Pi}
    if what == "axioms":
        secs = _sections(sc, cmd) or coordinate_sections(sc.ambient)
        fns = [sc.field.parse(x) for x in cmd.get("functions", [])]
        bfn = None
        if cmd.get("drop_twist"):
            bfn = lambda a, b: twisted_bracket(a, b, H, drop_twist=True)
        return check_axioms(H, secs, fns, bracket_fn=bfn), {}
    if what == "dirac":
        frame = _subbundle(sc, cmd["L"]).ambient_members()
        pts = [{k: Fraction(str(v)) for k, v in p.items()} for p in cmd.get("points", [])] or \
            sc.patches[cmd["patch"]].samples
        return dirac_check(frame, H, pts), {}
    if what == "setup":
        return rd.check_setup(_subbundle(sc, cmd["K"]), sc.patches[cmd["patch"]]), {}
    if what == "basic":
        patch = sc.patches[cmd["patch"]]
        K = _subbundle(sc, cmd["K"])
        rep = Report("basic sections")
        for i, s in enumerate(_sections(sc, cmd)):
            rep.add(f"section {i} basic", rd.is_basic(s, K, patch))
        return rep, {}
    if what == "bracket-extension":
        secs = _sections(sc, cmd)
        if len(secs) != 2:
            raise HypothesisError("bracket-extension needs exactly two sections")
        return rd.bracket_extension_check(sc.patches[cmd["patch"]], _subbundle(sc, cmd["K"]), *secs,
                                          seed=sc.seed), {}
    if what == "splitting-curvature":
        form, rep = splitting_curvature(sc.forms[cmd["b"]], H)
        rep.outputs["H_sigma"] = form
        return rep, {"H_sigma": form}
    if what == "adapted":
        b = sc.forms[cmd["b"]] if cmd.get("b") else None
        return rd.check_adapted_splitting(b, _subbundle(sc, cmd["K"]), sc.patches[cmd["patch"]]), {}
    raise HypothesisError(f"unknown check target {what!r}")


def _sections(sc, cmd):
    b = _Builder({}, "", None, None, None)
    b.field = sc.field
    b.scene = sc
    return [b.section(m, "sections") for m in cmd.get("sections", [])]


def _run_reduce(sc, cmd):
    patch = sc.patches[cmd["patch"]]
    K = _subbundle(sc, cmd["K"])
    red = rd.reduce_courant(patch, K, _frame_for(sc, cmd, patch), seed=sc.seed)
    vals = {"pairing": red.pairing, "anchor": red.anchor}
    if red.twist is not None:
        red.report.outputs["H_bar"] = red.twist
        vals["H_bar"] = red.twist
    return red.report, vals


def _run_dirac(sc, cmd):
    patch = sc.patches[cmd["patch"]]
    K = _subbundle(sc, cmd["K"])
    rows, rep = rd.reduce_dirac(_subbundle(sc, cmd["L"]), patch, K, _frame_for(sc, cmd, patch))
    vals = {k: rep.outputs[k] for k in ("Pi", "F") if k in rep.outputs}
    if rows is not None:
        vals["frame"] = rows
    return rep, vals


def _gcs_values(J):
    return {"A": [list(r) for r in J.A], "Pi": J.Pi, "omega": J.omega}


def _run_gcs(sc, cmd):
    patch = sc.patches[cmd["patch"]]
    mode = cmd.get("mode", "gcs")
    J = sc.gcs[cmd["J"]]
    if mode == "cosymplectic":
        red, rep = br.cosymplectic_restrict(J, patch)
        return rep, _gcs_values(red.gcs)
    K = _subbundle(sc, cmd["K"])
    frame = _frame_for(sc, cmd, patch)
    if mode == "kahler":
        (r1, r2), rep = rd.reduce_kahler(J, sc.gcs[cmd["J2"]], patch, K, frame)
        vals = {f"J1 {k}": v for k, v in _gcs_values(r1.gcs).items()}
        vals.update({f"J2 {k}": v for k, v in _gcs_values(r2.gcs).items()})
        return rep, vals
    red, rep = rd.reduce_gcs(J, patch, K, frame)
    rep.extend(red.report, "courant: ")
    return rep, (_gcs_values(red.gcs) if red.gcs is not None else {"matrix": red.gcs_matrix})


def _brane(sc, cmd):
    patch = sc.patches[cmd["patch"]]
    B = sc.forms[cmd["B"]] if cmd.get("B") else FormField(sc.ambient, 2)
    return br.BraneData(patch, B)


def _run_brane_check(sc, cmd):
    mode = cmd.get("mode", "brane")
    patch = sc.patches[cmd["patch"]]
    J = sc.gcs.get(cmd.get("J"))
    if mode == "pre-poisson":
        L = _subbundle(sc, cmd["L"]) if cmd.get("L") else _brane(sc, cmd).L
        rep = br.pre_poisson_check(L, J, patch)
        return rep, {}
    bd = _brane(sc, cmd)
    if mode == "generalized":
        return br.check_generalized_submanifold(bd, sc.H), {}
    if mode == "swsign":
        rep = Report("SW sign identity")
        res = br.swsign_residuals(bd, sc.H)
        bad = [k for k, v in res.items() if not sc.field.is_zero(v)]
        rep.add("2<[e_a,e_b],e_c> = (i*H + dF)(d_a,d_b,d_c)", not bad, f"{bad[:4]}" if bad else "",
                triples=len(res))
        return rep, {}
    if mode == "weak":
        rep = br.check_weak_brane(bd, J, sc.H)
        return rep, {"A + Pi B": rep.outputs["A + Pi B"]}
    if mode == "extension":
        return br.extension_independence(bd, J, sc.forms[cmd["B2"]], sc.H), {}
    rep = br.check_generalized_submanifold(bd, sc.H)
    rep.extend(br.check_brane(bd, J), "")
    return rep, {}


def _run_brane_reduce(sc, cmd):
    bd = _brane(sc, cmd)
    J = sc.gcs[cmd["J"]]
    rb = br.brane_reduce(bd, J, sc.H, require_brane=bool(cmd.get("require_brane")))
    rep = rb.report
    vals = _gcs_values(rb.reduced.gcs)
    if rb.Fbar is not None:
        vals["F_bar"] = rb.Fbar
    if rb.I is not None:
        vals["I_bar"] = rb.I
    if cmd.get("omega") and rb.Fbar is not None:
        patch = bd.patch
        om, ok = rd.descend_form(patch, patch.pullback(sc.forms[cmd["omega"]]), rep, "omega")
        if ok:
            same, exp = br.symplectic_inverse_check(rb.Fbar, om, rb.I)
            rep.add("I-bar = -omega-bar^-1 F-bar", same)
            rep.extend(br.holomorphic_symplectic_check(rb.Fbar, om, rb.I, patch.qsamples), "")
    if cmd.get("Bg"):
        rep.extend(br.gauge_path_check(bd, J, sc.forms[cmd["Bg"]], sc.H), "")
    return rep, vals


def _run_severa(sc, cmd):
    patch = sc.patches[cmd["patch"]]
    K = _subbundle(sc, cmd["K"])
    if cmd.get("search"):
        s = cmd["search"]
        b, rep = rd.find_adapted_splitting(patch, K, _frame_for(sc, {"frame": cmd.get("frame", "auto")}, patch),
                                           int(s.get("degree", 2)), s.get("denominator"))
        vals = {}
        if b is not None:
            form, r2 = rd.severa_representative(b, patch, K)
            rep.extend(r2, "")
            vals = {"b": b, "H_bar": form}
        return rep, vals
    b = sc.forms[cmd["b"]] if cmd.get("b") else None
    if cmd.get("adapted_only"):
        return rd.check_adapted_splitting(b, K, patch), {}
    b2 = sc.forms[cmd["b2"]] if cmd.get("b2") else None
    form, rep = rd.severa_representative(b, patch, K, b2)
    vals = {"H_bar": form}
    if "witness" in rep.outputs:
        vals["witness"] = rep.outputs["witness"]
    if b is not None:
        hs, r2 = splitting_curvature(b, sc.H)
        rep.extend(r2, "")
        rep.outputs["H_sigma"] = patch.pullback(hs)
        vals["H_sigma"] = patch.pullback(hs)
    return rep, vals


def _run_rank(sc, cmd):
    rep = Report("ranks")
    f = sc.field
    of = cmd.get("of", "characteristic")
    pts = [{k: Fraction(str(v)) for k, v in p.items()} for p in cmd.get("points", [])]
    ranks = []
    if of == "characteristic":
        patch = sc.patches[cmd["patch"]]
        J = sc.gcs[cmd["J"]]
        if pts:
            patch = patch.with_samples(pts)
        ranks = [r for _, r in br.characteristic_rank(J, patch)]
    elif of == "bivector":
        J = sc.gcs[cmd["J"]]
        m = ExactMatrix(f, J.Pi.table())
        ranks = [rank_basis(m, p)[1] for p in pts]
    else:
        raise HypothesisError(f"unknown rank target {of!r}")
    rep.outputs["ranks"] = ranks
    exp = cmd.get("ranks")
    if exp is not None:
        rep.add("ranks as expected", ranks == list(exp), f"computed {ranks}")
    return rep, {}


def _run_eval(sc, cmd):
    rep = Report("eval")
    f = sc.field
    b = _Builder({}, "", None, None, None)
    b.field = f
    b.scene = sc
    pts = [{k: Fraction(str(v)) for k, v in p.items()} for p in cmd.get("points", [{}])]
    out = {}
    for label, text in cmd.get("exprs", {}).items():
        e = b.expr(text, f"exprs.{label}")
        vals = []
        for p in pts:
            try:
                vals.append(f.evaluate(e, p))
            except PoleError:
                vals.append("pole")
        out[label] = vals
    rep.outputs.update(out)
    zero = cmd.get("zero", [])
    for label in zero:
        rep.add(f"{label} is zero", f.is_zero(b.expr(cmd["exprs"][label], label)))
    return rep, {}


_HANDLERS = {
    "check": _run_check,
    "reduce": _run_reduce,
    "dirac-reduce": _run_dirac,
    "gcs-reduce": _run_gcs,
    "brane-check": _run_brane_check,
    "brane-reduce": _run_brane_reduce,
    "severa": _run_severa,
    "rank": _run_rank,
    "eval": _run_eval,
}


def select(sc, command=None):
    """Command entries whose type or name equals ``command`` (all when None)."""
    if command is None:
        return list(sc.commands)
    return [c for c in sc.commands if c["command"] == command or c["name"] == command]


def run_scene(sc, command=None):
    return [run(sc, c) for c in select(sc, command)]


def exit_code(reports):
    """0 when every report is as expected, 2 if an unexpected precondition error occurred, else 1."""
    bad = [r for r in reports if not r.as_expected]
    if not bad:
        return 0
    if any(c.status == ERROR for r in bad for c in r.checks):
        return 2
    return 1


__all__ = ["Scene", "parse_scene", "load_scene", "scene_source", "shipped_scenes", "run", "run_scene",
           "select", "exit_code", "COMMANDS", "CourantError"]
