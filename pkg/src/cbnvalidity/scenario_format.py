"""Scenario files: a declarative YAML document describing one experiment.

A scenario carries variables, CBNs, interventions and intervention sets,
data-generating processes with their representation maps, interpretations,
finite SCMs, τ maps and a list of expectations.  Identifiers cross-reference
inside the file.  Exact rationals are written as ``"p/q"`` strings; real
numbers are plain YAML numbers (floats are written with Python's shortest
round-trip representation, at most 17 significant digits).

:func:`parse_scenario` validates the document (unknown keys are rejected,
errors carry line and column) and compiles it into engine objects.
:func:`canonical_dump` writes the canonical text form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .abstraction import FiniteScm, HardIntervention, Mechanism, hard_to_intervention, scm_to_cbn
from .cbn import Cbn, interventional_dist, observational_dist
from .dgp import AffineExpectation, Dgp, ExpectedCost, ReverseEntropy
from .distributions import FiniteDist, GaussianDist, marginal
from .errors import CausalValidityError, ScenarioError
from .interpretations import IntC, IntK, IntM, IntP, IntS, IntSTilde, IntTildeIF
from .kernels import FiniteKernel, LinearGaussianKernel
from .maps import AffineMap, IdentityMap, TableMap

PROVENANCES = ("PAPER", "TRIVIAL", "DERIVED")


# ---------------------------------------------------------------------------
# YAML loading with positions
# ---------------------------------------------------------------------------


class _Map(dict):
    line = column = None
    key_pos: dict = {}


class _Seq(list):
    line = column = None


class _Loader(yaml.SafeLoader):
    pass


def _construct_map(loader, node):
    seen = {}
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in seen:
            raise ScenarioError(
                f"duplicate key {key!r}", key_node.start_mark.line + 1, key_node.start_mark.column + 1
            )
        seen[key] = (key_node.start_mark.line + 1, key_node.start_mark.column + 1)
    out = _Map(loader.construct_mapping(node, deep=True))
    out.line = node.start_mark.line + 1
    out.column = node.start_mark.column + 1
    out.key_pos = seen
    return out


def _construct_seq(loader, node):
    out = _Seq(loader.construct_sequence(node, deep=True))
    out.line = node.start_mark.line + 1
    out.column = node.start_mark.column + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_map)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_seq)


def load_document(text: str):
    """Parse YAML text into positioned dicts and lists."""
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ScenarioError(f"YAML syntax error: {exc.problem}", mark.line + 1, mark.column + 1) from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"YAML error: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("a scenario document must be a mapping", 1, 1)
    return doc


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    return obj


class _Dumper(yaml.SafeDumper):
    pass


def _repr_float(dumper, value):
    if math.isnan(value) or math.isinf(value):
        raise ValueError("non-finite floats are written as strings")
    return dumper.represent_scalar("tag:yaml.org,2002:float", repr(value))


_Dumper.add_representer(float, _repr_float)


def canonical_dump(doc) -> str:
    """Canonical text of a scenario document (block style, scalar lists inline)."""
    return yaml.dump(
        _plain(doc),
        Dumper=_Dumper,
        sort_keys=False,
        default_flow_style=None,
        allow_unicode=True,
        width=100,
    )


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------


def _pos(node, key=None):
    if isinstance(node, _Map) and key is not None and key in node.key_pos:
        return node.key_pos[key]
    return (getattr(node, "line", None), getattr(node, "column", None))


def _err(msg, node=None, key=None):
    line, col = _pos(node, key)
    return ScenarioError(msg, line, col)


def _mapping(node, where, allowed, required=()):
    if not isinstance(node, dict):
        raise _err(f"{where} must be a mapping", node)
    for k in node:
        if k not in allowed:
            raise _err(f"unknown key {k!r} in {where}", node, k)
    for k in required:
        if k not in node:
            raise _err(f"missing key {k!r} in {where}", node)
    return node


def _list(node, where):
    if not isinstance(node, list):
        raise _err(f"{where} must be a list", node)
    return node


def _rational(x, where, node=None):
    if isinstance(x, bool):
        raise _err(f"{where}: expected a rational, got a boolean", node)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise _err(f"{where}: expected an exact rational such as \"3/10\", got {x!r}", node)


def _real(x, where, node=None):
    if isinstance(x, bool):
        raise _err(f"{where}: expected a number, got a boolean", node)
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        s = x.strip()
        if s in ("inf", "+inf"):
            return math.inf
        try:
            return float(Fraction(s))
        except (ValueError, ZeroDivisionError):
            pass
    raise _err(f"{where}: expected a number, got {x!r}", node)


def _assignment(key, n, where, node=None):
    parts = [key] if isinstance(key, int) else str(key).split(",")
    try:
        values = tuple(int(str(p).strip()) for p in parts)
    except ValueError:
        raise _err(f"{where}: bad assignment {key!r}", node, key) from None
    if len(values) != n:
        raise _err(f"{where}: assignment {key!r} needs {n} values", node, key)
    return values


def _id(node, key, table, what):
    ident = node[key]
    if ident not in table:
        raise _err(f"unknown {what} id {ident!r}", node, key)
    return table[ident]


# ---------------------------------------------------------------------------
# compiled scenario
# ---------------------------------------------------------------------------


@dataclass
class DgpEntry:
    """A compiled process together with its representation map."""

    dgp: Dgp
    representation: object


@dataclass
class Scenario:
    """A compiled scenario file.

    The ``raw`` document is kept for canonical re-serialization.
    """

    id: str
    title: str
    raw: dict
    variables: dict = field(default_factory=dict)
    cbns: dict = field(default_factory=dict)
    interventions: dict = field(default_factory=dict)
    intervention_sets: dict = field(default_factory=dict)
    dgps: dict = field(default_factory=dict)
    interpretations: dict = field(default_factory=dict)
    scms: dict = field(default_factory=dict)
    tau_maps: dict = field(default_factory=dict)
    expectations: list = field(default_factory=list)
    source: str | None = None

    def dgp_entry(self, ident=None) -> DgpEntry:
        if ident is None:
            if len(self.dgps) != 1:
                raise ScenarioError(f"scenario {self.id} has several processes; name one")
            return next(iter(self.dgps.values()))
        if ident not in self.dgps:
            raise ScenarioError(f"unknown dgp id {ident!r}")
        return self.dgps[ident]

    def canonical_text(self) -> str:
        return canonical_dump(self.raw)


TOP_KEYS = (
    "id", "title", "description", "variables", "scms", "cbns", "interventions",
    "intervention_sets", "tau_maps", "dgps", "interpretations", "expectations",
)


def parse_scenario(text: str, source: str | None = None) -> Scenario:
    """Validate and compile a scenario document."""
    doc = load_document(text)
    _mapping(doc, "scenario", TOP_KEYS, ("id",))
    s = Scenario(str(doc["id"]), str(doc.get("title", "")), doc, source=source)
    try:
        _compile(s, doc)
    except ScenarioError:
        raise
    except CausalValidityError as exc:
        raise ScenarioError(f"invalid scenario content: {exc}") from None
    return s


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    return parse_scenario(text, str(path))


def _compile(s: Scenario, doc):
    for v in _list(doc.get("variables", []), "variables"):
        _mapping(v, "variable", ("name", "kind", "domain"), ("name", "kind"))
        if v["kind"] not in ("finite", "gaussian"):
            raise _err(f"variable kind must be finite or gaussian, got {v['kind']!r}", v, "kind")
        if v["kind"] == "finite":
            if "domain" not in v:
                raise _err(f"finite variable {v['name']} needs a domain", v)
            dom = tuple(int(x) for x in _list(v["domain"], "domain"))
        else:
            if "domain" in v:
                raise _err("gaussian variables take no domain", v, "domain")
            dom = None
        if v["name"] in s.variables:
            raise _err(f"duplicate variable {v['name']!r}", v, "name")
        s.variables[v["name"]] = (v["kind"], dom)

    for ident, spec in _mapping(doc.get("scms", {}), "scms", doc.get("scms", {}).keys()).items():
        s.scms[ident] = _compile_scm(s, ident, spec)
    for ident, spec in (doc.get("cbns") or {}).items():
        s.cbns[ident] = _compile_cbn(s, ident, spec)
    for ident, spec in (doc.get("interventions") or {}).items():
        s.interventions[ident] = _compile_intervention(s, ident, spec)
    for ident, members in (doc.get("intervention_sets") or {}).items():
        out = []
        for m in _list(members, f"intervention set {ident}"):
            if m not in s.interventions:
                raise _err(f"unknown intervention id {m!r} in set {ident}", members)
            out.append(s.interventions[m])
        s.intervention_sets[ident] = out
    for ident, spec in (doc.get("tau_maps") or {}).items():
        if isinstance(spec, dict) and "matrix" in spec:
            _mapping(spec, f"tau map {ident}", ("inputs", "outputs", "matrix", "offset"),
                     ("inputs", "outputs", "matrix"))
            matrix = [[_rational(x, f"tau map {ident}", spec) for x in row] for row in spec["matrix"]]
            offset = [_rational(x, f"tau map {ident}", spec) for x in spec.get("offset", [0] * len(matrix))]
            s.tau_maps[ident] = AffineMap(spec["inputs"], spec["outputs"], matrix, offset)
            continue
        _mapping(spec, f"tau map {ident}", ("inputs", "outputs", "entries"), ("inputs", "outputs", "entries"))
        n = len(spec["inputs"])
        table = {
            _assignment(k, n, f"tau map {ident}", spec["entries"]): tuple(v) if isinstance(v, list) else (v,)
            for k, v in _mapping(spec["entries"], "entries", spec["entries"].keys()).items()
        }
        s.tau_maps[ident] = TableMap(spec["inputs"], spec["outputs"], table)
    for ident, spec in (doc.get("dgps") or {}).items():
        s.dgps[ident] = _compile_dgp(s, ident, spec)
    for ident, spec in (doc.get("interpretations") or {}).items():
        s.interpretations[ident] = _compile_interpretation(s, ident, spec)
    for e in _list(doc.get("expectations", []), "expectations"):
        _validate_expectation(s, e)
        s.expectations.append(e)


# -- kernels and CBNs -------------------------------------------------------


def _var(s, name, node, key=None):
    if name not in s.variables:
        raise _err(f"undeclared variable {name!r}", node, key)
    return s.variables[name]


def _compile_kernel(s, node_name, parents, spec, where):
    kind, dom = _var(s, node_name, spec)
    _mapping(spec, where, ("point", "constant", "rows", "normal"))
    if len(spec) != 1:
        raise _err(f"{where} needs exactly one of point, constant, rows, normal", spec)
    form = next(iter(spec))
    if kind == "gaussian":
        if form == "point":
            return LinearGaussianKernel.point(_real(spec["point"], where, spec), len(parents))
        if form != "normal":
            raise _err(f"{where}: gaussian kernels are 'point' or 'normal'", spec, form)
        n = _mapping(spec["normal"], where, ("mean", "weights", "variance"), ("mean", "variance"))
        weights = [_real(w, where, n) for w in n.get("weights", [0] * len(parents))]
        if len(weights) != len(parents):
            raise _err(f"{where}: {len(parents)} weights expected", n, "weights")
        return LinearGaussianKernel(_real(n["mean"], where, n), weights, _real(n["variance"], where, n))
    pdoms = [_var(s, p, spec)[1] for p in parents]
    if form == "point":
        return FiniteKernel.point(dom, int(spec["point"]), pdoms)
    if form == "constant":
        probs = [_rational(p, where, spec) for p in _list(spec["constant"], where)]
        if len(probs) != len(dom):
            raise _err(f"{where}: {len(dom)} probabilities expected", spec, "constant")
        return FiniteKernel.constant(dom, probs, pdoms)
    if form == "rows":
        rows_node = _mapping(spec["rows"], where, spec["rows"].keys())
        rows = {}
        for k, row in rows_node.items():
            pa = _assignment(k, len(parents), where, rows_node)
            probs = [_rational(p, where, rows_node) for p in _list(row, where)]
            if len(probs) != len(dom):
                raise _err(f"{where}: {len(dom)} probabilities expected", rows_node, k)
            rows[pa] = probs
        try:
            return FiniteKernel(dom, pdoms, rows)
        except (ValueError, CausalValidityError) as exc:
            raise _err(f"{where}: {exc}", rows_node) from None
    raise _err(f"{where}: finite kernels are 'point', 'constant' or 'rows'", spec, form)


def _compile_cbn(s, ident, spec):
    _mapping(spec, f"cbn {ident}", ("nodes", "edges", "kernels", "from_scm"))
    if "from_scm" in spec:
        if set(spec) != {"from_scm"}:
            raise _err(f"cbn {ident}: from_scm excludes other keys", spec)
        return scm_to_cbn(_id(spec, "from_scm", s.scms, "scm"))
    _mapping(spec, f"cbn {ident}", ("nodes", "edges", "kernels"), ("nodes", "kernels"))
    nodes = list(_list(spec["nodes"], "nodes"))
    kinds = {_var(s, v, spec, "nodes")[0] for v in nodes}
    if len(kinds) != 1:
        raise _err(f"cbn {ident} mixes finite and gaussian nodes", spec, "nodes")
    edges = []
    for e in _list(spec.get("edges", []), "edges"):
        if not isinstance(e, list) or len(e) != 2 or any(x not in nodes for x in e):
            raise _err(f"cbn {ident}: bad edge {e!r}", spec, "edges")
        edges.append(tuple(e))
    kn = _mapping(spec["kernels"], f"cbn {ident} kernels", nodes, nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    parents = {v: sorted((a for a, b in edges if b == v), key=idx.get) for v in nodes}
    kernels = {
        v: _compile_kernel(s, v, parents[v], kn[v], f"kernel of {v} in cbn {ident}") for v in nodes
    }
    try:
        return Cbn.from_edges(nodes, edges, kernels)
    except ValueError as exc:
        raise _err(f"cbn {ident}: {exc}", spec) from None


def _compile_intervention(s, ident, spec):
    _mapping(spec, f"intervention {ident}", ("cbn", "targets", "scm", "values"))
    if "scm" in spec:
        _mapping(spec, f"intervention {ident}", ("scm", "values"), ("scm", "values"))
        m = _id(spec, "scm", s.scms, "scm")
        values = _mapping(spec["values"], f"intervention {ident}", m.endogenous)
        return HardIntervention({k: int(v) for k, v in values.items()})
    _mapping(spec, f"intervention {ident}", ("cbn", "targets"), ("cbn", "targets"))
    c = _id(spec, "cbn", s.cbns, "cbn")
    tg = _mapping(spec["targets"], f"intervention {ident}", c.vars)
    if not tg:
        raise _err(f"intervention {ident} has no targets", spec, "targets")
    targets = {
        v: _compile_kernel(s, v, c.parents_of(v), k, f"target {v} of intervention {ident}")
        for v, k in tg.items()
    }
    try:
        return c.intervention(targets, ident)
    except CausalValidityError as exc:
        raise _err(f"intervention {ident}: {exc}", spec) from None


def _compile_scm(s, ident, spec):
    _mapping(spec, f"scm {ident}", ("exogenous", "endogenous", "mechanisms", "exogenous_law"),
             ("exogenous", "endogenous", "mechanisms"))
    exo = {u: tuple(int(x) for x in dom) for u, dom in spec["exogenous"].items()}
    endo = {}
    for v in _list(spec["endogenous"], "endogenous"):
        kind, dom = _var(s, v, spec, "endogenous")
        if kind != "finite":
            raise _err(f"scm {ident}: endogenous {v} must be finite", spec, "endogenous")
        endo[v] = dom
    mechs = {}
    for v, m in _mapping(spec["mechanisms"], f"scm {ident} mechanisms", endo.keys(), endo.keys()).items():
        _mapping(m, f"mechanism {v}", ("exogenous", "parents", "table"), ("table",))
        ex = tuple(m.get("exogenous", []))
        pa = tuple(m.get("parents", []))
        n = len(ex) + len(pa)
        table = {_assignment(k, n, f"mechanism {v}", m["table"]) if n else (): int(x)
                 for k, x in m["table"].items()}
        mechs[v] = Mechanism(ex, pa, table)
    law = None
    if "exogenous_law" in spec:
        law = _finite_table(list(exo), list(exo.values()), spec["exogenous_law"], f"scm {ident}")
    return FiniteScm(exo, endo, mechs, law)


# -- laws, representations, processes --------------------------------------


def _finite_table(vars, domains, node, where):
    node = _mapping(node, where, node.keys() if isinstance(node, dict) else ())
    table = {_assignment(k, len(vars), where, node): _rational(p, where, node) for k, p in node.items()}
    try:
        return FiniteDist(vars, domains, table)
    except (ValueError, CausalValidityError) as exc:
        raise _err(f"{where}: {exc}", node) from None


def _compile_law(s, spec, vars, where):
    _mapping(spec, where, ("table", "gaussian", "cbn", "intervention", "scm"))
    if "table" in spec:
        doms = [_var(s, v, spec)[1] for v in vars]
        return _finite_table(vars, doms, spec["table"], where)
    if "gaussian" in spec:
        g = _mapping(spec["gaussian"], where, ("mean", "cov"), ("mean", "cov"))
        mean = [_real(x, where, g) for x in g["mean"]]
        cov = [[_real(x, where, g) for x in row] for row in g["cov"]]
        try:
            return GaussianDist(vars, mean, cov)
        except ValueError as exc:
            raise _err(f"{where}: {exc}", g) from None
    if "scm" in spec:
        c = scm_to_cbn(_id(spec, "scm", s.scms, "scm"))
        law = observational_dist(c)
        if "intervention" in spec:
            d = _id(spec, "intervention", s.interventions, "intervention")
            if not isinstance(d, HardIntervention):
                raise _err(f"{where}: an scm law needs a hard intervention", spec, "intervention")
            law = interventional_dist(c, hard_to_intervention(c, d))
        if set(law.vars) != set(vars):
            raise _err(f"{where}: scm variables {law.vars} differ from {vars}", spec)
        return marginal(law, vars)
    if "cbn" in spec:
        c = _id(spec, "cbn", s.cbns, "cbn")
        if "intervention" in spec:
            law = interventional_dist(c, _id(spec, "intervention", s.interventions, "intervention"))
        else:
            law = observational_dist(c)
        if set(law.vars) != set(vars):
            raise _err(f"{where}: cbn variables {law.vars} differ from {vars}", spec)
        return marginal(law, vars)
    raise _err(f"{where}: a law needs table, gaussian, cbn or scm", spec)


def _compile_representation(s, spec, vars, where):
    if spec == "identity" or spec is None:
        return IdentityMap(vars)
    _mapping(spec, where, ("affine", "table", "map"))
    if len(spec) != 1:
        raise _err(f"{where}: exactly one representation kind expected", spec)
    if "map" in spec:
        return _id(spec, "map", s.tau_maps, "tau map")
    if "affine" in spec:
        a = _mapping(spec["affine"], where, ("inputs", "outputs", "matrix", "offset"), ("outputs", "matrix"))
        inputs = a.get("inputs", vars)
        exact = all(s.variables[v][0] == "finite" for v in inputs)
        num = _rational if exact else _real
        matrix = [[num(x, where, a) for x in row] for row in a["matrix"]]
        offset = [num(x, where, a) for x in a.get("offset", [0] * len(a["outputs"]))]
        try:
            return AffineMap(inputs, a["outputs"], matrix, offset)
        except CausalValidityError as exc:
            raise _err(f"{where}: {exc}", a) from None
    t = _mapping(spec["table"], where, ("inputs", "outputs", "entries"), ("outputs", "entries"))
    inputs = t.get("inputs", vars)
    entries = t["entries"]
    table = {
        _assignment(k, len(inputs), where, entries): tuple(v) if isinstance(v, list) else (v,)
        for k, v in entries.items()
    }
    return TableMap(inputs, t["outputs"], table)


def _compile_complexity(s, spec, where):
    _mapping(spec, where, ("table", "reverse-entropy", "expected-cost", "affine-expectation"))
    if len(spec) != 1:
        raise _err(f"{where}: exactly one complexity kind expected", spec)
    if "table" in spec:
        return {a: _real(v, where, spec["table"]) for a, v in spec["table"].items()}
    if "reverse-entropy" in spec:
        return ReverseEntropy(spec["reverse-entropy"])
    if "expected-cost" in spec:
        e = _mapping(spec["expected-cost"], where, ("var", "costs"), ("var", "costs"))
        return ExpectedCost(e["var"], {int(k): _rational(v, where, e) for k, v in e["costs"].items()})
    e = _mapping(spec["affine-expectation"], where, ("coeffs", "constant"), ("coeffs",))
    return AffineExpectation(
        {k: _real(v, where, e) for k, v in e["coeffs"].items()}, _real(e.get("constant", 0), where, e)
    )


def _compile_dgp(s, ident, spec):
    where = f"dgp {ident}"
    _mapping(spec, where, ("variables", "observational", "actions", "representation", "complexity"),
             ("variables", "actions"))
    vars = list(_list(spec["variables"], "variables"))
    for v in vars:
        _var(s, v, spec, "variables")
    obs = spec.get("observational", "O")
    laws = {}
    for a in _list(spec["actions"], "actions"):
        _mapping(a, "action", ("id", "law", "description"), ("id", "law"))
        if a["id"] in laws:
            raise _err(f"duplicate action id {a['id']!r}", a, "id")
        laws[a["id"]] = _compile_law(s, a["law"], vars, f"law of action {a['id']}")
    if obs not in laws:
        raise _err(f"{where}: observational action {obs!r} missing", spec)
    complexity = _compile_complexity(s, spec["complexity"], where) if "complexity" in spec else None
    rep = _compile_representation(s, spec.get("representation"), vars, f"{where} representation")
    try:
        dgp = Dgp(laws, obs, complexity)
    except CausalValidityError as exc:
        raise _err(f"{where}: {exc}", spec) from None
    return DgpEntry(dgp, rep)


def _compile_interpretation(s, ident, spec):
    where = f"interpretation {ident}"
    _mapping(spec, where, ("kind", "set", "ranks", "complexity"), ("kind",))
    kind = spec["kind"]
    simple = {"C": IntC, "P": IntP, "S": IntS, "M": IntM, "S-tilde": IntSTilde}
    if kind in simple:
        _mapping(spec, where, ("kind",))
        return simple[kind]()
    if kind == "tilde_if":
        _mapping(spec, where, ("kind", "set", "ranks"), ("kind", "set", "ranks"))
        members = []
        for m in _list(spec["set"], "set"):
            if m not in s.interventions:
                raise _err(f"unknown intervention id {m!r}", spec, "set")
            members.append(s.interventions[m])
        try:
            return IntTildeIF(members, [int(r) for r in spec["ranks"]])
        except ValueError as exc:
            raise _err(f"{where}: {exc}", spec) from None
    if kind == "K":
        _mapping(spec, where, ("kind", "complexity"))
        comp = _compile_complexity(s, spec["complexity"], where) if "complexity" in spec else None
        return IntK(comp)
    raise _err(f"{where}: unknown kind {kind!r}", spec, "kind")


# -- expectations -------------------------------------------------------------

EXPECTATION_KEYS = {
    "verdict": ("dgp", "cbn", "interpretation", "interventions", "witness"),
    "membership": ("dgp", "cbn", "interpretation", "interventions", "action", "intervention", "reason"),
    "expectation": ("law", "functional", "constant"),
    "probability": ("law", "event"),
    "law": ("law",),
    "desideratum": ("dgp", "cbn", "interpretation", "family", "which"),
    "classification": ("cbn", "intervention"),
    "compatible": ("dgp", "cbn"),
    "markov": ("law", "cbn"),
    "cross_covariance": ("law", "x", "y", "given"),
    "link": ("dgp", "order", "action"),
    "falsifier": ("dgp", "cbn", "interpretation", "construction", "from", "node"),
    "pheno": ("dgp", "cbn"),
    "tau_abstraction": ("low", "high", "tau", "interventions", "exogenous_map"),
    "omega": ("tau", "low", "high", "intervention"),
}
COMMON_KEYS = ("kind", "expected", "provenance", "note")


def _validate_expectation(s, e):
    _mapping(e, "expectation", tuple(COMMON_KEYS) + tuple(k for ks in EXPECTATION_KEYS.values() for k in ks),
             ("kind", "expected", "provenance"))
    kind = e["kind"]
    if kind not in EXPECTATION_KEYS:
        raise _err(f"unknown expectation kind {kind!r}", e, "kind")
    _mapping(e, f"{kind} expectation", COMMON_KEYS + EXPECTATION_KEYS[kind])
    if e["provenance"] not in PROVENANCES:
        raise _err(f"provenance must be one of {PROVENANCES}", e, "provenance")
    tables = {
        "cbn": s.cbns, "interpretation": s.interpretations, "interventions": s.intervention_sets,
        "intervention": s.interventions, "dgp": s.dgps, "tau": s.tau_maps, "low": s.scms, "high": s.scms,
    }
    if kind == "omega":
        tables["intervention"] = s.interventions
    for key, table in tables.items():
        if key in e and e[key] not in table:
            raise _err(f"unknown {key} id {e[key]!r}", e, key)
    if "law" in e:
        _mapping(e["law"], "law reference", ("dgp", "action", "represented", "cbn", "intervention"))
    if "family" in e:
        for m in e["family"]:
            if m not in s.intervention_sets:
                raise _err(f"unknown intervention set id {m!r}", e, "family")
