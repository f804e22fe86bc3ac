"""Model-spec documents: JSON parsing, validation and canonical output.

A document looks like::

    {
      "schema_version": 1,
      "name": "edge-ergm",
      "family": {"kind": "undirected-graph"},
      "statistic": [{"type": "edges"}],
      "theta": [0.5],
      "experiment": {"sub": 3, "super": 5}
    }

Validation runs the whole JSON Schema and a semantic pass, and reports
every violation at once.
"""

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ProjcheckError, SchemaError, UnknownStatistic
from .statespace import KINDS, SiteSpaceFamily
from .statistics import (
    CovariateTable,
    DyadicTerm,
    EdgeCount,
    IsingNearestNeighbor,
    KStarCount,
    LookupTable,
    StatisticSpec,
    TriangleCount,
    _fraction,
)

SCHEMA_VERSION = 1
STATISTIC_TYPES = ("edges", "triangles", "kstar", "ising", "dyadic", "lookup")

_scale = {
    "anyOf": [
        {"type": "number", "exclusiveMinimum": 0},
        {"type": "string", "pattern": r"^\s*[0-9]+(\s*/\s*[0-9]+)?\s*$"},
    ]
}
_symbol = {"type": ["string", "integer"]}

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "family", "statistic"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "family": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(KINDS)},
                "alphabets": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1, "items": _symbol},
                },
            },
        },
        "statistic": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["type"],
                "properties": {
                    "type": {"type": "string"},
                    "scale": _scale,
                    "label": {"type": "string"},
                    "k": {"type": "integer", "minimum": 1},
                    "entries": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["state", "value"],
                            "properties": {
                                "state": {"type": "integer", "minimum": 0, "maximum": 3},
                                "types": {"type": "array", "minItems": 2, "maxItems": 2,
                                          "items": _symbol},
                                "value": {"type": "integer"},
                            },
                        },
                    },
                    "tables": {
                        "type": "object",
                        "propertyNames": {"pattern": "^[1-9][0-9]*$"},
                        "additionalProperties": {
                            "type": "object",
                            "additionalProperties": {"type": "integer"},
                        },
                    },
                },
            },
        },
        "theta": {"type": "array", "items": {"type": "number"}},
        "covariates": {"type": "array", "items": _symbol},
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sub": {"type": "integer", "minimum": 1},
                "super": {"type": "integer", "minimum": 1},
                "size": {"type": "integer", "minimum": 1},
                "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "theta_grid": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                },
                "observed": {"type": "array", "items": {"type": "integer"}},
                "t": {"type": "array", "items": {"type": "number"}},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "replicates": {"type": "integer", "minimum": 1},
                "samples": {"type": "integer", "minimum": 1},
                "burn_in": {"type": "integer", "minimum": 0},
                "thinning": {"type": "integer", "minimum": 1},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "variant": {"enum": ["fresh", "projection"]},
            },
        },
    },
}

# keys allowed per statistic type besides "type"
_ALLOWED = {
    "edges": {"scale", "label"},
    "triangles": {"scale", "label"},
    "kstar": {"scale", "label", "k"},
    "ising": {"scale", "label"},
    "dyadic": {"scale", "label", "entries"},
    "lookup": {"scale", "label", "tables"},
}
_REQUIRED = {"kstar": {"k"}, "dyadic": {"entries"}, "lookup": {"tables"}}


@dataclass
class ModelSpec:
    family: SiteSpaceFamily
    stat: StatisticSpec
    theta: tuple
    covariates: CovariateTable = None
    experiment: dict = field(default_factory=dict)
    name: str = ""
    description: str = ""

    def to_json(self):
        """Canonical document; parsing it gives back an equal spec."""
        fam = {"kind": self.family.kind}
        if self.family.kind == "explicit-product":
            fam["alphabets"] = [list(a) for a in self.family.alphabets]
        comps = []
        for c in self.stat.components:
            comps.append(c.to_json_with(self.family) if isinstance(c, LookupTable) else c.to_json())
        doc = {"schema_version": SCHEMA_VERSION}
        if self.name:
            doc["name"] = self.name
        if self.description:
            doc["description"] = self.description
        doc["family"] = fam
        doc["statistic"] = comps
        doc["theta"] = [float(v) for v in self.theta]
        if self.covariates is not None:
            doc["covariates"] = list(self.covariates.values)
        if self.experiment:
            doc["experiment"] = dict(sorted(self.experiment.items()))
        return doc

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"


def _path(err):
    return "/".join(str(p) for p in err.absolute_path)


def _schema_violations(doc):
    v = jsonschema.Draft202012Validator(MODEL_SCHEMA)
    return sorted(((_path(e), e.message) for e in v.iter_errors(doc)), key=lambda t: t)


def _component_key_errors(i, comp):
    kind = comp["type"]
    where = f"statistic/{i}"
    out = []
    for key in sorted(set(comp) - {"type"} - _ALLOWED[kind]):
        out.append((where, f"key {key!r} is not valid for statistic type {kind!r}"))
    for key in sorted(_REQUIRED.get(kind, set()) - set(comp)):
        out.append((where, f"statistic type {kind!r} requires {key!r}"))
    return out


def _build_component(i, comp, family, errors):
    kind = comp["type"]
    where = f"statistic/{i}"
    label = comp.get("label")
    try:
        scale = _fraction(comp.get("scale", 1))
        if kind == "edges":
            c = EdgeCount(scale=scale)
        elif kind == "triangles":
            c = TriangleCount(scale=scale)
        elif kind == "kstar":
            c = KStarCount(k=comp["k"], scale=scale)
        elif kind == "ising":
            c = IsingNearestNeighbor(scale=scale)
        elif kind == "dyadic":
            entries = [(e["state"], e.get("types"), e["value"]) for e in comp["entries"]]
            c = DyadicTerm(entries=entries, label=label or "dyadic", scale=scale)
        else:
            c = _lookup_from_json(family, comp, label or "lookup", scale)
        c.check_family(family)
        return c
    except (ProjcheckError, ValueError, ZeroDivisionError) as exc:
        errors.append((where, str(exc)))
        return None


def _lookup_from_json(family, comp, label, scale):
    tables = {}
    for n_str, mapping in comp["tables"].items():
        n = int(n_str)
        S = family.site_count(n)
        # JSON keys are strings: match against the string form of each symbol
        names = [{str(s): s for s in family.site_symbols(k)} for k in range(S)]
        entries = {}
        for key, value in mapping.items():
            parts = key.split(",") if S else []
            if len(parts) != S:
                raise ValueError(f"lookup key {key!r} at size {n} needs {S} symbols")
            try:
                symbols = tuple(names[k][p.strip()] for k, p in enumerate(parts))
            except KeyError as exc:
                raise ValueError(f"lookup key {key!r}: unknown symbol {exc.args[0]!r}") from None
            entries[symbols] = value
        tables[n] = entries
    return LookupTable.from_symbols(family, tables, label=label, scale=scale)


def spec_from_json(doc):
    """Validate a decoded document and build a :class:`ModelSpec`."""
    if isinstance(doc, dict) and isinstance(doc.get("statistic"), list):
        unknown = sorted({
            c["type"] for c in doc["statistic"]
            if isinstance(c, dict) and isinstance(c.get("type"), str)
            and c["type"] not in STATISTIC_TYPES
        })
        if unknown:
            raise UnknownStatistic(
                f"unknown statistic type(s) {', '.join(unknown)}; "
                f"known: {', '.join(STATISTIC_TYPES)}"
            )
    errors = _schema_violations(doc)
    if isinstance(doc, dict) and isinstance(doc.get("statistic"), list):
        for i, comp in enumerate(doc["statistic"]):
            if isinstance(comp, dict) and comp.get("type") in _ALLOWED:
                errors.extend(_component_key_errors(i, comp))
    if errors:
        raise SchemaError(errors)

    fam = doc["family"]
    try:
        family = SiteSpaceFamily(fam["kind"], tuple(tuple(a) for a in fam.get("alphabets", ())))
    except ValueError as exc:
        raise SchemaError([("family", str(exc))]) from None
    comps = [_build_component(i, c, family, errors) for i, c in enumerate(doc["statistic"])]
    stat = None if None in comps else StatisticSpec(tuple(comps))

    theta = tuple(float(v) for v in doc.get("theta", [0.0] * len(comps)))
    if len(theta) != len(comps):
        errors.append(("theta", f"has {len(theta)} entries, statistic has {len(comps)}"))
    cov = CovariateTable(tuple(doc["covariates"])) if "covariates" in doc else None
    if stat is not None and stat.needs_covariates and cov is None:
        errors.append(("covariates", "statistic needs node covariates"))

    exp = dict(doc.get("experiment", {}))
    if "sub" in exp and "super" in exp and exp["sub"] > exp["super"]:
        errors.append(("experiment", "sub must not exceed super"))
    for i, pt in enumerate(exp.get("theta_grid", [])):
        if len(pt) != len(comps):
            errors.append((f"experiment/theta_grid/{i}", f"point has {len(pt)} components"))
    if "observed" in exp and len(exp["observed"]) != len(comps):
        errors.append(("experiment/observed", "length differs from statistic dimension"))
    if errors:
        raise SchemaError(errors)
    return ModelSpec(family, stat, theta, cov, exp, doc.get("name", ""),
                     doc.get("description", ""))


def parse_model_spec(data):
    """Parse UTF-8 JSON bytes (or str) into a validated :class:`ModelSpec`."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError([("", f"not UTF-8: {exc}")]) from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError([("", f"invalid JSON: {exc}")]) from None
    return spec_from_json(doc)


def bundled_fixtures():
    """Names of the specs shipped with the package."""
    root = resources.files("projcheck") / "fixtures"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def resolve_spec_path(name):
    """A filesystem path, or the name of a bundled fixture."""
    p = Path(name)
    if p.is_file():
        return p
    root = resources.files("projcheck") / "fixtures"
    for cand in (name, f"{name}.json"):
        q = root / Path(cand).name
        if q.is_file():
            return Path(str(q))
    raise FileNotFoundError(f"no spec file or bundled fixture named {name!r}")


def load_spec(name):
    """(ModelSpec, sha256 hex digest of the file bytes)."""
    raw = resolve_spec_path(name).read_bytes()
    return parse_model_spec(raw), hashlib.sha256(raw).hexdigest()
