"""JSON documents (domains, specs, solve problems, reports, traces) and CSV traces.

Every document carries a top-level ``"kind"`` and is checked against a JSON
schema before use; unknown fields are rejected.  Complex numbers are written
as ``[re, im]`` pairs and floats with ``repr`` so that values survive a
write/read cycle bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .circle import Arc
from .domain import DiscBaseDomain, HalfPlaneProduct, StaircaseDomain, StripDomain, TubeDomain
from .geodesic import (
    DiscBaseSpec,
    HalfPlaneAtomSpec,
    MeasureSpec,
    StaircaseISpec,
    StaircaseIISpec,
    StripSpec,
)
from .hfun import QuadCertificate
from .measure import CircleMeasure
from .solver import SolveOptions, SolveProblem
from .verify import VerificationReport


class DocumentError(ValueError):
    """A document is malformed or does not match its schema."""


# --- schemas ------------------------------------------------------------------------

_NUM = {"type": "number"}
_CPLX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_POINT2 = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required: list) -> dict:
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


_MEASURE = _obj({
    "n": {"type": "integer", "minimum": 1},
    "pieces": {"type": "array", "items": _obj({
        "start": _NUM, "length": {"type": "number", "minimum": 0},
        "density": {"type": "array", "items": _NUM}}, ["start", "length", "density"])},
    "atoms": {"type": "array", "items": _obj({
        "angle": _NUM, "mass": {"type": "array", "items": _NUM}}, ["angle", "mass"])},
}, ["n"])

_CERT = _obj({"a": {"type": "array", "items": _CPLX, "minItems": 1},
              "b": {"type": "array", "items": _NUM, "minItems": 1}}, ["a", "b"])

_DOMAIN = {"oneOf": [
    _obj({"kind": {"const": "domain"}, "type": {"const": "halfplane_product"},
          "n": {"type": "integer", "minimum": 1}}, ["kind", "type", "n"]),
    _obj({"kind": {"const": "domain"}, "type": {"const": "strip"}}, ["kind", "type"]),
    _obj({"kind": {"const": "domain"}, "type": {"const": "disc_base"}}, ["kind", "type"]),
    _obj({"kind": {"const": "domain"}, "type": {"const": "staircase"},
          "v": {"type": "array", "items": _POINT2}, "p": {"type": "array", "items": _POINT2}},
         ["kind", "type", "v", "p"]),
]}

_FLOATS = {"type": "array", "items": _NUM}

_SPEC = {"oneOf": [
    _obj({"kind": {"const": "geodesic_spec"}, "type": {"const": "halfplane_atom"},
          "n": {"type": "integer", "minimum": 1}, "atom_coordinate": {"type": "integer", "minimum": 1},
          "alpha": _NUM, "atom_angle": _NUM, "beta": _NUM,
          "free": {"type": "array", "items": _obj({"measure": _MEASURE, "offset": _NUM},
                                                  ["measure", "offset"])}},
         ["kind", "type", "n", "atom_coordinate", "alpha", "atom_angle", "beta"]),
    _obj({"kind": {"const": "geodesic_spec"}, "type": {"const": "strip"},
          "a": _CPLX, "b": _NUM, "offset": _NUM}, ["kind", "type", "a", "b"]),
    _obj({"kind": {"const": "geodesic_spec"}, "type": {"const": "staircase_ii"},
          "h": _CERT, "alpha": _FLOATS, "atom_angles": _FLOATS, "beta": _FLOATS},
         ["kind", "type", "h", "alpha", "atom_angles", "beta"]),
    _obj({"kind": {"const": "geodesic_spec"}, "type": {"const": "staircase_i"},
          "facet": {"type": "integer", "minimum": 1}, "alpha": _NUM, "atom_angle": _NUM, "beta": _NUM,
          "transverse": {"type": "array", "items": _CPLX, "minItems": 1},
          "transverse_c": _CPLX, "transverse_theta": _NUM},
         ["kind", "type", "facet", "alpha", "atom_angle", "beta"]),
    _obj({"kind": {"const": "geodesic_spec"}, "type": {"const": "disc_base"},
          "a": {"type": "array", "items": _CPLX}, "b": _FLOATS, "offset": _FLOATS},
         ["kind", "type", "a", "b"]),
    _obj({"kind": {"const": "geodesic_spec"}, "type": {"const": "measure"},
          "measure": _MEASURE, "offset": _FLOATS, "certificate": _CERT},
         ["kind", "type", "measure", "offset"]),
]}

_OPTIONS = _obj({
    "cases": {"type": "array", "items": {"enum": ["atoms_both", "atom_1", "atom_2", "atoms_none", "facets"]}},
    "multistart": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
    "fit_tol": {"type": "number", "exclusiveMinimum": 0},
    "verify_tol": {"type": "number", "exclusiveMinimum": 0},
    "verify_points": {"type": "integer", "minimum": 1},
    "max_nfev": {"type": "integer", "minimum": 1},
    "exhaustive": {"type": "boolean"},
}, [])

_PROBLEM = _obj({"kind": {"const": "solve_problem"}, "domain": _DOMAIN,
                 "z": {"type": "array", "items": _CPLX, "minItems": 1},
                 "w": {"type": "array", "items": _CPLX, "minItems": 1},
                 "options": _OPTIONS}, ["kind", "domain", "z", "w"])

_CONDITION = _obj({"name": {"type": "string"}, "status": {"enum": ["pass", "fail", "inconclusive"]},
                   "value": {"type": ["number", "null"]}, "tolerance": {"type": ["number", "null"]},
                   "witness": {"type": ["object", "null"]}, "notes": {"type": "string"}},
                  ["name", "status"])

_REPORT = _obj({"kind": {"const": "report"}, "status": {"enum": ["pass", "fail", "inconclusive"]},
                "conditions": {"type": "array", "items": _CONDITION}, "metadata": {"type": "object"}},
               ["kind", "status", "conditions"])

_TRACE = _obj({"kind": {"const": "trace"}, "radius": _NUM,
               "t": _FLOATS,
               "values": {"type": "array", "items": {"type": "array", "items": _CPLX}},
               "boundary": {"type": "array", "items": _POINT2}},
              ["kind", "radius", "t", "values"])

SCHEMAS = {"domain": _DOMAIN, "geodesic_spec": _SPEC, "solve_problem": _PROBLEM,
           "report": _REPORT, "trace": _TRACE}


# --- low-level helpers ------------------------------------------------------------

def _cplx(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _from_cplx(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def _floats(xs) -> list:
    return [float(x) for x in np.atleast_1d(xs)]


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and tuples into JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _cplx(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(jsonable(doc), indent=1, allow_nan=False) + "\n"


def loads(text: str, kind: Optional[str] = None) -> dict:
    """Parse and schema-check a document; ``kind`` pins the expected kind."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DocumentError("document must be an object with a 'kind' field")
    if kind is not None and doc["kind"] != kind:
        raise DocumentError(f"expected a {kind!r} document, got {doc['kind']!r}")
    schema = SCHEMAS.get(doc["kind"])
    if schema is None:
        raise DocumentError(f"unknown document kind {doc['kind']!r}")
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DocumentError(f"{doc['kind']} document invalid at {where}: {exc.message}") from exc
    return doc


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


# --- measures and certificates ------------------------------------------------------

def measure_to_dict(mu: CircleMeasure) -> dict:
    return {"n": mu.n,
            "pieces": [{"start": arc.start, "length": arc.length, "density": _floats(w)} for arc, w in mu.pieces],
            "atoms": [{"angle": t, "mass": _floats(m)} for t, m in mu.atoms]}


def measure_from_dict(d: dict) -> CircleMeasure:
    n = d["n"]
    for item in d.get("pieces", []):
        if len(item["density"]) != n:
            raise DocumentError("piece density has the wrong length")
    for item in d.get("atoms", []):
        if len(item["mass"]) != n:
            raise DocumentError("atom mass has the wrong length")
    return CircleMeasure(n,
                         tuple((Arc(p["start"], p["length"]), p["density"]) for p in d.get("pieces", [])),
                         tuple((a["angle"], a["mass"]) for a in d.get("atoms", [])))


def certificate_to_dict(h: QuadCertificate) -> dict:
    return {"a": [_cplx(x) for x in h.a], "b": _floats(h.b)}


def certificate_from_dict(d: dict) -> QuadCertificate:
    return QuadCertificate([_from_cplx(x) for x in d["a"]], d["b"])


# --- domains ------------------------------------------------------------------------

def domain_to_doc(domain: TubeDomain) -> dict:
    if isinstance(domain, HalfPlaneProduct):
        return {"kind": "domain", "type": "halfplane_product", "n": domain.n}
    if isinstance(domain, StripDomain):
        return {"kind": "domain", "type": "strip"}
    if isinstance(domain, DiscBaseDomain):
        return {"kind": "domain", "type": "disc_base"}
    if isinstance(domain, StaircaseDomain):
        return {"kind": "domain", "type": "staircase", "v": domain.v.tolist(), "p": domain.p.tolist()}
    raise TypeError(f"cannot serialize {type(domain).__name__}")


def domain_from_doc(doc: dict) -> TubeDomain:
    """Build a domain; staircase data is shape-checked here but its structural
    rules are left to ``validate`` so that they can be reported in full."""
    t = doc["type"]
    if t == "halfplane_product":
        return HalfPlaneProduct(doc["n"])
    if t == "strip":
        return StripDomain()
    if t == "disc_base":
        return DiscBaseDomain()
    return StaircaseDomain(doc["v"], doc["p"])


# --- specs --------------------------------------------------------------------------

def spec_to_doc(spec) -> dict:
    head = {"kind": "geodesic_spec", "type": spec.kind}
    if isinstance(spec, HalfPlaneAtomSpec):
        return {**head, "n": spec.n, "atom_coordinate": spec.j0 + 1, "alpha": spec.alpha,
                "atom_angle": spec.atom_angle, "beta": spec.beta,
                "free": [{"measure": measure_to_dict(mu), "offset": off} for mu, off in spec.free]}
    if isinstance(spec, StripSpec):
        return {**head, "a": _cplx(spec.a), "b": float(spec.b), "offset": float(spec.offset)}
    if isinstance(spec, StaircaseIISpec):
        return {**head, "h": certificate_to_dict(spec.h), "alpha": list(spec.alpha),
                "atom_angles": list(spec.atom_angles), "beta": list(spec.beta)}
    if isinstance(spec, StaircaseISpec):
        return {**head, "facet": spec.facet, "alpha": spec.alpha, "atom_angle": spec.atom_angle,
                "beta": spec.beta, "transverse": [_cplx(x) for x in spec.transverse],
                "transverse_c": _cplx(spec.transverse_c), "transverse_theta": float(spec.transverse_theta)}
    if isinstance(spec, DiscBaseSpec):
        return {**head, "a": [_cplx(x) for x in spec.a], "b": list(spec.b), "offset": list(spec.offset)}
    if isinstance(spec, MeasureSpec):
        out = {**head, "measure": measure_to_dict(spec.measure), "offset": list(spec.offset)}
        if spec.certificate is not None:
            out["certificate"] = certificate_to_dict(spec.certificate)
        return out
    raise TypeError(f"cannot serialize {type(spec).__name__}")


def spec_from_doc(doc: dict):
    t = doc["type"]
    try:
        if t == "halfplane_atom":
            free = tuple((measure_from_dict(f["measure"]), f["offset"]) for f in doc.get("free", []))
            if len(free) != doc["n"] - 1 or any(mu.n != 1 for mu, _ in free):
                raise DocumentError("halfplane_atom needs n - 1 one-dimensional free components")
            if not 1 <= doc["atom_coordinate"] <= doc["n"]:
                raise DocumentError("atom_coordinate out of range")
            return HalfPlaneAtomSpec(doc["n"], doc["atom_coordinate"] - 1, doc["alpha"], doc["atom_angle"],
                                     doc["beta"], free)
        if t == "strip":
            return StripSpec(_from_cplx(doc["a"]), doc["b"], doc.get("offset", 0.0))
        if t == "staircase_ii":
            return StaircaseIISpec(certificate_from_dict(doc["h"]), doc["alpha"], doc["atom_angles"], doc["beta"])
        if t == "staircase_i":
            return StaircaseISpec(doc["facet"], doc["alpha"], doc["atom_angle"], doc["beta"],
                                  tuple(_from_cplx(x) for x in doc.get("transverse", [[0.0, 0.0]])),
                                  _from_cplx(doc.get("transverse_c", [0.0, 0.0])),
                                  doc.get("transverse_theta", 0.0))
        if t == "disc_base":
            return DiscBaseSpec([_from_cplx(x) for x in doc["a"]], doc["b"], doc.get("offset", [0.0, 0.0]))
        cert = doc.get("certificate")
        return MeasureSpec(measure_from_dict(doc["measure"]), doc["offset"],
                           certificate_from_dict(cert) if cert is not None else None)
    except DocumentError:
        raise
    except (ValueError, TypeError) as exc:
        raise DocumentError(f"{t} spec invalid: {exc}") from exc


# --- problems and reports ---------------------------------------------------------

def problem_to_doc(problem: SolveProblem) -> dict:
    o = problem.options
    return {"kind": "solve_problem", "domain": domain_to_doc(problem.domain),
            "z": [_cplx(x) for x in problem.z], "w": [_cplx(x) for x in problem.w],
            "options": {"cases": list(o.cases), "multistart": o.multistart, "seed": o.seed,
                        "fit_tol": o.fit_tol, "verify_tol": o.verify_tol,
                        "verify_points": o.verify_points, "max_nfev": o.max_nfev,
                        "exhaustive": o.exhaustive}}


def problem_from_doc(doc: dict) -> SolveProblem:
    opts = dict(doc.get("options", {}))
    if "cases" in opts:
        opts["cases"] = tuple(opts["cases"])
    return SolveProblem(domain_from_doc(doc["domain"]), [_from_cplx(x) for x in doc["z"]],
                        [_from_cplx(x) for x in doc["w"]], SolveOptions(**opts))


def report_to_doc(report: VerificationReport) -> dict:
    return jsonable({"kind": "report", **report.to_dict()})


def report_from_doc(doc: dict) -> VerificationReport:
    return VerificationReport.from_dict(doc)


# --- traces -------------------------------------------------------------------------

@dataclass
class Trace:
    """Samples ``phi(r e^{it})`` with an optional base-boundary polyline."""

    radius: float
    t: np.ndarray
    values: np.ndarray
    boundary: Optional[np.ndarray] = None

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        same_b = (self.boundary is None and other.boundary is None) or (
            self.boundary is not None and other.boundary is not None
            and np.array_equal(self.boundary, other.boundary))
        return (self.radius == other.radius and np.array_equal(self.t, other.t)
                and np.array_equal(self.values, other.values) and same_b)


def sample_trace(phi, radius: float, samples: int, boundary=None) -> Trace:
    if samples < 1:
        raise ValueError("need at least one sample")
    if not 0.0 <= radius < 1.0:
        raise ValueError("radius must lie in [0, 1)")
    if radius == 0.0:
        t = np.zeros(1)
    else:
        t = np.arange(samples) * (2.0 * np.pi / samples)
    vals = np.asarray(phi(radius * np.exp(1j * t)), dtype=complex).reshape(len(t), -1)
    return Trace(float(radius), t, vals, None if boundary is None else np.asarray(boundary, dtype=float))


def trace_header(n: int) -> list[str]:
    cols = ["t"]
    for l in range(1, n + 1):
        cols += [f"re_phi{l}", f"im_phi{l}"]
    return cols


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = trace.values.shape[1]
    w.writerow(trace_header(n))
    for t, row in zip(trace.t, trace.values):
        out = ["%.17g" % t]
        for z in row:
            out += ["%.17g" % z.real, "%.17g" % z.imag]
        w.writerow(out)
    return buf.getvalue()


def trace_from_csv(text: str, radius: float = float("nan")) -> Trace:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DocumentError("empty trace file")
    head = rows[0]
    n = (len(head) - 1) // 2
    if head != trace_header(n):
        raise DocumentError(f"unexpected trace header {head}")
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, 2 * n + 1)
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return Trace(radius, data[:, 0], vals)


def boundary_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2"])
    for x in np.asarray(points, dtype=float):
        w.writerow(["%.17g" % x[0], "%.17g" % x[1]])
    return buf.getvalue()


def trace_to_doc(trace: Trace) -> dict:
    out = {"kind": "trace", "radius": trace.radius, "t": trace.t.tolist(),
           "values": [[_cplx(z) for z in row] for row in trace.values]}
    if trace.boundary is not None:
        out["boundary"] = trace.boundary.tolist()
    return out


def trace_from_doc(doc: dict) -> Trace:
    vals = np.array([[_from_cplx(z) for z in row] for row in doc["values"]], dtype=complex)
    b = doc.get("boundary")
    return Trace(float(doc["radius"]), np.array(doc["t"], dtype=float), vals.reshape(len(doc["t"]), -1),
                 None if b is None else np.array(b, dtype=float))


# --- generic entry points ---------------------------------------------------------

_READERS = {"domain": domain_from_doc, "geodesic_spec": spec_from_doc, "solve_problem": problem_from_doc,
            "report": report_from_doc, "trace": trace_from_doc}


def parse(text: str, kind: Optional[str] = None):
    """Parse a document into its object."""
    doc = loads(text, kind)
    return _READERS[doc["kind"]](doc)


def serialize(obj) -> str:
    if isinstance(obj, TubeDomain):
        doc = domain_to_doc(obj)
    elif isinstance(obj, SolveProblem):
        doc = problem_to_doc(obj)
    elif isinstance(obj, VerificationReport):
        doc = report_to_doc(obj)
    elif isinstance(obj, Trace):
        doc = trace_to_doc(obj)
    else:
        doc = spec_to_doc(obj)
    return dumps(doc)
