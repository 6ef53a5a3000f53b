"""Problem-spec parsing and validation, JSON/CSV report writing."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional

import jsonschema
import numpy as np

from .bethe import SolveOptions
from .exceptions import AffGaudinError, SpecValidationError
from .hamiltonians import ModelSpec

SCHEMA_VERSION = 1
SHIFT_MODELS = ("shift_argument_finite", "shift_argument_affine")


def load_schema() -> dict:
    text = resources.files("affgaudin").joinpath(f"schema/problem_spec.v{SCHEMA_VERSION}.json").read_text()
    return json.loads(text)


def parse_rational(x) -> Fraction:
    return Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 12)


def parse_complex(x):
    """Exact for integers and rational strings, complex for [re, im] pairs, float otherwise."""
    if isinstance(x, list):
        re_, im = x
        return complex(re_, im) if im != 0 else parse_complex(re_)
    if isinstance(x, (int, str)):
        return Fraction(x)
    return float(x)


@dataclass
class ProblemSpec:
    model: ModelSpec
    counts: Dict[int, int] = field(default_factory=dict)
    solver: SolveOptions = field(default_factory=SolveOptions)
    monodromy: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    module_kind: Optional[str] = None
    grade_cap: int = 2
    gammas: List[tuple] = field(default_factory=list)
    raw: dict = field(default_factory=dict)


def schema_diagnostics(doc) -> List[str]:
    validator = jsonschema.Draft202012Validator(load_schema())
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path)):
        ptr = "/" + "/".join(str(p) for p in err.absolute_path)
        out.append(f"{ptr}: {err.message}")
    return out


def _build(doc: dict) -> ProblemSpec:
    levels = [parse_rational(k) for k in doc.get("levels", [])]
    weights = []
    from .algebra.lie import WeightVector

    for i, w in enumerate(doc.get("weights", [])):
        lvl = levels[i] if i < len(levels) else None
        weights.append(WeightVector(tuple(parse_rational(x) for x in w), lvl))
    shift = doc.get("shift")
    model = ModelSpec(
        doc["model"], doc["algebra"],
        sites=[parse_complex(z) for z in doc.get("sites", [])],
        levels=levels,
        shift=WeightVector(tuple(parse_rational(x) for x in shift)) if shift is not None else None,
        weights=weights,
    )
    s = doc.get("solver", {})
    opts = SolveOptions(
        seeds=s.get("seeds", 64), seed=s.get("seed", 20240611), tol=s.get("tol", 1e-12),
        max_iter=s.get("max_iter", 200), radius=tuple(s.get("radius", (0.1, 10.0))),
        threads=s.get("threads", 1),
    )
    mono = dict(doc.get("monodromy", {}))
    if "lambda_grid" in mono:
        mono["lambda_grid"] = [complex(parse_complex(x)) for x in mono["lambda_grid"]]
    return ProblemSpec(
        model=model,
        counts={int(c): n for c, n in doc.get("counts", {}).items()},
        solver=opts, monodromy=mono, output=dict(doc.get("output", {})),
        module_kind=doc.get("module_kind"), grade_cap=doc.get("grade_cap", 2),
        gammas=[tuple(parse_rational(x) for x in g) for g in doc.get("gammas", [])],
        raw=doc,
    )


def semantic_diagnostics(spec: ProblemSpec) -> List[str]:
    out = []
    m = spec.model
    try:
        m.check_sites()
    except AffGaudinError as exc:
        out.append(f"/sites: {exc}")
    if m.model in SHIFT_MODELS:
        try:
            m.shift_pairings()
        except AffGaudinError as exc:
            out.append(f"/shift: {exc}")
    rank = m.algebra.rank
    for i, w in enumerate(m.weights):
        if len(w.coords) != rank:
            out.append(f"/weights/{i}: expected {rank} Dynkin labels, got {len(w.coords)}")
    if m.shift is not None and len(m.shift.coords) != rank:
        out.append(f"/shift: expected {rank} components")
    if m.model == "regular_singularities" and len(m.sites) != len(m.weights):
        out.append("/weights: one weight per site required")
    nodes = set(m.algebra.nodes)
    for c in spec.counts:
        if c not in nodes:
            out.append(f"/counts/{c}: no such Dynkin node")
    return out


def validate(doc) -> List[str]:
    """All diagnostics for a spec document; empty list when valid."""
    diags = schema_diagnostics(doc)
    if diags:
        return diags
    try:
        spec = _build(doc)
    except (AffGaudinError, ValueError, ZeroDivisionError) as exc:
        return [f"/: {exc}"]
    return semantic_diagnostics(spec)


def load_spec(doc: dict) -> ProblemSpec:
    diags = validate(doc)
    if diags:
        raise SpecValidationError(diags)
    return _build(doc)


def read_spec_file(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# output


def jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return obj


def dumps(report) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True)


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, report):
    _atomic_write(path, dumps(report) + "\n")


def rows_to_csv(rows: List[dict]) -> str:
    if not rows:
        return ""
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def _cell(v):
    v = jsonable(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return json.dumps(v)
    return v


def write_csv(path: str, rows: List[dict]):
    _atomic_write(path, rows_to_csv(rows))
