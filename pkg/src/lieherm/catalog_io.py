"""Algebra documents (``.lha.json``), the built-in catalog, and reports.

A document is a JSON object with ``"schema": 1`` and ``"mode"`` either
``"real"``::

    {"schema": 1, "mode": "real", "name": "kodaira_thurston", "dim_real": 4,
     "brackets": [[1, 2, 3, 1.0]], "J": [[...]], "g": [[...]]}

where ``[a, b, c, v]`` means the coefficient of ``x_c`` in ``[x_a, x_b]`` is
``v`` (the ``[x_b, x_a]`` entry is filled in on conversion), or ``"complex"``::

    {"schema": 1, "mode": "complex", "name": "...", "n": 3,
     "C": [[3, 1, 2, 1.0, 0.0]], "D": []}

with ``[j, i, k, re, im]`` giving ``C^j_{ik}`` (or ``D^j_{ik}``).  Indices in
files are 1-based; everything past :func:`parse_document` is 0-based.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from .chern_geometry import ConstantHFit, GeometryFlags
from .errors import StructuralError
from .lie_structure import CDTensors, RealLieAlgebra, ValidationReport
from .metric_search import SearchConfig, SearchResult
from .theorem_checker import FlatnessCertificate, SalamonReport

SCHEMA_VERSION = 1
FILE_SUFFIX = ".lha.json"

_REAL_KEYS = {"schema", "mode", "name", "dim_real", "brackets", "J", "g"}
_COMPLEX_KEYS = {"schema", "mode", "name", "n", "C", "D"}


@dataclass(frozen=True)
class AlgebraDocument:
    mode: str
    name: str
    dim_real: Optional[int] = None
    brackets: tuple = ()          # ((a, b, c, value), ...) 1-based
    J: tuple = ()
    g: tuple = ()
    n: Optional[int] = None
    C: tuple = ()                 # ((j, i, k, re, im), ...) 1-based
    D: tuple = ()

    def to_json_obj(self) -> dict:
        if self.mode == "real":
            return {
                "schema": SCHEMA_VERSION, "mode": "real", "name": self.name,
                "dim_real": self.dim_real,
                "brackets": [[a, b, c, float(v)] for a, b, c, v in self.brackets],
                "J": [[float(x) for x in row] for row in self.J],
                "g": [[float(x) for x in row] for row in self.g],
            }
        return {
            "schema": SCHEMA_VERSION, "mode": "complex", "name": self.name, "n": self.n,
            "C": [[j, i, k, float(re_), float(im)] for j, i, k, re_, im in self.C],
            "D": [[j, i, k, float(re_), float(im)] for j, i, k, re_, im in self.D],
        }


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    if re.fullmatch(r"-?\d+", text):
        text += ".0"
    return text


def _emit(obj: Any, indent: int, out: list) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for idx, (key, value) in enumerate(items):
            out.append(f"{pad}  {json.dumps(str(key))}: ")
            _emit(value, indent + 1, out)
            out.append(",\n" if idx < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (dict, list, tuple)) for v in obj):
            parts = []
            for v in obj:
                sub = []
                _emit(v, 0, sub)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
        else:
            out.append("[\n")
            for idx, value in enumerate(obj):
                out.append(pad + "  ")
                _emit(value, indent + 1, out)
                out.append(",\n" if idx < len(obj) - 1 else "\n")
            out.append(pad + "]")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> bytes:
    """Sorted keys, 17 significant digits for floats, trailing newline."""
    out: list = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out).encode("utf-8")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _no_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise StructuralError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise StructuralError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise StructuralError(f"{where}: value must be finite")
    return float(value)


def _index(value, upper: int, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise StructuralError(f"{where}: index must be an integer, got {value!r}")
    if not 1 <= value <= upper:
        raise StructuralError(f"{where}: index {value} out of range 1..{upper}")
    return value


def _matrix(value, m: int, key: str) -> tuple:
    if not isinstance(value, list) or len(value) != m:
        raise StructuralError(f"{key}: expected {m} rows")
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != m:
            raise StructuralError(f"{key}[{r}]: expected {m} entries")
        rows.append(tuple(_number(x, f"{key}[{r}][{c}]") for c, x in enumerate(row)))
    return tuple(rows)


def _sparse(value, width: int, upper: int, key: str, pair=None) -> tuple:
    """Validate sparse entries ``[i1, i2, i3, numbers...]``.

    ``pair`` names the two index positions in which the tensor is
    antisymmetric.  The mirrored entry may also be given, but then it must be
    the exact negative.
    """
    if not isinstance(value, list):
        raise StructuralError(f"{key}: expected a list of entries")
    seen = {}
    entries = []
    for pos, item in enumerate(value):
        where = f"{key}[{pos}]"
        if not isinstance(item, list) or len(item) != width:
            raise StructuralError(f"{where}: expected {width} fields")
        idx = tuple(_index(v, upper, where) for v in item[:3])
        nums = tuple(_number(v, where) for v in item[3:])
        if idx in seen:
            raise StructuralError(f"{where}: duplicate entry {list(idx)} (first at {key}[{seen[idx][0]}])")
        if pair is not None:
            p, q = pair
            if idx[p] == idx[q] and any(nums):
                raise StructuralError(f"{where}: antisymmetric entry with equal lower indices must be 0")
            mirror = list(idx)
            mirror[p], mirror[q] = idx[q], idx[p]
            mirror = tuple(mirror)
            if mirror in seen and seen[mirror][1] != tuple(-x for x in nums):
                raise StructuralError(f"{where}: conflicts with mirrored entry {key}[{seen[mirror][0]}]")
        seen[idx] = (pos, nums)
        entries.append(idx + nums)
    return tuple(entries)


def parse_document(data) -> AlgebraDocument:
    """Parse and structurally validate an algebra document."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise StructuralError(f"document is not UTF-8: {exc}") from None
    try:
        obj = json.loads(data, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise StructuralError("document must be a JSON object")
    if obj.get("schema") != SCHEMA_VERSION:
        raise StructuralError(f"schema: expected {SCHEMA_VERSION}, got {obj.get('schema')!r}")
    mode = obj.get("mode")
    if mode not in ("real", "complex"):
        raise StructuralError(f"mode: unknown mode {mode!r} (expected 'real' or 'complex')")
    allowed = _REAL_KEYS if mode == "real" else _COMPLEX_KEYS
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise StructuralError(f"unknown top-level keys: {', '.join(unknown)}")
    missing = sorted(allowed - set(obj))
    if missing:
        raise StructuralError(f"missing keys: {', '.join(missing)}")
    name = obj["name"]
    if not isinstance(name, str):
        raise StructuralError("name: expected a string")

    if mode == "real":
        m = obj["dim_real"]
        if isinstance(m, bool) or not isinstance(m, int) or m < 2 or m % 2:
            raise StructuralError(f"dim_real: expected an even integer >= 2, got {m!r}")
        return AlgebraDocument(
            "real", name, dim_real=m,
            brackets=_sparse(obj["brackets"], 4, m, "brackets", pair=(0, 1)),
            J=_matrix(obj["J"], m, "J"), g=_matrix(obj["g"], m, "g"),
        )
    n = obj["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise StructuralError(f"n: expected a positive integer, got {n!r}")
    return AlgebraDocument(
        "complex", name, n=n,
        C=_sparse(obj["C"], 5, n, "C", pair=(1, 2)),
        D=_sparse(obj["D"], 5, n, "D"),
    )


def dump_document(doc: AlgebraDocument) -> bytes:
    return canonical_json(doc.to_json_obj())


def load_document(path) -> AlgebraDocument:
    with open(path, "rb") as fh:
        return parse_document(fh.read())


def to_algebra(doc: AlgebraDocument) -> RealLieAlgebra:
    if doc.mode != "real":
        raise StructuralError(f"document {doc.name!r} is in {doc.mode} mode")
    m = doc.dim_real
    f = np.zeros((m, m, m))
    for a, b, c, v in doc.brackets:
        f[a - 1, b - 1, c - 1] = v
        f[b - 1, a - 1, c - 1] = -v
    return RealLieAlgebra(f, np.array(doc.J), np.array(doc.g), doc.name)


def to_cd(doc: AlgebraDocument) -> CDTensors:
    if doc.mode != "complex":
        raise StructuralError(f"document {doc.name!r} is in {doc.mode} mode")
    n = doc.n
    C = np.zeros((n, n, n), complex)
    D = np.zeros((n, n, n), complex)
    for j, i, k, re_, im in doc.C:
        C[j - 1, i - 1, k - 1] = re_ + 1j * im
        C[j - 1, k - 1, i - 1] = -(re_ + 1j * im)
    for j, i, k, re_, im in doc.D:
        D[j - 1, i - 1, k - 1] = re_ + 1j * im
    return CDTensors(C, D)


# ---------------------------------------------------------------------------
# Built-in catalog
# ---------------------------------------------------------------------------

def _standard_J(n: int) -> tuple:
    """``J x_{2i-1} = x_{2i}`` in 1-based labels."""
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    return tuple(tuple(float(x) for x in row) for row in J)


def _diag(values) -> tuple:
    m = len(values)
    return tuple(tuple(float(values[r]) if r == c else 0.0 for c in range(m)) for r in range(m))


def _abelian(n: int) -> AlgebraDocument:
    return AlgebraDocument("real", f"abelian_{n}", dim_real=2 * n, brackets=(),
                           J=_standard_J(n), g=_diag([1.0] * (2 * n)))


_FIXED = {
    # [x1, x2] = x3, x4 central, J x1 = x2, J x3 = x4
    "kodaira_thurston": AlgebraDocument(
        "real", "kodaira_thurston", dim_real=4, brackets=((1, 2, 3, 1.0),),
        J=_standard_J(2), g=_diag([1.0] * 4),
    ),
    # [e1, e2] = e3 with D = 0
    "complex_heisenberg": AlgebraDocument(
        "complex", "complex_heisenberg", n=3, C=((3, 1, 2, 1.0, 0.0),), D=(),
    ),
    # real form of the above: x1, x3, x5 ~ Z1, Z2, Z3 and x2, x4, x6 = J of those;
    # the centre is scaled to norm^2 1/2 so that C^3_{12} = 1 in the Gram-Schmidt frame
    "iwasawa_real6": AlgebraDocument(
        "real", "iwasawa_real6", dim_real=6,
        brackets=((1, 3, 5, 1.0), (1, 4, 6, 1.0), (2, 3, 6, 1.0), (2, 4, 5, -1.0)),
        J=_standard_J(3), g=_diag([1.0, 1.0, 1.0, 1.0, 0.5, 0.5]),
    ),
}

NILPOTENT_BUILTINS = ("abelian_1", "abelian_2", "abelian_3", "complex_heisenberg",
                      "kodaira_thurston", "iwasawa_real6")


def builtin_names() -> list:
    return ["abelian_<n>"] + sorted(_FIXED)


def builtin(name: str) -> AlgebraDocument:
    m = re.fullmatch(r"abelian_([1-9]\d*)", name)
    if m:
        return _abelian(int(m.group(1)))
    try:
        return _FIXED[name]
    except KeyError:
        raise StructuralError(
            f"unknown built-in {name!r}; available: {', '.join(builtin_names())}"
        ) from None


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _complex_pair(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def validation_obj(report: ValidationReport) -> dict:
    return {
        "overall": report.overall,
        "checks": [{"name": c.name, "max_residual": c.max_residual, "passed": c.passed}
                   for c in report.checks],
    }


def flags_obj(flags: GeometryFlags) -> dict:
    return {"kahler": flags.kahler, "chern_flat": flags.chern_flat, "complex_group": flags.complex_group}


def constant_h_obj(fit: ConstantHFit) -> dict:
    return {"c_fit": fit.c_fit, "residual": fit.residual, "is_constant": fit.is_constant,
            "frobenius": fit.frobenius}


def salamon_obj(report: SalamonReport) -> dict:
    return {
        "satisfied": report.satisfied,
        "max_residual": report.max_residual,
        "violations": [{"tensor": v.tensor, "indices": [t + 1 for t in v.indices],
                        "value": _complex_pair(v.value)} for v in report.violations],
    }


def certificate_obj(cert: FlatnessCertificate) -> dict:
    return {
        "conclusion": cert.conclusion,
        "c_value": cert.c_value,
        "steps": [{"claim_id": s.claim_id, "description": s.description,
                   "max_residual": s.max_residual, "passed": s.passed} for s in cert.steps],
    }


def search_obj(result: SearchResult, config: Optional[SearchConfig] = None) -> dict:
    obj = {
        "best_residual": result.best_residual,
        "best_c": result.best_c,
        "converged": result.converged,
        "best_restart": result.best_restart,
        "best_params": {"L": [[_complex_pair(z) for z in row] for row in result.best_params.L]},
        "trace": [[int(i), float(v)] for i, v in result.trace],
    }
    if config is not None:
        obj["config"] = {k: getattr(config, k) for k in
                         ("restarts", "max_iters", "step_init", "fd_epsilon", "seed", "tol", "relative")}
    return obj


@dataclass(frozen=True)
class ReportDocument:
    input_name: str
    tool_version: str = __version__
    validation: Optional[ValidationReport] = None
    flags: Optional[GeometryFlags] = None
    constant_h: Optional[ConstantHFit] = None
    salamon: Optional[SalamonReport] = None
    certificate: Optional[FlatnessCertificate] = None
    search: Optional[SearchResult] = None
    search_config: Optional[SearchConfig] = None
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        obj = {"tool_version": self.tool_version, "input_name": self.input_name}
        if self.validation is not None:
            obj["validation"] = validation_obj(self.validation)
        if self.flags is not None:
            obj["flags"] = flags_obj(self.flags)
        if self.constant_h is not None:
            obj["constant_h"] = constant_h_obj(self.constant_h)
        if self.salamon is not None:
            obj["salamon"] = salamon_obj(self.salamon)
        if self.certificate is not None:
            obj["certificate"] = certificate_obj(self.certificate)
        if self.search is not None:
            obj["search"] = search_obj(self.search, self.search_config)
        obj.update(self.extra)
        return obj


def emit_report(report: ReportDocument) -> bytes:
    return canonical_json(report.to_json_obj())


def parse_report(data) -> dict:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    return json.loads(data)
