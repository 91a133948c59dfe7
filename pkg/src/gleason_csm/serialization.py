"""JSON encodings for vectors, matrices, bases, fixtures and reports.

Conventions: a complex scalar serializes as [re, im]; a vector as an array
of scalars; a matrix as a row-major array of rows; a basis as
{"dim": N, "field": "C", "label": "Cu", "vectors": [...]}.  Frame-function
fixtures are {"kind": "born", "rho": [[...]]} or {"kind": "tabulated",
"dim": 3, "field": "R", "entries": [{"v": [...], "f": 0.25}, ...]}; scalar
candidates are {"Q": 60, "excluded": [7], "values": {"0": 0.0, ...}} with
keys k meaning the grid point k/Q.  All CLI reports carry "schema": "v1"
and serialize with sorted keys, so identical configurations produce
byte-identical output.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import InvalidParams
from .frame import FrameFunction, FrameKind
from .hilbert import DensityMatrix, Field, OrthonormalBasis, UnitaryMatrix, UnitVector
from .scalar import ScalarCandidate

SCHEMA = "v1"


def scalar_to_json(z, field: Field):
    if field is Field.REAL:
        return float(np.real(z))
    z = complex(z)
    return [z.real, z.imag]


def scalar_from_json(s, field: Field):
    if field is Field.REAL:
        if isinstance(s, (list, tuple)):
            raise InvalidParams("complex scalar given for a REAL-field object")
        return float(s)
    if isinstance(s, (list, tuple)):
        if len(s) != 2:
            raise InvalidParams(f"complex scalar must be [re, im], got {s!r}")
        return complex(s[0], s[1])
    return complex(float(s), 0.0)


def vector_to_json(v: np.ndarray, field: Field) -> list:
    return [scalar_to_json(x, field) for x in np.asarray(v)]


def vector_from_json(data: list, field: Field) -> np.ndarray:
    return np.array([scalar_from_json(x, field) for x in data], dtype=field.dtype)


def matrix_to_json(m: np.ndarray, field: Field) -> list:
    return [vector_to_json(row, field) for row in np.asarray(m)]


def matrix_from_json(data: list, field: Field) -> np.ndarray:
    return np.array([vector_from_json(row, field) for row in data], dtype=field.dtype)


def basis_to_json(b: OrthonormalBasis) -> dict:
    return {
        "dim": b.dim,
        "field": b.field.value,
        "label": b.label,
        "vectors": [vector_to_json(v.components, b.field) for v in b.vectors],
    }


def basis_from_json(data: dict) -> OrthonormalBasis:
    field = Field.from_tag(data["field"])
    vectors = tuple(UnitVector(vector_from_json(v, field), field) for v in data["vectors"])
    if "dim" in data and int(data["dim"]) != len(vectors):
        raise InvalidParams("declared dim does not match vector count")
    return OrthonormalBasis(vectors, label=data.get("label", ""))


def density_to_json(rho: DensityMatrix) -> dict:
    return {"field": rho.field.value, "rho": matrix_to_json(rho.matrix, rho.field)}


def density_from_json(data: dict, field: Field | None = None) -> DensityMatrix:
    if field is None:
        if "field" in data:
            field = Field.from_tag(data["field"])
        else:
            leaf = data["rho"][0][0]
            field = Field.COMPLEX if isinstance(leaf, (list, tuple)) else Field.REAL
    return DensityMatrix(matrix_from_json(data["rho"], field), field)


def unitary_to_json(u: UnitaryMatrix) -> dict:
    return {"field": u.field.value, "matrix": matrix_to_json(u.matrix, u.field)}


def unitary_from_json(data: dict) -> UnitaryMatrix:
    if "field" in data:
        field = Field.from_tag(data["field"])
    else:
        leaf = data["matrix"][0][0]
        field = Field.COMPLEX if isinstance(leaf, (list, tuple)) else Field.REAL
    return UnitaryMatrix(matrix_from_json(data["matrix"], field), field)


# ---------------------------------------------------------------------------
# Frame-function fixtures


def frame_function_to_json(f: FrameFunction) -> dict:
    if f.kind is FrameKind.BORN:
        assert f.rho is not None
        return {
            "kind": "born",
            "dim": f.dim,
            "field": f.field.value,
            "rho": matrix_to_json(f.rho.matrix, f.field),
        }
    if f.kind is FrameKind.TABULATED:
        assert f.entries is not None
        return {
            "kind": "tabulated",
            "dim": f.dim,
            "field": f.field.value,
            "entries": [
                {"v": vector_to_json(v, f.field), "f": float(val)} for v, val in f.entries
            ],
        }
    raise InvalidParams("closed-form frame functions have no file representation")


def frame_function_from_json(data: dict) -> FrameFunction:
    kind = data.get("kind")
    if kind == "born":
        rho = density_from_json(
            data, Field.from_tag(data["field"]) if "field" in data else None
        )
        if "dim" in data and int(data["dim"]) != rho.dim:
            raise InvalidParams("declared dim does not match rho")
        return FrameFunction.born(rho)
    if kind == "tabulated":
        field = Field.from_tag(data["field"]) if "field" in data else Field.REAL
        entries = [
            (vector_from_json(e["v"], field), float(e["f"])) for e in data["entries"]
        ]
        dim = int(data.get("dim", len(entries[0][0])))
        return FrameFunction.tabulated(dim, field, entries)
    raise InvalidParams(f"unknown frame-function kind {kind!r}")


# ---------------------------------------------------------------------------
# Scalar-lemma candidates


def candidate_to_json(c: ScalarCandidate) -> dict:
    return {
        "Q": c.grid_denominator,
        "excluded": sorted(c.excluded),
        "values": {str(k): c.values[k] for k in sorted(c.values)},
    }


def candidate_from_json(data: dict) -> ScalarCandidate:
    return ScalarCandidate(
        grid_denominator=int(data["Q"]),
        values={int(k): float(v) for k, v in data["values"].items()},
        excluded=frozenset(int(k) for k in data.get("excluded", [])),
    )


# ---------------------------------------------------------------------------
# Canonical dumps


def dumps_canonical(obj: Any) -> str:
    """Sorted-key, indented JSON with a trailing newline; byte stable."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def with_schema(payload: dict) -> dict:
    out = {"schema": SCHEMA}
    out.update(payload)
    return out
