#!/usr/bin/env python3
"""Regenerate the JSON fixtures under fixtures/.

Deterministic; run from the repository root:  python3 tools/make_fixtures.py
"""

from __future__ import annotations

import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gleason_csm.frame import FrameFunction
from gleason_csm.hilbert import Field, OrthonormalBasis, UnitVector, density_from_spectrum, random_basis
from gleason_csm.scalar import ScalarCandidate
from gleason_csm.serialization import (
    basis_to_json,
    candidate_to_json,
    density_to_json,
    dumps_canonical,
    frame_function_to_json,
)

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "fixtures"

# Dense tabulated frame function on the circle: f(theta) = cos^2(3 theta).
# Frame-valid on R^2 (orthogonal pairs differ by pi/2 and cos^2(3t) +
# cos^2(3t + 3pi/2) = 1) but not a quadratic form, so reconstruction must
# fail.  CIRCLE_POINTS is even so every grid point's orthocomplement is on
# the grid, and dense enough that any direction is within the tabulated
# lookup tolerance of an entry.
CIRCLE_POINTS = 1600


def qubit_classical_model() -> dict:
    thetas = [k * math.pi / CIRCLE_POINTS for k in range(CIRCLE_POINTS)]
    entries = [
        (np.array([math.cos(t), math.sin(t)]), math.cos(3 * t) ** 2) for t in thetas
    ]
    f = FrameFunction.tabulated(2, Field.REAL, entries)
    return frame_function_to_json(f)


def born_fixtures() -> dict[str, dict]:
    basis_c = random_basis(3, Field.COMPLEX, 20250810, label="eig")
    rho_c = density_from_spectrum([0.6, 0.3, 0.1], basis_c)
    basis_r = random_basis(3, Field.REAL, 20250811, label="eig")
    rho_r = density_from_spectrum([0.6, 0.3, 0.1], basis_r)
    pole = UnitVector(np.array([0.0, 0.0, 1.0]), Field.REAL)
    from gleason_csm.hilbert import DensityMatrix

    pure = DensityMatrix.pure(pole)
    return {
        "born_rho_dim3_complex.json": frame_function_to_json(FrameFunction.born(rho_c)),
        "born_rho_dim3_real.json": frame_function_to_json(FrameFunction.born(rho_r)),
        "born_pole_dim3.json": frame_function_to_json(FrameFunction.born(pure)),
    }


def scalar_fixtures() -> dict[str, dict]:
    def grid(q: int, g, excluded=()):
        vals = {k: g(Fraction(k, q)) for k in range(q + 1) if k not in set(excluded)}
        return candidate_to_json(
            ScalarCandidate(q, vals, excluded=frozenset(excluded))
        )

    out = {
        "identity_q60.json": grid(60, float),
        "xsq_q60.json": grid(60, lambda a: float(a) ** 2),
        "sqrt_q60.json": grid(60, lambda a: math.sqrt(float(a))),
        "sine_bump_q60.json": grid(
            60, lambda a: float(a) + 0.001 * math.sin(2 * math.pi * float(a))
        ),
        "identity_excluded_q42.json": grid(42, float, excluded=(6,)),  # 6/42 = 1/7
    }
    offset = {k: (0.01 if k == 0 else k / 60) for k in range(61)}
    out["g0_offset_q60.json"] = candidate_to_json(ScalarCandidate(60, offset))
    return out


def measure_plan() -> dict:
    s = 1.0 / math.sqrt(2.0)
    cz = basis_to_json(
        OrthonormalBasis(
            (
                UnitVector(np.array([1.0, 0.0]), Field.REAL),
                UnitVector(np.array([0.0, 1.0]), Field.REAL),
            ),
            label="Cz",
        )
    )
    cx = basis_to_json(
        OrthonormalBasis(
            (
                UnitVector(np.array([s, s]), Field.REAL),
                UnitVector(np.array([s, -s]), Field.REAL),
            ),
            label="Cx",
        )
    )
    return {
        "initial": {"field": "R", "vector": [1.0, 0.0], "context_label": "Cz"},
        "steps": [{"context": cx, "unitary": None}, {"context": cz, "unitary": None}],
    }


def main() -> None:
    OUT.mkdir(exist_ok=True)
    files: dict[str, dict] = {"qubit_classical_model.json": qubit_classical_model()}
    files.update(born_fixtures())
    files.update(scalar_fixtures())
    files["measure_plan_zxz.json"] = measure_plan()
    for name, payload in files.items():
        (OUT / name).write_text(dumps_canonical(payload))
        print(f"wrote fixtures/{name}")


if __name__ == "__main__":
    main()
