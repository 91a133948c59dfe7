"""Sectorized measurement pipeline.

A pre-measurement modality is a rank-1 system projector together with an
opaque context-state label (context internals are out of scope and carried
as labels only).  Interacting with a new context produces a sectorized
state: a statistical mixture with one sector per outcome, no cross-sector
coherences, and probabilities from the shared Born code path.  Reading out
a sector yields the next pre-measurement modality, which may evolve
unitarily until the next measurement.  Zero-probability sectors are kept so
sector indexing is stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .csm import MeasurementRecord, _sample_outcomes
from .errors import (
    DimensionMismatch,
    InvalidParams,
    NotUnitary,
    ZeroProbabilitySector,
)
from .hilbert import (
    Field,
    OrthonormalBasis,
    Projector,
    UnitaryMatrix,
    transition_probabilities,
)
from .seeding import as_rng, child_rng
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ContextStateLabel",
    "PreMeasurementModality",
    "Sector",
    "SectorizedState",
    "pre_measure",
    "read_out",
    "evolve",
    "ChainStep",
    "run_measurement_chain",
    "run_chain_ensemble",
]


@dataclass(frozen=True)
class ContextStateLabel:
    """Opaque stand-in for the context's internal state."""

    context_label: str
    sector_index: int = 0
    metadata: str = ""

    def to_json(self) -> dict:
        return {
            "context_label": self.context_label,
            "sector_index": self.sector_index,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class PreMeasurementModality:
    system_projector: Projector
    context_state: ContextStateLabel

    def __post_init__(self):
        if self.system_projector.rank != 1:
            raise InvalidParams("pre-measurement modality needs a rank-1 projector")


@dataclass(frozen=True)
class Sector:
    probability: float
    system_projector: Projector
    context_state: ContextStateLabel


@dataclass(frozen=True)
class SectorizedState:
    """Mixture sum_j p_j (projector_j x context state_j) with orthogonal sectors."""

    sectors: tuple[Sector, ...]
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        cleaned = []
        for s in self.sectors:
            p = s.probability
            if p < -1e-12:
                raise InvalidParams(f"sector probability {p} below 0")
            cleaned.append(Sector(max(p, 0.0), s.system_projector, s.context_state))
        object.__setattr__(self, "sectors", tuple(cleaned))
        total = sum(s.probability for s in self.sectors)
        if abs(total - 1.0) > self.tol.derived:
            raise InvalidParams(f"sector probabilities sum to {total}")
        for j, a in enumerate(self.sectors):
            for b in self.sectors[j + 1 :]:
                overlap = abs(complex(np.trace(a.system_projector.matrix @ b.system_projector.matrix)))
                if overlap > self.tol.derived:
                    raise InvalidParams(f"sectors not orthogonal: trace overlap {overlap}")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.sectors])


def pre_measure(m: PreMeasurementModality, c2: OrthonormalBasis) -> SectorizedState:
    """Sectorized state after interacting with context ``c2``, before readout.

    One sector per outcome of ``c2`` with the Born probability of that
    outcome; zero-probability sectors are retained.  Sector labels carry the
    context identity and sector index.
    """
    if m.system_projector.dim != c2.dim:
        raise DimensionMismatch("modality and context dimensions differ")
    probs = transition_probabilities(m.system_projector, c2)
    sectors = tuple(
        Sector(float(probs[j]), q, ContextStateLabel(c2.label, j))
        for j, q in enumerate(c2.projectors())
    )
    return SectorizedState(sectors)


def read_out(s: SectorizedState, k: int) -> PreMeasurementModality:
    """Readout of sector ``k``: its projector and label become the new modality."""
    if not 0 <= k < len(s.sectors):
        raise InvalidParams(f"sector index {k} out of range")
    sec = s.sectors[k]
    if sec.probability <= 1e-12:
        raise ZeroProbabilitySector(f"sector {k} has probability {sec.probability}")
    return PreMeasurementModality(sec.system_projector, sec.context_state)


def evolve(m: PreMeasurementModality, u: UnitaryMatrix | np.ndarray) -> PreMeasurementModality:
    """Unitary evolution of the system projector; the context label is untouched."""
    mat = u.matrix if isinstance(u, UnitaryMatrix) else np.asarray(u)
    if mat.shape != (m.system_projector.dim,) * 2:
        raise DimensionMismatch("unitary and projector dimensions differ")
    dev = float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))
    if dev > 1e-8:
        raise NotUnitary(f"U^dagger U deviates from identity by {dev}")
    field = m.system_projector.field
    if field is Field.REAL and np.iscomplexobj(mat) and np.max(np.abs(mat.imag)) > 0:
        field = Field.COMPLEX
    new = mat @ m.system_projector.matrix @ mat.conj().T
    new = (new + new.conj().T) / 2
    return PreMeasurementModality(Projector(new, rank=1, field=field), m.context_state)


@dataclass(frozen=True)
class ChainStep:
    context: OrthonormalBasis
    unitary: UnitaryMatrix | None = None


def run_measurement_chain(
    initial: PreMeasurementModality,
    plan: Sequence[ChainStep],
    seed: int | np.random.Generator,
) -> tuple[MeasurementRecord, PreMeasurementModality]:
    """Alternate evolve / pre_measure / sampled read_out along the plan.

    The marginal statistics equal sequential single-shot measurements made
    with the simulator, since the sector probabilities come from the same
    Born code path and the same sampler.
    """
    rng = as_rng(seed)
    record = MeasurementRecord()
    m = initial
    for t, step in enumerate(plan):
        if step.unitary is not None:
            m = evolve(m, step.unitary)
        state = pre_measure(m, step.context)
        k = int(_sample_outcomes(state.probabilities, 1, rng)[0])
        m = read_out(state, k)
        record.append(step.context.label, k, t)
    return record, m


def run_chain_ensemble(
    initial: PreMeasurementModality,
    plan: Sequence[ChainStep],
    runs: int,
    seed: int,
) -> list[np.ndarray]:
    """Outcome counts per step over ``runs`` independent chain repetitions.

    Vectorized by grouping runs on their current sector: each group's next
    outcomes are drawn in one sampler call from the same per-run
    distribution, so the ensemble is distributed exactly as ``runs``
    independent :func:`run_measurement_chain` executions.
    """
    if runs < 1:
        raise InvalidParams("runs must be >= 1")
    groups: dict[int, tuple[PreMeasurementModality, int]] = {-1: (initial, runs)}
    per_step: list[np.ndarray] = []
    for t, step in enumerate(plan):
        next_groups: dict[int, tuple[PreMeasurementModality, int]] = {}
        dim = step.context.dim
        counts = np.zeros(dim, dtype=np.int64)
        for gi, (key, (m, cnt)) in enumerate(sorted(groups.items())):
            if step.unitary is not None:
                m = evolve(m, step.unitary)
            state = pre_measure(m, step.context)
            outs = _sample_outcomes(state.probabilities, cnt, child_rng(seed, t, gi))
            binned = np.bincount(outs, minlength=dim)
            counts += binned
            for k in range(dim):
                if binned[k] == 0:
                    continue
                nm = read_out(state, k)
                if k in next_groups:
                    prev_m, prev_cnt = next_groups[k]
                    next_groups[k] = (prev_m, prev_cnt + int(binned[k]))
                else:
                    next_groups[k] = (nm, int(binned[k]))
        groups = next_groups
        per_step.append(counts)
    return per_step
