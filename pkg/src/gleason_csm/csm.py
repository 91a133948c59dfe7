"""Contextual measurement simulator.

Systems expose a fixed number N of mutually exclusive outcomes per context
(an orthonormal basis); a modality is one such outcome together with the
context it was obtained in.  Modalities across contexts whose outcome
projectors coincide form an extravalence class, and transition probabilities
between modalities depend only on the two class projectors.  This module
samples measurements, classifies context pairs, partitions modalities into
classes, and runs the Monte-Carlo experiments that exhibit the probabilistic
transition law, the class-only dependence of probabilities (the four-context
experiment), and the impossibility of refining outcomes by round trips.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DimensionMismatch, InvalidParams, PreconditionUnmet
from .hilbert import (
    DensityMatrix,
    Field,
    OrthonormalBasis,
    Projector,
    UnitVector,
    basis_containing,
    random_unit_vector,
    transition_matrix,
    transition_probabilities,
)
from .seeding import as_rng, child_rng
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "QuantumSystem",
    "ExtravalenceClass",
    "Modality",
    "MeasurementRecord",
    "modality",
    "measure",
    "measure_many",
    "classify_context_pair",
    "PairClassification",
    "verify_theorem1",
    "verify_theorem2_fig1",
    "refinement_contradiction_demo",
    "extravalence_partition",
]


@dataclass(frozen=True)
class QuantumSystem:
    """A system with N mutually exclusive outcomes in every context."""

    n_outcomes: int
    field: Field = Field.COMPLEX

    def __post_init__(self):
        if self.n_outcomes < 2:
            raise InvalidParams("a system needs at least 2 mutually exclusive outcomes")


@dataclass(frozen=True)
class ExtravalenceClass:
    """Equivalence class of modalities sharing one rank-1 projector."""

    id: str
    projector: Projector


@dataclass(frozen=True)
class Modality:
    """One repeatable outcome, attached to both a context and its class."""

    context: OrthonormalBasis
    outcome_index: int
    extravalence_class: ExtravalenceClass
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.outcome_index < self.context.dim:
            raise InvalidParams(f"outcome index {self.outcome_index} out of range")
        own = self.context.vectors[self.outcome_index].projector()
        if not own.close_to(self.extravalence_class.projector, self.tol.derived):
            raise InvalidParams("class projector does not match the context outcome")

    @property
    def projector(self) -> Projector:
        return self.extravalence_class.projector


def modality(context: OrthonormalBasis, outcome_index: int, class_id: str | None = None) -> Modality:
    """Modality for a context outcome, with a freshly derived class."""
    proj = context.vectors[outcome_index].projector()
    cid = class_id if class_id is not None else f"{context.label}[{outcome_index}]"
    return Modality(context, outcome_index, ExtravalenceClass(cid, proj))


@dataclass
class MeasurementRecord:
    """Audit trail of (context label, outcome index, timestamp index)."""

    events: list[tuple[str, int, int]] = dc_field(default_factory=list)

    def append(self, label: str, outcome: int, t: int) -> None:
        self.events.append((label, int(outcome), int(t)))

    def to_json(self) -> dict:
        return {
            "events": [
                {"context": c, "outcome": o, "t": t} for c, o, t in self.events
            ]
        }


# ---------------------------------------------------------------------------
# Sampling


def _sample_outcomes(probs: np.ndarray, trials: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(probs, 0.0, None)
    p = p / p.sum()
    return rng.choice(len(p), size=trials, p=p)


def measure(current: Modality, target: OrthonormalBasis, seed: int | np.random.Generator) -> Modality:
    """Measure in ``target``: outcome j occurs with probability trace(P Q_j).

    Returns the realized modality of the target context.  Repeating with the
    same context reproduces the outcome (the distribution is concentrated on
    the current class).
    """
    if current.context.dim != target.dim:
        raise DimensionMismatch("contexts must share a dimension")
    probs = transition_probabilities(current.projector, target)
    j = int(_sample_outcomes(probs, 1, as_rng(seed))[0])
    return modality(target, j)


def measure_many(
    current: Modality, target: OrthonormalBasis, trials: int, seed: int | np.random.Generator
) -> np.ndarray:
    """Outcome counts over ``trials`` independent measurements.

    Shares the sampler and probability path with :func:`measure`; one call
    here is distributed exactly as ``trials`` single-shot calls.
    """
    if current.context.dim != target.dim:
        raise DimensionMismatch("contexts must share a dimension")
    probs = transition_probabilities(current.projector, target)
    outcomes = _sample_outcomes(probs, trials, as_rng(seed))
    return np.bincount(outcomes, minlength=target.dim)


# ---------------------------------------------------------------------------
# Context pair classification and extravalence


@dataclass(frozen=True)
class PairClassification:
    kind: str  # "PERMUTATION" | "INCOMPATIBLE"
    mismatched: int
    matching: tuple[tuple[int, int], ...]  # (index in Ca, index in Cb)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "mismatched": self.mismatched,
            "matching": [list(m) for m in self.matching],
        }


def classify_context_pair(
    ca: OrthonormalBasis, cb: OrthonormalBasis, tol: Tolerances = DEFAULT
) -> PairClassification:
    """PERMUTATION when outcome projectors match bijectively, else INCOMPATIBLE.

    Projectors within a basis are mutually orthogonal, so a projector of one
    context can match at most one projector of the other; the count of
    unmatched outcomes is reported.
    """
    if ca.dim != cb.dim:
        raise DimensionMismatch("contexts must share a dimension")
    pa, pb = ca.projectors(), cb.projectors()
    matches = []
    used = set()
    for i, p in enumerate(pa):
        for j, q in enumerate(pb):
            if j not in used and p.close_to(q, tol.derived):
                matches.append((i, j))
                used.add(j)
                break
    mismatched = ca.dim - len(matches)
    kind = "PERMUTATION" if mismatched == 0 else "INCOMPATIBLE"
    return PairClassification(kind, mismatched, tuple(matches))


def extravalence_partition(
    modalities: list[Modality], tol: Tolerances = DEFAULT
) -> list[list[Modality]]:
    """Group modalities whose class projectors coincide within tolerance.

    Union-find over pairwise closeness, then a transitivity audit: all
    members of a resulting class must be pairwise close, so the numerical
    relation really is an equivalence on this input.
    """
    n = len(modalities)
    if not n:
        return []
    dims = {m.context.dim for m in modalities}
    if len(dims) != 1:
        raise DimensionMismatch("all modalities must share a dimension")
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = [
        [modalities[i].projector.close_to(modalities[j].projector, tol.derived) for j in range(n)]
        for i in range(n)
    ]
    for i in range(n):
        for j in range(i + 1, n):
            if close[i][j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    for members in groups.values():
        for i, j in itertools.combinations(members, 2):
            if not close[i][j]:
                raise InvalidParams(
                    "projector closeness failed transitivity; tolerance too loose for this input"
                )
    return [[modalities[i] for i in members] for members in groups.values()]


# ---------------------------------------------------------------------------
# Experiment reports


def _stderr(p: float, n: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 1e-300) / n))


@dataclass(frozen=True)
class Theorem1Report:
    classification: PairClassification
    exact: np.ndarray  # (N, N) transition table
    empirical: np.ndarray  # (N, N) frequencies
    trials: int
    some_outcome_always: bool
    spread_when_incompatible: bool
    deterministic_when_permutation: bool
    rows_within_sigma: bool

    @property
    def passed(self) -> bool:
        return (
            self.some_outcome_always
            and self.spread_when_incompatible
            and self.deterministic_when_permutation
            and self.rows_within_sigma
        )

    def to_json(self) -> dict:
        return {
            "classification": self.classification.to_json(),
            "exact": self.exact.tolist(),
            "empirical": self.empirical.tolist(),
            "trials": self.trials,
            "some_outcome_always": self.some_outcome_always,
            "spread_when_incompatible": self.spread_when_incompatible,
            "deterministic_when_permutation": self.deterministic_when_permutation,
            "rows_within_sigma": self.rows_within_sigma,
            "passed": self.passed,
        }


def verify_theorem1(
    sys: QuantumSystem,
    ca: OrthonormalBasis,
    cb: OrthonormalBasis,
    trials: int,
    seed: int,
    tol: Tolerances = DEFAULT,
) -> Theorem1Report:
    """Transition-law experiment between two contexts.

    For each starting outcome of ``ca``, samples the outcome distribution
    over ``cb`` and checks: some outcome always occurs (rows are probability
    distributions), an incompatible pair spreads at least one starting
    modality over several outcomes, a permutation pair is deterministic in
    every row, and every empirical frequency sits within the statistical
    band of the exact table entry.
    """
    if trials < 10_000:
        raise InvalidParams("theorem-1 statistics need at least 10^4 trials")
    cls = classify_context_pair(ca, cb, tol)
    exact = transition_matrix(ca, cb)
    n = ca.dim
    emp = np.zeros_like(exact)
    for i in range(n):
        counts = measure_many(modality(ca, i), cb, trials, child_rng(seed, i))
        emp[i] = counts / trials

    some_always = bool(np.all(np.abs(exact.sum(axis=1) - 1.0) <= tol.derived))
    if cls.kind == "INCOMPATIBLE":
        spread = bool(np.any((emp > 0).sum(axis=1) >= 2))
    else:
        spread = True
    if cls.kind == "PERMUTATION":
        deterministic = bool(np.all(np.max(emp, axis=1) == 1.0))
    else:
        deterministic = True
    sig = tol.statistical_sigmas
    within = True
    for i in range(n):
        for j in range(n):
            band = sig * _stderr(exact[i, j], trials)
            if abs(emp[i, j] - exact[i, j]) > band + 1e-12:
                within = False
    return Theorem1Report(cls, exact, emp, trials, some_always, spread, deterministic, within)


@dataclass(frozen=True)
class Theorem2Report:
    exact_probabilities: tuple[float, float, float, float]
    empirical: tuple[float, float, float, float]
    born_value: float
    two_step_via_extravalent: float
    trials: int
    pairwise_within_sigma: bool
    match_born_within_sigma: bool

    @property
    def passed(self) -> bool:
        return self.pairwise_within_sigma and self.match_born_within_sigma

    def to_json(self) -> dict:
        return {
            "exact_probabilities": list(self.exact_probabilities),
            "empirical": list(self.empirical),
            "born_value": self.born_value,
            "two_step_via_extravalent": self.two_step_via_extravalent,
            "trials": self.trials,
            "pairwise_within_sigma": self.pairwise_within_sigma,
            "match_born_within_sigma": self.match_born_within_sigma,
            "passed": self.passed,
        }


def verify_theorem2_fig1(
    sys: QuantumSystem,
    seed: int,
    trials: int,
    start: UnitVector | None = None,
    end: UnitVector | None = None,
    tol: Tolerances = DEFAULT,
) -> Theorem2Report:
    """Four-context experiment: transition probabilities are class properties.

    Builds two contexts containing the start direction (with independent
    random completions) and two containing the end direction, then estimates
    the four cross transitions.  All four exact values reduce to the same
    Born probability and are bit-identical; the four empirical frequencies
    must agree with it within the statistical band.  The report also carries
    the two-step path through the extravalent start replica (a certainty
    link followed by the direct transition), which coincides with the direct
    value exactly because the first link has probability one.
    """
    n, fld = sys.n_outcomes, sys.field
    u = start if start is not None else random_unit_vector(n, fld, child_rng(seed, 0))
    v = end if end is not None else random_unit_vector(n, fld, child_rng(seed, 1))
    c_u = basis_containing(u, child_rng(seed, 2), label="Cu")
    c_x = basis_containing(u, child_rng(seed, 3), label="Cx")
    c_v = basis_containing(v, child_rng(seed, 4), label="Cv")
    c_w = basis_containing(v, child_rng(seed, 5), label="Cw")

    starts = [modality(c_u, 0), modality(c_u, 0), modality(c_x, 0), modality(c_x, 0)]
    targets = [c_v, c_w, c_v, c_w]
    exact = tuple(
        float(transition_probabilities(m.projector, t)[0]) for m, t in zip(starts, targets)
    )
    emp = tuple(
        float(measure_many(m, t, trials, child_rng(seed, 10 + k))[0]) / trials
        for k, (m, t) in enumerate(zip(starts, targets))
    )
    born = exact[0]
    two_step = float(transition_probabilities(modality(c_x, 0).projector, c_u)[0]) * born

    sig = tol.statistical_sigmas
    band = sig * _stderr(born, trials)
    pairwise = all(
        abs(emp[a] - emp[b]) <= sig * np.sqrt(2.0) * _stderr(born, trials) + 1e-12
        for a in range(4)
        for b in range(a + 1, 4)
    )
    match = all(abs(e - born) <= band + 1e-12 for e in emp)
    return Theorem2Report(exact, emp, born, two_step, trials, pairwise, match)


@dataclass(frozen=True)
class RoundTripReport:
    return_frequency: float
    exact_return_probability: float
    trials: int
    non_deterministic: bool
    within_sigma: bool

    @property
    def passed(self) -> bool:
        return self.non_deterministic and self.within_sigma

    def to_json(self) -> dict:
        return {
            "return_frequency": self.return_frequency,
            "exact_return_probability": self.exact_return_probability,
            "trials": self.trials,
            "non_deterministic": self.non_deterministic,
            "within_sigma": self.within_sigma,
            "passed": self.passed,
        }


def refinement_contradiction_demo(
    sys: QuantumSystem,
    cu: OrthonormalBasis,
    cv: OrthonormalBasis,
    trials: int,
    seed: int,
    start_index: int = 0,
    tol: Tolerances = DEFAULT,
) -> RoundTripReport:
    """Round trips cu -> cv -> cu from one starting outcome.

    Requires ``cv`` to carry no outcome extravalent with the start (the trip
    would be deterministic).  Asserts the return is genuinely random: the
    empirical return frequency stays below 1 by more than the statistical
    band, and matches the exact two-step value sum_j t_{0j} t_{j0}.
    """
    m0 = modality(cu, start_index)
    row = transition_probabilities(m0.projector, cv)
    if any(q.close_to(m0.projector, tol.derived) for q in cv.projectors()):
        raise PreconditionUnmet("target context contains the starting class")
    if np.sum(row > tol.derived) < 2:
        raise PreconditionUnmet("starting outcome connects to fewer than 2 target outcomes")

    back = np.array(
        [transition_probabilities(q, cu)[start_index] for q in cv.projectors()]
    )
    exact_return = float(row @ back)

    rng_mid = child_rng(seed, 0)
    mid_counts = measure_many(m0, cv, trials, rng_mid)
    returns = 0
    for j, cnt in enumerate(mid_counts):
        if cnt == 0:
            continue
        counts_back = measure_many(modality(cv, j), cu, int(cnt), child_rng(seed, 1 + j))
        returns += int(counts_back[start_index])
    freq = returns / trials

    sig = tol.statistical_sigmas
    band = sig * _stderr(exact_return, trials)
    non_det = freq < 1.0 - band
    within = abs(freq - exact_return) <= band + 1e-12
    return RoundTripReport(freq, exact_return, trials, bool(non_det), bool(within))
