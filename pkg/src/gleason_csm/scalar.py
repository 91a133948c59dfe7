"""Finite-grid harness for the scalar identity lemma.

A candidate is a function g on the rational grid {k/Q : k = 0..Q} (minus an
optional excluded set) with values in [0, 1].  The lemma: if g(0) = 0, g is
strictly increasing, and g(a) + g(b) + g(c) = 1 whenever a + b + c = 1, then
g is the identity.  The harness checks the three hypotheses exhaustively on
the grid, executes the derivation chain (complement rule, additivity over
grid multiples) link by link, and measures the deviation from the identity.
Grid points are exact integer pairs (k, Q); only the g values are floats, so
the constraint arithmetic is exact.

Any triple touching an excluded point is skipped, in the hypotheses as well
as in the derivation chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping

from .errors import HypothesesNotMet, InvalidParams, OffGrid
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ScalarCandidate",
    "HypothesisResult",
    "LemmaReport",
    "check_hypotheses",
    "derive_additivity",
    "verify_identity",
]


@dataclass(frozen=True)
class ScalarCandidate:
    """g sampled on the grid k/Q with an excluded index set."""

    grid_denominator: int
    values: Mapping[int, float]
    excluded: frozenset[int] = frozenset()

    def __post_init__(self):
        q = self.grid_denominator
        if q < 3:
            raise InvalidParams("grid denominator must be >= 3")
        object.__setattr__(self, "excluded", frozenset(int(k) for k in self.excluded))
        vals = {int(k): float(v) for k, v in self.values.items()}
        object.__setattr__(self, "values", vals)
        for k in self.domain():
            if k not in vals:
                raise InvalidParams(f"missing value at grid point {k}/{q}")
            if not -1e-12 <= vals[k] <= 1.0 + 1e-12:
                raise InvalidParams(f"g({k}/{q}) = {vals[k]} outside [0, 1]")

    def domain(self) -> list[int]:
        return [k for k in range(self.grid_denominator + 1) if k not in self.excluded]

    def g(self, k: int) -> float:
        if k in self.excluded or not 0 <= k <= self.grid_denominator:
            raise OffGrid(f"grid point {k}/{self.grid_denominator} unavailable")
        return self.values[k]

    def index_of(self, a: Fraction) -> int:
        """Grid index of an exact rational, or OFF_GRID."""
        scaled = a * self.grid_denominator
        if scaled.denominator != 1 or not 0 <= scaled.numerator <= self.grid_denominator:
            raise OffGrid(f"{a} is not a grid point of denominator {self.grid_denominator}")
        return int(scaled.numerator)


@dataclass(frozen=True)
class HypothesisResult:
    name: str
    passed: bool
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class LemmaReport:
    hypotheses: dict[str, HypothesisResult]
    identity_deviation: float | None
    verdict: str
    derivation_log: tuple[dict, ...] = ()

    @property
    def hypotheses_pass(self) -> bool:
        return all(h.passed for h in self.hypotheses.values())

    def to_json(self) -> dict:
        return {
            "hypotheses": {k: v.to_json() for k, v in self.hypotheses.items()},
            "identity_deviation": self.identity_deviation,
            "verdict": self.verdict,
            "derivation_log": list(self.derivation_log),
        }


def _frac(k: int, q: int) -> str:
    return f"{k}/{q}"


def check_hypotheses(c: ScalarCandidate, tol: Tolerances = DEFAULT) -> LemmaReport:
    """Exhaustive hypothesis check on the grid.

    H1: g(0) = 0.  H2: strict monotonicity over all ordered non-excluded
    pairs.  H3: g(a) + g(b) + g(c) = 1 for every non-excluded grid triple
    with a + b + c = 1.  The first violating witness is recorded per
    hypothesis.
    """
    q = c.grid_denominator
    dom = c.domain()

    if 0 in c.excluded:
        h1 = HypothesisResult("H1_g0", True, {"note": "0 excluded, vacuous"})
    else:
        v0 = c.g(0)
        h1 = HypothesisResult(
            "H1_g0", abs(v0) <= tol.scalar_origin, None if abs(v0) <= tol.scalar_origin else {"g0": v0}
        )

    h2_witness = None
    for i in range(len(dom) - 1):
        a, b = dom[i], dom[i + 1]
        if not c.g(a) < c.g(b):
            h2_witness = {"a": _frac(a, q), "b": _frac(b, q), "ga": c.g(a), "gb": c.g(b)}
            break
    h2 = HypothesisResult("H2_monotone", h2_witness is None, h2_witness)

    h3_witness = None
    for ka in range(q + 1):
        if ka in c.excluded:
            continue
        for kb in range(ka, q + 1 - ka):
            kc = q - ka - kb
            if kc < kb:
                break
            if kb in c.excluded or kc in c.excluded:
                continue
            s = c.g(ka) + c.g(kb) + c.g(kc)
            if abs(s - 1.0) > tol.scalar_sum:
                h3_witness = {
                    "a": _frac(ka, q),
                    "b": _frac(kb, q),
                    "c": _frac(kc, q),
                    "sum": s,
                }
                break
        if h3_witness:
            break
    h3 = HypothesisResult("H3_triple_sum", h3_witness is None, h3_witness)

    hyps = {"H1_g0": h1, "H2_monotone": h2, "H3_triple_sum": h3}
    verdict = "HYPOTHESES_OK" if all(h.passed for h in hyps.values()) else "HYPOTHESES_FAILED"
    return LemmaReport(hypotheses=hyps, identity_deviation=None, verdict=verdict)


def derive_additivity(
    c: ScalarCandidate,
    a0: Fraction,
    r: Fraction | int,
    s: Fraction | int,
    tol: Tolerances = DEFAULT,
) -> dict:
    """Compare g(r a0) + g(s a0) against g((r+s) a0).

    All of r*a0, s*a0, (r+s)*a0 and 1 - (r+s)*a0 must be representable,
    non-excluded grid points (the comparison follows from two triple-sum
    instances sharing the complement term).  Returns lhs, rhs and their
    absolute deviation.
    """
    r, s = Fraction(r), Fraction(s)
    ra = c.index_of(r * a0)
    sa = c.index_of(s * a0)
    rsa = c.index_of((r + s) * a0)
    comp = c.index_of(1 - (r + s) * a0)
    for k in (ra, sa, rsa, comp, 0):
        if k in c.excluded:
            raise OffGrid(f"grid point {k}/{c.grid_denominator} is excluded")
    lhs = c.g(ra) + c.g(sa)
    rhs = c.g(rsa)
    return {"lhs": lhs, "rhs": rhs, "deviation": abs(lhs - rhs)}


def verify_identity(c: ScalarCandidate, tol: Tolerances = DEFAULT) -> LemmaReport:
    """Full lemma verdict: hypotheses, derivation chain, identity deviation.

    Raises HYPOTHESES_NOT_MET (carrying the hypothesis report) when H1-H3
    fail.  Otherwise executes the derivation explicitly on the grid: the
    complement rule g(a) + g(1-a) = 1 (triple sum with b = 0) at every
    available point, then additivity g(k/Q) = g((k-1)/Q) + g(1/Q) along grid
    multiples, logging each link's deviation.  The verdict is IDENTITY when
    max |g(a) - a| over the non-excluded grid stays within tolerance.
    """
    report = check_hypotheses(c, tol)
    if not report.hypotheses_pass:
        raise HypothesesNotMet("hypotheses H1-H3 do not all hold", report=report)

    q = c.grid_denominator
    log: list[dict] = []
    if 0 not in c.excluded:
        for k in c.domain():
            if (q - k) in c.excluded:
                continue
            dev = abs(c.g(k) + c.g(q - k) - 1.0)
            log.append({"relation": f"g({_frac(k, q)}) + g({_frac(q - k, q)}) = 1", "deviation": dev})
    if 1 not in c.excluded and 0 not in c.excluded:
        base = c.g(1)
        for k in range(2, q + 1):
            if k in c.excluded or (k - 1) in c.excluded or (q - k) in c.excluded:
                continue
            dev = abs(c.g(k) - c.g(k - 1) - base)
            log.append(
                {
                    "relation": f"g({_frac(k, q)}) = g({_frac(k - 1, q)}) + g({_frac(1, q)})",
                    "deviation": dev,
                }
            )
        if q not in c.excluded:
            log.append({"relation": "g(1) = 1", "deviation": abs(c.g(q) - 1.0)})

    deviation = max(abs(c.g(k) - k / q) for k in c.domain())
    verdict = "IDENTITY" if deviation <= tol.identity_deviation else "NOT_IDENTITY"
    return LemmaReport(
        hypotheses=report.hypotheses,
        identity_deviation=deviation,
        verdict=verdict,
        derivation_log=tuple(log),
    )
