"""Descent geometry on the unit sphere of R^3.

A "descent" through a vector u (relative to a pole p) is the great circle
through u that cuts the equator at directions orthogonal to u; moving along
it can only lower the value of a frame function whose maximum sits at the
pole.  Chains of descents connect any two latitudes, which is what forces
such a function to depend on latitude alone.  This module builds descents,
decomposes frame-function values along them, centrally projects the open
northern hemisphere onto the tangent plane at the pole, constructs descent
chains between arbitrary latitudes, and verifies monotonicity along them.

All directions are identified with their antipodes: inputs with a negative
pole component are silently replaced by their negatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AtEquator,
    AtPole,
    ChainTooLong,
    DimensionMismatch,
    InvalidParams,
    MonotonicityViolation,
    NotOnDescent,
)
from .frame import FrameFunction
from .hilbert import Field, UnitVector
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "latitude",
    "tangent_frame",
    "Descent",
    "descent_through",
    "DecompositionReport",
    "basic_lemma_decomposition",
    "central_projection",
    "inverse_projection",
    "PironChain",
    "build_piron_chain",
    "MonotonicityReport",
    "verify_monotonicity",
]


def _unit3(v: UnitVector | np.ndarray) -> np.ndarray:
    a = v.components if isinstance(v, UnitVector) else np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise DimensionMismatch(f"expected a vector in R^3, got shape {a.shape}")
    n = np.linalg.norm(a)
    if abs(n - 1.0) > 1e-9:
        raise InvalidParams(f"vector norm {n} is not 1")
    return a / n


def _northern(u: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Antipodal representative with a nonnegative pole component."""
    return -u if float(u @ p) < 0 else u


def latitude(u: UnitVector | np.ndarray, p: UnitVector | np.ndarray) -> float:
    """Squared cosine of the angle between u and the pole, in [0, 1]."""
    a, b = _unit3(u), _unit3(p)
    return min(1.0, float(a @ b) ** 2)


def tangent_frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal frame (e1, e2) of the plane orthogonal to p."""
    p = _unit3(p)
    helper = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - (helper @ p) * p
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return e1, e2


@dataclass(frozen=True)
class Descent:
    """Great circle through u cutting the equator at directions orthogonal to u."""

    u: np.ndarray
    plane_normal: np.ndarray
    equator_dir: np.ndarray
    pole: np.ndarray

    def point(self, alpha: float) -> np.ndarray:
        """Point on the circle at arc angle alpha from u."""
        return math.cos(alpha) * self.u + math.sin(alpha) * self.equator_dir

    def contains(self, w: np.ndarray, tol: float = DEFAULT.descent_membership) -> bool:
        return abs(float(_unit3(w) @ self.plane_normal)) <= tol


def descent_through(
    u: UnitVector | np.ndarray,
    p: UnitVector | np.ndarray,
    tol: Tolerances = DEFAULT,
) -> Descent:
    """Descent through ``u`` relative to the pole ``p``.

    Undefined at the pole (no equator crossing direction) and degenerate on
    the equator (the circle would be the equator itself).
    """
    pu = _unit3(p)
    uu = _northern(_unit3(u), pu)
    h = latitude(uu, pu)
    if h >= 1.0 - tol.pole_equator:
        raise AtPole("descent undefined at the pole")
    if h <= tol.pole_equator:
        raise AtEquator("descent degenerate on the equator")
    e = np.cross(uu, pu)
    e = e / np.linalg.norm(e)
    n = np.cross(uu, e)
    n = n / np.linalg.norm(n)
    return Descent(u=uu, plane_normal=n, equator_dir=e, pole=pu)


@dataclass(frozen=True)
class DecompositionReport:
    f_u: float
    f_uprime: float
    f_vprime: float
    residual: float
    v: np.ndarray
    v_prime: np.ndarray
    w: np.ndarray

    def to_json(self) -> dict:
        from .serialization import vector_to_json

        return {
            "f_u": self.f_u,
            "f_uprime": self.f_uprime,
            "f_vprime": self.f_vprime,
            "residual": self.residual,
            "v": vector_to_json(self.v, Field.REAL),
            "v_prime": vector_to_json(self.v_prime, Field.REAL),
            "w": vector_to_json(self.w, Field.REAL),
        }


def basic_lemma_decomposition(
    f: FrameFunction,
    u: UnitVector | np.ndarray,
    u_prime: UnitVector | np.ndarray,
    p: UnitVector | np.ndarray,
    tol: Tolerances = DEFAULT,
) -> DecompositionReport:
    """Split f(u) into f(u') + f(v') along the descent through u.

    v is the equatorial direction of the descent (orthogonal to u in its
    plane), v' completes u' inside the same plane, and w is the common plane
    normal; {u, v, w} and {u', v', w} are then two orthonormal bases sharing
    w, so for a frame function whose pole value 1 kills the equator,
    f(u) = f(u') + f(v') up to numerical noise.  The residual of that
    identity is reported.
    """
    d = descent_through(u, p, tol)
    up = _northern(_unit3(u_prime), d.pole)
    off = abs(float(up @ d.plane_normal))
    if off > tol.descent_membership:
        raise NotOnDescent(f"u' is off the descent plane by {off:.2e}")
    up = up - (up @ d.plane_normal) * d.plane_normal
    up = up / np.linalg.norm(up)
    v = d.equator_dir
    v_prime = np.cross(d.plane_normal, up)
    v_prime = v_prime / np.linalg.norm(v_prime)
    f_u = f(d.u)
    f_up = f(up)
    f_vp = f(v_prime)
    residual = abs(f_u - f_up - f_vp)
    return DecompositionReport(f_u, f_up, f_vp, residual, v, v_prime, d.plane_normal)


# ---------------------------------------------------------------------------
# Central projection onto the tangent plane at the pole


def central_projection(
    u: UnitVector | np.ndarray,
    p: UnitVector | np.ndarray,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """Project ``u`` from the sphere's center onto the plane tangent at ``p``.

    Returns 2D coordinates in the deterministic tangent frame; the image
    radius is tan(angle(u, p)).  Latitude circles map to concentric circles
    and descents map to straight lines tangent to them.  Equatorial
    directions project to infinity and raise AT_EQUATOR.
    """
    pu = _unit3(p)
    uu = _northern(_unit3(u), pu)
    c = float(uu @ pu)
    if c * c <= tol.pole_equator:
        raise AtEquator("equatorial directions project to infinity")
    e1, e2 = tangent_frame(pu)
    return np.array([float(uu @ e1) / c, float(uu @ e2) / c])


def inverse_projection(xy: np.ndarray, p: UnitVector | np.ndarray) -> np.ndarray:
    """Unit vector in the open northern hemisphere mapping to planar point xy."""
    pu = _unit3(p)
    e1, e2 = tangent_frame(pu)
    v = pu + xy[0] * e1 + xy[1] * e2
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# Descent chains


@dataclass(frozen=True)
class PironChain:
    """Sequence w_0 .. w_N with each w_n on the descent through w_{n-1}."""

    vectors: tuple[np.ndarray, ...]
    pole: np.ndarray

    @property
    def length(self) -> int:
        """Number of steps (vectors minus one)."""
        return len(self.vectors) - 1

    def latitudes(self) -> list[float]:
        return [latitude(w, self.pole) for w in self.vectors]

    def validate(self, tol: Tolerances = DEFAULT) -> None:
        hs = self.latitudes()
        for n in range(1, len(self.vectors)):
            d = descent_through(self.vectors[n - 1], self.pole, tol)
            if not d.contains(self.vectors[n], tol.descent_membership):
                raise NotOnDescent(f"chain vector {n} is off the previous descent")
            if not hs[n] < hs[n - 1] - tol.derived:
                raise InvalidParams(f"latitude not strictly decreasing at step {n}")


def _polar(xy: np.ndarray) -> tuple[float, float]:
    return float(np.hypot(xy[0], xy[1])), float(np.arctan2(xy[1], xy[0]))


def _wrap_pi(a: float) -> float:
    return (a + np.pi) % (2 * np.pi) - np.pi


def build_piron_chain(
    u: UnitVector | np.ndarray,
    v: UnitVector | np.ndarray,
    p: UnitVector | np.ndarray,
    max_len: int,
    tol: Tolerances = DEFAULT,
) -> PironChain:
    """Chain of descents from ``u`` down to ``v`` (latitude of u above v's).

    Works in the centrally projected plane, where a descent is the tangent
    line to the latitude circle at the current point: a move that rotates
    the azimuth by delta multiplies the radius by 1/cos(delta).  The walk
    rotates toward the target azimuth in equal steps sized as large as
    possible while the accumulated radius growth spends at most half the
    log-radius gap (a per-step maximal rotation would saturate the radius
    before the azimuth aligns), then closes with a two-step same-longitude
    maneuver out to an intermediate azimuth and back.  The antipodal
    representative of v with the nearer azimuth is targeted, so the final
    vector may be -v.

    Raises CHAIN_TOO_LONG (with the required step count) when ``max_len``
    is insufficient; the requirement diverges as the latitude gap shrinks.
    """
    pu = _unit3(p)
    uu = _northern(_unit3(u), pu)
    vv = _northern(_unit3(v), pu)
    hu, hv = latitude(uu, pu), latitude(vv, pu)
    if hu >= 1.0 - tol.pole_equator:
        raise AtPole("descent chains cannot start at the pole")
    if hv <= tol.pole_equator:
        raise AtEquator("target on the equator is unreachable by descents")
    if hu - hv < tol.min_latitude_gap:
        raise InvalidParams(
            f"latitude gap {hu - hv:.2e} below {tol.min_latitude_gap}; chain length diverges"
        )

    r_u, phi_u = _polar(central_projection(uu, pu, tol))
    r_v, phi_v = _polar(central_projection(vv, pu, tol))

    # Target v or -v, whichever sits at the nearer azimuth.
    delta = _wrap_pi(phi_v - phi_u)
    if abs(delta) > np.pi / 2 + 1e-15:
        delta = _wrap_pi(delta + np.pi)
    # v already on the descent through u: single step.
    if abs(r_v * math.cos(delta) - r_u) <= 1e-12 * max(1.0, r_v):
        if max_len < 1:
            raise ChainTooLong("need 1 step", required_steps=1)
        chain = PironChain((uu, vv), pu)
        chain.validate(tol)
        return chain

    log_gap = math.log(r_v / r_u)
    budget = 0.5 * log_gap  # log-radius available to the rotation phase

    n_rot = 0
    if abs(delta) > 1e-12:
        n_rot = max(1, math.ceil(delta * delta / (2.0 * budget)))
        while n_rot * -math.log(math.cos(abs(delta) / n_rot)) > budget:
            n_rot += 1

    required = n_rot + 2
    if required > max_len:
        raise ChainTooLong(
            f"need {required} steps but max_len={max_len}", required_steps=required
        )

    points = [(r_u, phi_u)]
    r, phi = r_u, phi_u
    if n_rot:
        step = delta / n_rot
        for _ in range(n_rot):
            r = r / math.cos(step)
            phi = phi + step
            points.append((r, phi))
    # Same-longitude closing maneuver: out by psi and back.
    psi = math.acos(math.sqrt(r / r_v))
    if psi > 1e-12:
        points.append((r / math.cos(psi), phi + psi))
    points.append((r_v, phi))

    vecs = [uu]
    for rr, pp_ang in points[1:]:
        xy = np.array([rr * math.cos(pp_ang), rr * math.sin(pp_ang)])
        vecs.append(inverse_projection(xy, pu))
    chain = PironChain(tuple(vecs), pu)
    chain.validate(tol)
    if min(np.linalg.norm(vecs[-1] - vv), np.linalg.norm(vecs[-1] + vv)) > 1e-8:
        raise InvalidParams("chain endpoint failed to land on the target direction")
    return chain


@dataclass(frozen=True)
class MonotonicityReport:
    values: tuple[float, ...]
    latitudes: tuple[float, ...]
    passed: bool

    def to_json(self) -> dict:
        return {
            "values": list(self.values),
            "latitudes": list(self.latitudes),
            "passed": self.passed,
        }


def verify_monotonicity(
    f: FrameFunction,
    chain: PironChain,
    tol: Tolerances = DEFAULT,
) -> MonotonicityReport:
    """Check that ``f`` never increases along the chain.

    Requires f(w_{n-1}) >= f(w_n) - tolerance at every step; a violation
    raises MONOTONICITY_VIOLATION carrying the offending step, which signals
    that ``f`` is not a frame function with its maximum at the pole.
    """
    vals = [f(w) for w in chain.vectors]
    for n in range(1, len(vals)):
        if vals[n - 1] < vals[n] - tol.monotonicity:
            raise MonotonicityViolation(
                f"f increased from {vals[n - 1]} to {vals[n]} at step {n}",
                step=n,
                values=vals,
            )
    if vals[0] < vals[-1] - tol.monotonicity:
        raise MonotonicityViolation("f(u) < f(v) overall", step=len(vals) - 1, values=vals)
    return MonotonicityReport(tuple(vals), tuple(chain.latitudes()), True)
