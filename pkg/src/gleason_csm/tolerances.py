"""Central tolerance configuration.

Every numerical check in the library reads its threshold from a single
:class:`Tolerances` record so reproducibility has one knob.  The three broad
classes are structural identities (a couple of float operations, 1e-12),
derived identities (short chains of operations, 1e-10), and statistical
acceptance bands (multiples of the standard error).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-12
    derived: float = 1e-10
    statistical_sigmas: float = 3.0
    # Frame functions.
    frame_condition: float = 1e-8
    regularity_residual: float = 1e-6
    tabulated_lookup: float = 1e-3
    evaluation_range: float = 1e-10
    # Sphere geometry.
    descent_membership: float = 1e-8
    monotonicity: float = 1e-8
    min_latitude_gap: float = 1e-6
    pole_equator: float = 1e-12
    # Scalar lemma.
    scalar_sum: float = 1e-10
    scalar_origin: float = 1e-12
    identity_deviation: float = 1e-9
    # Rank-deficiency guard for orthonormalization.
    min_singular_value: float = 1e-8


DEFAULT = Tolerances()
