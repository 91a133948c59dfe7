"""Numerical harness for contextual measurement statistics on finite spaces.

Subpackages cover field-generic linear algebra (:mod:`gleason_csm.hilbert`),
frame functions and density-matrix reconstruction (:mod:`gleason_csm.frame`),
unit-sphere descent geometry (:mod:`gleason_csm.sphere`), the scalar identity
lemma harness (:mod:`gleason_csm.scalar`), the contextual measurement
simulator (:mod:`gleason_csm.csm`), the sectorized measurement pipeline
(:mod:`gleason_csm.pipeline`) and the `gleason-csm` CLI.
"""

from .tolerances import DEFAULT, Tolerances
from .hilbert import (
    Field,
    UnitVector,
    OrthonormalBasis,
    Projector,
    DensityMatrix,
    UnitaryMatrix,
    born_probability,
    transition_probabilities,
    transition_matrix,
    gram_schmidt,
    random_basis,
    basis_containing,
    random_unitary,
    random_density_matrix,
    unitary_path_to_permutation,
)

__version__ = "0.1.0"
