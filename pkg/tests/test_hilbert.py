import numpy as np
import pytest
import scipy.stats

from gleason_csm.errors import DegenerateInput, DimensionMismatch, InvalidParams
from gleason_csm.hilbert import (
    DensityMatrix,
    Field,
    OrthonormalBasis,
    Projector,
    UnitVector,
    UnitaryMatrix,
    basis_containing,
    born_probability,
    density_from_spectrum,
    gram_schmidt,
    haar_matrices,
    permutation_matrix,
    random_basis,
    random_density_matrix,
    random_unit_vector,
    transition_matrix,
    unitary_path_to_permutation,
)


def test_unit_vector_requires_normalization():
    with pytest.raises(InvalidParams):
        UnitVector(np.array([1.0, 1.0]), Field.REAL)
    v = UnitVector.normalized([1.0, 1.0])
    assert v.dim == 2
    assert abs(np.linalg.norm(v.components) - 1.0) < 1e-12


def test_unit_vector_same_direction_up_to_phase():
    v = random_unit_vector(3, Field.COMPLEX, 1)
    w = UnitVector(v.components * np.exp(1j * 0.7), Field.COMPLEX)
    assert v.same_direction(w)
    other = random_unit_vector(3, Field.COMPLEX, 2)
    assert not v.same_direction(other)


class TestGramSchmidt:
    def test_standard_basis_unchanged(self):
        vs = [np.eye(3)[i] for i in range(3)]
        b = gram_schmidt(vs, Field.REAL)
        assert np.allclose(b.matrix, np.eye(3))

    def test_first_vector_parallel_to_input(self):
        vs = [np.array([1.0, 1.0, 0.0]) / np.sqrt(2), np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])]
        b = gram_schmidt(vs, Field.REAL)
        first = b.vectors[0].components
        assert abs(abs(first @ vs[0]) - 1.0) < 1e-12
        gram = b.matrix.T @ b.matrix
        assert np.max(np.abs(gram - np.eye(3))) < 1e-10

    def test_rank_deficient_rejected(self):
        vs = [np.array([1.0, 0.0]), np.array([2.0, 0.0])]
        with pytest.raises(DegenerateInput):
            gram_schmidt(vs, Field.REAL)


class TestRandomBasis:
    def test_deterministic_per_seed(self):
        a = random_basis(3, Field.COMPLEX, 42)
        b = random_basis(3, Field.COMPLEX, 42)
        assert np.array_equal(a.matrix, b.matrix)

    def test_invariants_real(self):
        b = random_basis(3, Field.REAL, 7)
        gram = b.matrix.T @ b.matrix
        assert np.max(np.abs(gram - np.eye(3))) < 1e-10

    def test_first_component_marginal_mean(self):
        # Uniform directions in C^3: E|u_1|^2 = 1/3 (brute-force Monte Carlo).
        mats = haar_matrices(10_000, 3, Field.COMPLEX, 123)
        samples = np.abs(mats[:, 0, 0]) ** 2
        se = samples.std(ddof=1) / np.sqrt(len(samples))
        assert abs(samples.mean() - 1.0 / 3.0) < 3 * se

    def test_real_orthogonal_determinants_pm1(self):
        mats = haar_matrices(500, 3, Field.REAL, 99)
        dets = np.linalg.det(mats)
        assert np.all(np.minimum(np.abs(dets - 1.0), np.abs(dets + 1.0)) < 1e-10)
        assert np.any(dets > 0) and np.any(dets < 0)

    def test_haar_invariance_ks(self):
        # First column of V @ U distributed like that of U for fixed V.
        n = 10_000
        u1 = haar_matrices(n, 3, Field.COMPLEX, 11)
        u2 = haar_matrices(n, 3, Field.COMPLEX, 12)
        v = haar_matrices(1, 3, Field.COMPLEX, 13)[0]
        rotated = np.einsum("ij,njk->nik", v, u2)
        stat = scipy.stats.ks_2samp(np.abs(u1[:, 0, 0]) ** 2, np.abs(rotated[:, 0, 0]) ** 2)
        assert stat.pvalue > 0.01


class TestBasisContaining:
    def test_standard_vector(self):
        v = UnitVector(np.eye(3)[0], Field.REAL)
        b = basis_containing(v, 5)
        assert np.array_equal(b.vectors[0].components, v.components)

    def test_invariants_and_overlap(self):
        v = random_unit_vector(4, Field.COMPLEX, 3)
        b = basis_containing(v, 8)
        assert abs(abs(v.inner(b.vectors[0])) - 1.0) < 1e-10
        gram = b.matrix.conj().T @ b.matrix
        assert np.max(np.abs(gram - np.eye(4))) < 1e-10

    def test_seeds_share_first_vector_only(self):
        v = random_unit_vector(3, Field.COMPLEX, 4)
        b1 = basis_containing(v, 10)
        b2 = basis_containing(v, 11)
        assert np.array_equal(b1.vectors[0].components, b2.vectors[0].components)
        assert not np.allclose(b1.vectors[1].components, b2.vectors[1].components)


class TestUnitaryPath:
    def test_identity_permutation_constant(self):
        path = unitary_path_to_permutation([0, 1, 2], 5)
        for u in path:
            assert np.max(np.abs(u.matrix - np.eye(3))) < 1e-10

    def test_swap_dim2(self):
        path = unitary_path_to_permutation([1, 0], 100)
        assert np.max(np.abs(path[0].matrix - np.eye(2))) < 1e-10
        assert np.max(np.abs(path[-1].matrix - np.array([[0, 1], [1, 0]]))) < 1e-10
        det = np.linalg.det(path[-1].matrix)
        assert abs(det - (-1.0)) < 1e-10
        # Only the endpoints are real; the path exists because it leaves R.
        for u in path[1:-1]:
            assert np.max(np.abs(u.matrix.imag)) > 1e-6
        eye = np.eye(2)
        for u in path:
            assert np.max(np.abs(u.matrix.conj().T @ u.matrix - eye)) < 1e-10

    def test_three_cycle_dim3(self):
        path = unitary_path_to_permutation([1, 2, 0], 50)
        det = np.linalg.det(path[-1].matrix)
        assert abs(det - 1.0) < 1e-10
        eye = np.eye(3)
        for u in path:
            assert np.max(np.abs(u.matrix.conj().T @ u.matrix - eye)) < 1e-10

    def test_consecutive_step_norm_bound(self):
        for steps in (2, 3, 10, 100):
            path = unitary_path_to_permutation([1, 0, 2], steps)
            for a, b in zip(path, path[1:]):
                assert np.linalg.norm(b.matrix - a.matrix, 2) < 2 * np.pi / steps

    def test_endpoint_matches_permutation_matrix(self):
        perm = [2, 0, 3, 1]
        path = unitary_path_to_permutation(perm, 9)
        assert np.max(np.abs(path[-1].matrix - permutation_matrix(perm))) < 1e-10


class TestBornProbability:
    def test_identical_state(self):
        v = random_unit_vector(3, Field.COMPLEX, 6)
        assert born_probability(v.projector(), DensityMatrix.pure(v)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_states(self):
        e1 = UnitVector(np.eye(3)[0], Field.REAL)
        e2 = UnitVector(np.eye(3)[1], Field.REAL)
        assert born_probability(e1.projector(), DensityMatrix.pure(e2)) == 0.0

    def test_sixty_degrees_quarter(self):
        # Direction at 60 degrees from the pole: probability cos^2(60) = 1/4.
        pole = UnitVector(np.array([0.0, 0.0, 1.0]), Field.REAL)
        x = UnitVector(np.array([np.sin(np.pi / 3), 0.0, np.cos(np.pi / 3)]), Field.REAL)
        p = born_probability(pole.projector(), DensityMatrix.pure(x))
        assert p == pytest.approx(0.25, abs=1e-12)

    def test_dimension_mismatch(self):
        v2 = random_unit_vector(2, Field.COMPLEX, 1)
        rho3 = random_density_matrix(3, Field.COMPLEX, 2)
        with pytest.raises(DimensionMismatch):
            born_probability(v2.projector(), rho3)

    def test_frame_condition_over_random_bases(self):
        for seed in range(5):
            rho = random_density_matrix(4, Field.COMPLEX, seed, rank=1)
            b = random_basis(4, Field.COMPLEX, seed + 100)
            total = sum(born_probability(p, rho) for p in b.projectors())
            assert abs(total - 1.0) < 1e-10

    def test_unitary_invariance(self):
        rho = random_density_matrix(3, Field.COMPLEX, 21)
        v = random_unit_vector(3, Field.COMPLEX, 22)
        u = haar_matrices(1, 3, Field.COMPLEX, 23)[0]
        p1 = born_probability(v.projector(), rho)
        rho2 = DensityMatrix(u @ rho.matrix @ u.conj().T, Field.COMPLEX)
        w = UnitVector.normalized(u @ v.components, Field.COMPLEX)
        p2 = born_probability(w.projector(), rho2)
        assert abs(p1 - p2) < 1e-10


def test_transition_matrix_doubly_stochastic():
    a = random_basis(4, Field.COMPLEX, 31)
    b = random_basis(4, Field.COMPLEX, 32)
    t = transition_matrix(a, b)
    assert np.max(np.abs(t.sum(axis=1) - 1.0)) < 1e-10
    assert np.max(np.abs(t.sum(axis=0) - 1.0)) < 1e-10


def test_density_from_spectrum_eigenvalues():
    basis = random_basis(3, Field.COMPLEX, 41)
    rho = density_from_spectrum([0.6, 0.3, 0.1], basis)
    assert np.allclose(np.sort(rho.eigenvalues()), [0.1, 0.3, 0.6], atol=1e-12)


def test_projector_validation():
    with pytest.raises(InvalidParams):
        Projector(np.array([[0.5, 0.0], [0.0, 0.0]]), rank=1, field=Field.REAL)
    v = random_unit_vector(2, Field.REAL, 3)
    p = v.projector()
    assert p.rank == 1
    assert abs(np.trace(p.matrix) - 1.0) < 1e-10


def test_density_matrix_validation():
    with pytest.raises(InvalidParams):
        DensityMatrix(np.array([[1.5, 0.0], [0.0, -0.5]]), Field.REAL)
    mm = DensityMatrix.maximally_mixed(3)
    assert abs(np.trace(mm.matrix).real - 1.0) < 1e-12


def test_unitary_matrix_validation():
    with pytest.raises(InvalidParams):
        UnitaryMatrix(np.array([[1.0, 0.0], [0.0, 2.0]]), Field.REAL)
    u = UnitaryMatrix.permutation([1, 0])
    assert np.array_equal(u.matrix, np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_basis_requires_orthogonality():
    v = UnitVector(np.array([1.0, 0.0]), Field.REAL)
    w = UnitVector.normalized([1.0, 1e-3])
    with pytest.raises(InvalidParams):
        OrthonormalBasis((v, w))
