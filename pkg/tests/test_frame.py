import numpy as np
import pytest

from gleason_csm.errors import (
    EvaluationRange,
    InsufficientSamples,
    InvalidParams,
    NoStoredDirection,
)
from gleason_csm.frame import (
    FrameFunction,
    FrameKind,
    GeneralFrameParams,
    Verdict,
    check_frame_condition,
    eval_general_form,
    extreme_values,
    general_form_function,
    latitude_band_bounds,
    reconstruct_rho,
)
from gleason_csm.hilbert import (
    DensityMatrix,
    Field,
    UnitVector,
    density_from_spectrum,
    random_basis,
    random_density_matrix,
    random_unit_vector,
)

POLE = UnitVector(np.array([0.0, 0.0, 1.0]), Field.REAL)


def cos2_fn(p: np.ndarray) -> FrameFunction:
    return FrameFunction.closed_form(
        3, Field.REAL, lambda x: float(x @ p) ** 2, batch_fn=lambda xs: (xs @ p) ** 2
    )


class TestFrameFunction:
    def test_born_phase_invariance(self):
        rho = random_density_matrix(3, Field.COMPLEX, 5)
        f = FrameFunction.born(rho)
        v = random_unit_vector(3, Field.COMPLEX, 6)
        assert abs(f(v) - f(v.components * np.exp(1j * 1.3))) < 1e-10

    def test_range_enforced(self):
        f = FrameFunction.closed_form(3, Field.REAL, lambda x: 1.5)
        with pytest.raises(EvaluationRange):
            f(np.eye(3)[0])

    def test_tabulated_nearest_lookup_and_miss(self):
        entries = [(np.eye(3)[i], [0.2, 0.3, 0.5][i]) for i in range(3)]
        f = FrameFunction.tabulated(3, Field.REAL, entries)
        assert f(np.eye(3)[1]) == 0.3
        # Antipode maps to the same projector.
        assert f(-np.eye(3)[1]) == 0.3
        with pytest.raises(NoStoredDirection):
            f(UnitVector.normalized([1.0, 1.0, 1.0]))


class TestCheckFrameCondition:
    def test_born_passes(self):
        rho = random_density_matrix(3, Field.COMPLEX, 9)
        rep = check_frame_condition(FrameFunction.born(rho), 1000, 2)
        assert rep.max_deviation < 1e-10
        assert rep.n_bases == 1000

    def test_quartic_fails_with_witness(self):
        f = FrameFunction.closed_form(
            3, Field.COMPLEX, lambda x: abs(x[0]) ** 4, batch_fn=lambda xs: np.abs(xs[:, 0]) ** 4
        )
        rep = check_frame_condition(f, 1000, 3)
        assert rep.max_deviation > 0.1
        vals = f.evaluate_many(rep.worst_basis.matrix.T)
        assert abs(vals.sum() - 1.0) == pytest.approx(rep.max_deviation, abs=1e-12)

    def test_constant_passes(self):
        f = FrameFunction.closed_form(
            3, Field.REAL, lambda x: 1.0 / 3.0, batch_fn=lambda xs: np.full(len(xs), 1.0 / 3.0)
        )
        rep = check_frame_condition(f, 200, 4)
        assert rep.max_deviation < 1e-12

    def test_deterministic_per_seed(self):
        rho = random_density_matrix(3, Field.COMPLEX, 10)
        f = FrameFunction.born(rho)
        a = check_frame_condition(f, 50, 7)
        b = check_frame_condition(f, 50, 7)
        assert a.max_deviation == b.max_deviation


class TestReconstructRho:
    def test_born_round_trip(self):
        rho0 = random_density_matrix(3, Field.COMPLEX, 11)
        rep = reconstruct_rho(FrameFunction.born(rho0), 200, 5)
        assert rep.verdict is Verdict.REGULAR
        assert np.max(np.abs(rep.fitted_rho.matrix - rho0.matrix)) < 1e-8

    @pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("field", [Field.REAL, Field.COMPLEX])
    def test_round_trip_all_dims(self, dim, field):
        for seed in range(3):
            rank = 1 if seed == 0 else None
            rho0 = random_density_matrix(dim, field, seed + 50, rank=rank)
            rep = reconstruct_rho(FrameFunction.born(rho0), max(200, 4 * dim * dim), seed)
            assert rep.verdict is Verdict.REGULAR
            assert np.max(np.abs(rep.fitted_rho.matrix - rho0.matrix)) < 1e-8

    def test_cos2_recovers_pole_projector(self):
        f = cos2_fn(POLE.components)
        rep = reconstruct_rho(f, 200, 6)
        assert rep.verdict is Verdict.REGULAR
        assert np.max(np.abs(rep.fitted_rho.matrix - DensityMatrix.pure(POLE).matrix)) < 1e-8
        assert np.max(rep.fitted_rho.eigenvalues()) >= 1.0 - 1e-6

    def test_cos4_not_a_quadratic_form(self):
        f = FrameFunction.closed_form(
            3,
            Field.REAL,
            lambda x: float(x @ POLE.components) ** 4,
            batch_fn=lambda xs: (xs @ POLE.components) ** 4,
        )
        rep = reconstruct_rho(f, 300, 7)
        assert rep.verdict in (Verdict.VIOLATES_FRAME, Verdict.NOT_REGULAR)
        assert rep.max_residual > 1e-3

    def test_insufficient_samples(self):
        rho = random_density_matrix(3, Field.COMPLEX, 12)
        with pytest.raises(InsufficientSamples):
            reconstruct_rho(FrameFunction.born(rho), 8, 1)

    def test_idempotent_regularization(self):
        rho0 = random_density_matrix(4, Field.COMPLEX, 13)
        rep1 = reconstruct_rho(FrameFunction.born(rho0), 200, 8)
        rep2 = reconstruct_rho(FrameFunction.born(rep1.fitted_rho), 200, 9)
        assert np.max(np.abs(rep2.fitted_rho.matrix - rho0.matrix)) < 1e-8


class TestGeneralForm:
    def test_invalid_params(self):
        b = random_basis(3, Field.REAL, 14)
        with pytest.raises(InvalidParams):
            GeneralFrameParams(0.7, 0.8, b)  # m > M
        with pytest.raises(InvalidParams):
            GeneralFrameParams(0.9, 0.4, b)  # M + m > 1

    def test_pure_pole(self):
        b = random_basis(3, Field.REAL, 15)
        params = GeneralFrameParams(1.0, 0.0, b)
        assert eval_general_form(params, b.vectors[0]) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed_constant(self):
        b = random_basis(3, Field.REAL, 16)
        params = GeneralFrameParams(1.0 / 3.0, 1.0 / 3.0, b)
        for seed in range(5):
            u = random_unit_vector(3, Field.REAL, seed)
            assert eval_general_form(params, u) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_weights_at_eigenvectors_and_reconstruction(self):
        b = random_basis(3, Field.REAL, 17)
        params = GeneralFrameParams(0.6, 0.1, b)
        assert eval_general_form(params, b.vectors[1]) == pytest.approx(0.1, abs=1e-12)
        assert eval_general_form(params, b.vectors[2]) == pytest.approx(0.3, abs=1e-12)
        rep = reconstruct_rho(general_form_function(params), 200, 18)
        assert rep.verdict is Verdict.REGULAR
        assert np.allclose(np.sort(rep.fitted_rho.eigenvalues()), [0.1, 0.3, 0.6], atol=1e-8)

    def test_matches_direct_formula(self):
        b = random_basis(3, Field.REAL, 19)
        params = GeneralFrameParams(0.5, 0.2, b)
        u = random_unit_vector(3, Field.REAL, 20)
        p, q, r = (v.components for v in b.vectors)
        expected = 0.5 * float(u.components @ p) ** 2 + 0.2 * float(u.components @ q) ** 2 + 0.3 * float(u.components @ r) ** 2
        assert eval_general_form(params, u) == pytest.approx(expected, abs=1e-12)


class TestExtremeValues:
    def test_rank_one(self):
        p = random_unit_vector(3, Field.REAL, 21)
        rep = extreme_values(FrameFunction.born(DensityMatrix.pure(p)), 500, 22)
        assert rep.sup_estimate == pytest.approx(1.0, abs=1e-4)
        assert rep.inf_estimate == pytest.approx(0.0, abs=1e-4)
        assert abs(abs(float(rep.argmax.components @ p.components)) - 1.0) < 1e-3

    def test_mixed_spectrum(self):
        basis = random_basis(3, Field.COMPLEX, 23)
        rho = density_from_spectrum([0.6, 0.3, 0.1], basis)
        rep = extreme_values(FrameFunction.born(rho), 2000, 24)
        assert rep.sup_estimate == pytest.approx(0.6, abs=1e-4)
        assert rep.inf_estimate == pytest.approx(0.1, abs=1e-4)

    def test_constant(self):
        f = FrameFunction.closed_form(
            3, Field.REAL, lambda x: 1.0 / 3.0, batch_fn=lambda xs: np.full(len(xs), 1.0 / 3.0)
        )
        rep = extreme_values(f, 200, 25)
        assert rep.sup_estimate == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert rep.inf_estimate == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_requires_samples(self):
        rho = random_density_matrix(3, Field.COMPLEX, 26)
        with pytest.raises(InsufficientSamples):
            extreme_values(FrameFunction.born(rho), 50, 1)


class TestLatitudeBands:
    def test_pole_band_is_a_point(self):
        rho = random_density_matrix(3, Field.REAL, 27)
        f = FrameFunction.born(rho)
        rep = latitude_band_bounds(f, POLE, 1.0, 100, 28)
        assert rep.sup_band == pytest.approx(rep.inf_band, abs=1e-12)
        assert rep.sup_band == pytest.approx(f(POLE), abs=1e-12)

    def test_latitude_only_function_has_zero_width(self):
        f = cos2_fn(POLE.components)
        for x in (0.2, 0.5, 0.8):
            rep = latitude_band_bounds(f, POLE, x, 300, 29)
            assert rep.sup_band - rep.inf_band < 1e-10
            assert rep.sup_band == pytest.approx(x, abs=1e-10)

    def test_asymmetric_state_band_matches_eigen_oracle(self):
        # Restriction of the quadratic form to the latitude circle; the band
        # is computed independently by dense enumeration of azimuths.
        rho = density_from_spectrum([0.7, 0.2, 0.1], random_basis(3, Field.REAL, 30))
        f = FrameFunction.born(rho)
        x = 0.5
        rep = latitude_band_bounds(f, POLE, x, 4000, 31)
        from gleason_csm.sphere import tangent_frame

        e1, e2 = tangent_frame(POLE.components)
        phis = np.linspace(0, 2 * np.pi, 200_000, endpoint=False)
        circ = np.sqrt(x) * POLE.components + np.sqrt(1 - x) * (
            np.cos(phis)[:, None] * e1 + np.sin(phis)[:, None] * e2
        )
        vals = np.einsum("ni,ij,nj->n", circ, rho.matrix, circ)
        assert rep.sup_band - rep.inf_band > 0
        assert rep.sup_band == pytest.approx(vals.max(), abs=1e-4)
        assert rep.inf_band == pytest.approx(vals.min(), abs=1e-4)

    def test_squeeze_inequality_for_pole_attaining_functions(self):
        # Bands at a lower latitude cannot exceed bands at a higher one.
        for seed in range(5):
            p = random_unit_vector(3, Field.REAL, 300 + seed)
            f = FrameFunction.born(DensityMatrix.pure(p))
            xs = [0.1, 0.3, 0.5, 0.7, 0.9]
            reps = {x: latitude_band_bounds(f, p, x, 500, seed) for x in xs}
            for a in xs:
                for b in xs:
                    if a + 0.01 < b:
                        assert reps[a].sup_band <= reps[b].inf_band + 1e-6


def test_dim2_fixture_frame_valid_but_not_regular():
    # Smooth frame-valid function on the circle that is not a quadratic form:
    # f(theta) = cos^2(3 theta); orthogonal pairs sum to exactly 1.
    k = 400
    thetas = [i * np.pi / k for i in range(k)]
    entries = [(np.array([np.cos(t), np.sin(t)]), np.cos(3 * t) ** 2) for t in thetas]
    f = FrameFunction.tabulated(2, Field.REAL, entries)
    bases = f.stored_bases()
    assert len(bases) == k // 2
    rep = check_frame_condition(f, 0, 0, bases=bases)
    assert rep.max_deviation < 1e-10
    rec = reconstruct_rho(f, 200, 33)
    assert rec.verdict is Verdict.NOT_REGULAR
    assert rec.max_residual > 1e-3
