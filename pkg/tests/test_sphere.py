import numpy as np
import pytest

from gleason_csm.errors import (
    AtEquator,
    AtPole,
    ChainTooLong,
    InvalidParams,
    MonotonicityViolation,
    NotOnDescent,
)
from gleason_csm.frame import FrameFunction
from gleason_csm.hilbert import DensityMatrix, Field, UnitVector, random_unit_vector
from gleason_csm.seeding import child_rng
from gleason_csm.sphere import (
    basic_lemma_decomposition,
    build_piron_chain,
    central_projection,
    descent_through,
    inverse_projection,
    latitude,
    tangent_frame,
    verify_monotonicity,
)

POLE = np.array([0.0, 0.0, 1.0])


def at_latitude(h: float, lon: float, p: np.ndarray = POLE) -> np.ndarray:
    r = np.sqrt((1.0 - h) / h)
    return inverse_projection(np.array([r * np.cos(lon), r * np.sin(lon)]), p)


def pole_born() -> FrameFunction:
    return FrameFunction.born(DensityMatrix.pure(UnitVector(POLE, Field.REAL)))


class TestLatitude:
    def test_pole(self):
        assert latitude(POLE, POLE) == pytest.approx(1.0)

    def test_equator(self):
        assert latitude(np.array([1.0, 0.0, 0.0]), POLE) == pytest.approx(0.0)

    def test_forty_five_degrees(self):
        u = np.array([1.0, 0.0, 1.0]) / np.sqrt(2)
        assert latitude(u, POLE) == pytest.approx(0.5, abs=1e-12)


class TestDescent:
    def test_invariants(self):
        u = at_latitude(0.5, 0.0)
        d = descent_through(u, POLE)
        assert abs(d.u @ d.plane_normal) < 1e-10
        e = np.cross(d.u, POLE)
        e = e / np.linalg.norm(e)
        assert abs(e @ d.u) < 1e-10
        assert abs(e @ POLE) < 1e-10
        assert abs(e @ d.plane_normal) < 1e-10  # e lies in the plane

    def test_pole_and_equator_rejected(self):
        with pytest.raises(AtPole):
            descent_through(POLE, POLE)
        with pytest.raises(AtEquator):
            descent_through(np.array([0.0, 1.0, 0.0]), POLE)

    def test_u_has_maximal_latitude_on_circle(self):
        u = at_latitude(0.7, 0.4)
        d = descent_through(u, POLE)
        hu = latitude(u, POLE)
        for alpha in np.linspace(0, 2 * np.pi, 100):
            assert latitude(d.point(alpha), POLE) <= hu + 1e-12

    def test_normal_direction_relation(self):
        # plane_normal is parallel to u x e with e the equator crossing.
        for seed in range(10):
            u = random_unit_vector(3, Field.REAL, seed).components
            if latitude(u, POLE) < 1e-3 or latitude(u, POLE) > 1 - 1e-3:
                continue
            d = descent_through(u, POLE)
            e = np.cross(d.u, POLE)
            e /= np.linalg.norm(e)
            n = np.cross(d.u, e)
            n /= np.linalg.norm(n)
            assert min(np.linalg.norm(d.plane_normal - n), np.linalg.norm(d.plane_normal + n)) < 1e-10


class TestBasicLemma:
    def test_same_point_zero_residual(self):
        f = pole_born()
        u = at_latitude(0.6, 0.2)
        rep = basic_lemma_decomposition(f, u, u, POLE)
        assert rep.f_vprime == pytest.approx(0.0, abs=1e-12)
        assert rep.residual < 1e-12

    def test_cos2_latitudes_split(self):
        # Latitudes along one descent satisfy h(u') + h(v') = h(u).
        f = pole_born()
        u = at_latitude(0.8, 0.0)
        d = descent_through(u, POLE)
        # Find the circle point at latitude 0.3: cos^2(alpha) * 0.8 = 0.3.
        alpha = np.arccos(np.sqrt(0.3 / 0.8))
        up = d.point(alpha)
        assert latitude(up, POLE) == pytest.approx(0.3, abs=1e-12)
        rep = basic_lemma_decomposition(f, u, up, POLE)
        assert rep.f_u == pytest.approx(0.8, abs=1e-10)
        assert rep.f_uprime == pytest.approx(0.3, abs=1e-10)
        assert rep.f_vprime == pytest.approx(0.5, abs=1e-10)
        assert rep.residual < 1e-10
        assert latitude(up, POLE) + latitude(rep.v_prime, POLE) == pytest.approx(
            latitude(u, POLE), abs=1e-10
        )

    def test_off_descent_rejected(self):
        f = pole_born()
        u = at_latitude(0.8, 0.0)
        w = at_latitude(0.3, 1.0)
        with pytest.raises(NotOnDescent):
            basic_lemma_decomposition(f, u, w, POLE)

    def test_descent_never_increases_frame_value(self):
        f = pole_born()
        rng = child_rng(77, 0)
        checked = 0
        while checked < 100:
            u = random_unit_vector(3, Field.REAL, rng).components
            h = latitude(u, POLE)
            if h < 0.05 or h > 0.95:
                continue
            d = descent_through(u, POLE)
            up = d.point(rng.uniform(0, 2 * np.pi))
            if latitude(up, POLE) < 1e-6:
                continue
            rep = basic_lemma_decomposition(f, u, up, POLE)
            assert rep.f_u >= rep.f_uprime - 1e-10
            assert rep.residual < 1e-8
            checked += 1


class TestCentralProjection:
    def test_pole_to_origin(self):
        assert np.allclose(central_projection(POLE, POLE), [0.0, 0.0])

    def test_radius_tan_theta(self):
        u = at_latitude(0.5, 0.0)  # 45 degrees: tan = 1
        assert np.linalg.norm(central_projection(u, POLE)) == pytest.approx(1.0, abs=1e-12)

    def test_equator_rejected(self):
        with pytest.raises(AtEquator):
            central_projection(np.array([0.0, 1.0, 0.0]), POLE)

    def test_descent_projects_to_tangent_line(self):
        # Least-squares line fit over projected circle points.
        u = at_latitude(0.6, 0.8)
        d = descent_through(u, POLE)
        pts = []
        for alpha in np.linspace(-0.6, 0.6, 50):
            pts.append(central_projection(d.point(alpha), POLE))
        pts = np.array(pts)
        # Fit a line a*x + b*y = c with (a, b) unit via total least squares.
        centered = pts - pts.mean(axis=0)
        _, _, vt = np.linalg.svd(centered)
        normal = vt[-1]
        c = float(normal @ pts.mean(axis=0))
        devs = np.abs(pts @ normal - c)
        assert devs.max() < 1e-8
        # Tangency: distance from the origin equals the radius at u's latitude.
        r_u = np.linalg.norm(central_projection(u, POLE))
        assert abs(abs(c) - r_u) < 1e-8

    def test_injective_on_northern_hemisphere(self):
        rng = child_rng(13, 1)
        pairs = 0
        while pairs < 10_000:
            a = random_unit_vector(3, Field.REAL, rng).components
            b = random_unit_vector(3, Field.REAL, rng).components
            a = a if a @ POLE > 0 else -a
            b = b if b @ POLE > 0 else -b
            if latitude(a, POLE) < 1e-4 or latitude(b, POLE) < 1e-4:
                continue
            if np.linalg.norm(a - b) < 1e-6:
                continue
            pa, pb = central_projection(a, POLE), central_projection(b, POLE)
            assert np.linalg.norm(pa - pb) >= 1e-12
            pairs += 1

    def test_inverse_round_trip(self):
        u = at_latitude(0.4, 2.0)
        assert np.allclose(inverse_projection(central_projection(u, POLE), POLE), u, atol=1e-12)


class TestPironChain:
    def test_single_step_when_on_descent(self):
        u = at_latitude(0.8, 0.0)
        d = descent_through(u, POLE)
        v = d.point(0.7)
        assert 0 < latitude(v, POLE) < latitude(u, POLE)
        chain = build_piron_chain(u, v, POLE, 10)
        assert chain.length == 1

    def test_same_longitude_two_steps(self):
        u = at_latitude(0.8, 0.3)
        v = at_latitude(0.3, 0.3)
        chain = build_piron_chain(u, v, POLE, 10)
        assert chain.length == 2
        chain.validate()
        assert min(
            np.linalg.norm(chain.vectors[-1] - v), np.linalg.norm(chain.vectors[-1] + v)
        ) < 1e-8

    def test_tight_gap_needs_long_chain(self):
        u = at_latitude(0.51, 0.0)
        v = at_latitude(0.50, np.pi / 2)
        with pytest.raises(ChainTooLong):
            build_piron_chain(u, v, POLE, 10)
        chain = build_piron_chain(u, v, POLE, 1000)
        assert chain.length > 10
        chain.validate()

    def test_length_grows_as_gap_shrinks(self):
        u1 = at_latitude(0.51, 0.0)
        v1 = at_latitude(0.50, np.pi / 2)
        u2 = at_latitude(0.55, 0.0)
        v2 = at_latitude(0.45, np.pi / 2)
        long_chain = build_piron_chain(u1, v1, POLE, 5000)
        short_chain = build_piron_chain(u2, v2, POLE, 5000)
        assert long_chain.length > short_chain.length

    def test_degenerate_gap_rejected(self):
        u = at_latitude(0.5 + 1e-8, 0.0)
        v = at_latitude(0.5, 1.0)
        with pytest.raises(InvalidParams):
            build_piron_chain(u, v, POLE, 100)

    def test_random_pairs_validate(self):
        rng = child_rng(99, 0)
        built = 0
        while built < 50:
            hu = rng.uniform(0.1, 0.95)
            hv = rng.uniform(0.05, hu - 0.05)
            if hu - hv < 0.05:
                continue
            u = at_latitude(hu, rng.uniform(0, 2 * np.pi))
            v = at_latitude(hv, rng.uniform(0, 2 * np.pi))
            chain = build_piron_chain(u, v, POLE, 200)
            chain.validate()
            assert min(
                np.linalg.norm(chain.vectors[-1] - v), np.linalg.norm(chain.vectors[-1] + v)
            ) < 1e-8
            built += 1


class TestMonotonicity:
    def test_cos2_passes(self):
        f = pole_born()
        u = at_latitude(0.8, 0.0)
        v = at_latitude(0.3, 1.2)
        chain = build_piron_chain(u, v, POLE, 100)
        rep = verify_monotonicity(f, chain)
        assert rep.passed
        assert all(a >= b - 1e-10 for a, b in zip(rep.values, rep.values[1:]))

    def test_rank_one_born_on_random_chains(self):
        f = pole_born()
        rng = child_rng(101, 0)
        done = 0
        while done < 100:
            hu = rng.uniform(0.15, 0.95)
            hv = rng.uniform(0.05, hu - 0.05)
            u = at_latitude(hu, rng.uniform(0, 2 * np.pi))
            v = at_latitude(hv, rng.uniform(0, 2 * np.pi))
            chain = build_piron_chain(u, v, POLE, 200)
            assert verify_monotonicity(f, chain).passed
            done += 1

    def test_corrupted_function_flagged(self):
        u = at_latitude(0.8, 0.0)
        v = at_latitude(0.3, 1.2)
        chain = build_piron_chain(u, v, POLE, 100)
        # Tabulate cos^2 latitude on the chain vertices, then bump a
        # low-latitude vertex up by 0.05.
        entries = []
        for i, w in enumerate(chain.vectors):
            val = latitude(w, POLE)
            if i == len(chain.vectors) - 1:
                val = min(1.0, val + 0.05)
            entries.append((w, val))
        bad = FrameFunction.tabulated(3, Field.REAL, entries)
        with pytest.raises(MonotonicityViolation) as exc:
            verify_monotonicity(bad, chain)
        assert exc.value.step == len(chain.vectors) - 1
