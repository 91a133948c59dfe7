"""Frame functions: candidate probability assignments on the unit sphere.

A frame function maps unit vectors to [0, 1] and sums to 1 over every
orthonormal basis.  This module checks that condition on sampled bases,
reconstructs the density operator behind a regular frame function by fitting
a Hermitian form and projecting onto the density-matrix cone, evaluates the
general three-term mixed form on the real 3-sphere, and estimates extreme
values and per-latitude bounds.

Limitations, by design: checks are sampling based, so pathological
discontinuous candidates that agree with a regular function on every sampled
basis are undetectable; and on a 2-dimensional space the frame condition does
not force regularity (see the shipped tabulated counterexample fixture), so
reconstruction verdicts are only meaningful evidence for dim >= 3.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
import scipy.optimize

from .errors import (
    DimensionMismatch,
    EvaluationRange,
    InsufficientSamples,
    InvalidParams,
    NoStoredDirection,
)
from .hilbert import (
    DensityMatrix,
    Field,
    OrthonormalBasis,
    UnitVector,
    haar_matrices,
    random_unit_vectors,
)
from .seeding import as_rng, child_rng
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "FrameKind",
    "FrameFunction",
    "GeneralFrameParams",
    "FrameConditionReport",
    "RegularityReport",
    "ExtremeValuesReport",
    "LatitudeBandReport",
    "check_frame_condition",
    "reconstruct_rho",
    "eval_general_form",
    "general_form_function",
    "extreme_values",
    "latitude_band_bounds",
]


class FrameKind(enum.Enum):
    TABULATED = "tabulated"
    CLOSED_FORM = "closed_form"
    BORN = "born"


class Verdict(enum.Enum):
    REGULAR = "REGULAR"
    VIOLATES_FRAME = "VIOLATES_FRAME"
    NOT_REGULAR = "NOT_REGULAR"


def _components(x: UnitVector | np.ndarray) -> np.ndarray:
    return x.components if isinstance(x, UnitVector) else np.asarray(x)


@dataclass(frozen=True)
class FrameFunction:
    """Deterministic map from unit vectors to [0, 1].

    Evaluation is phase invariant by construction for the BORN and TABULATED
    kinds (both go through projectors); closed forms are the caller's
    responsibility and are still range checked on every call.
    """

    dim: int
    field: Field
    kind: FrameKind
    _batch: Callable[[np.ndarray], np.ndarray]
    rho: DensityMatrix | None = None
    entries: tuple[tuple[np.ndarray, float], ...] | None = None
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    @classmethod
    def born(cls, rho: DensityMatrix) -> "FrameFunction":
        """f(x) = <x| rho |x>."""
        m = rho.matrix

        def batch(xs: np.ndarray) -> np.ndarray:
            return np.einsum("ni,ij,nj->n", xs.conj(), m, xs).real

        return cls(rho.dim, rho.field, FrameKind.BORN, batch, rho=rho)

    @classmethod
    def closed_form(
        cls,
        dim: int,
        field: Field,
        fn: Callable[[np.ndarray], float],
        batch_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    ) -> "FrameFunction":
        if batch_fn is None:
            def batch(xs: np.ndarray) -> np.ndarray:
                return np.array([float(fn(x)) for x in xs])
        else:
            batch = batch_fn
        return cls(dim, field, FrameKind.CLOSED_FORM, batch)

    @classmethod
    def tabulated(
        cls,
        dim: int,
        field: Field,
        entries: Sequence[tuple[np.ndarray, float]],
        tol: Tolerances = DEFAULT,
    ) -> "FrameFunction":
        """Nearest-stored-direction lookup (projector distance).

        Evaluating farther than ``tol.tabulated_lookup`` from every stored
        direction raises NO_STORED_DIRECTION rather than inventing a value.
        """
        dirs = np.array([_components(v) for v, _ in entries], dtype=field.dtype)
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        vals = np.array([float(f) for _, f in entries])
        frozen = tuple((dirs[i], vals[i]) for i in range(len(vals)))

        def batch(xs: np.ndarray) -> np.ndarray:
            overlap = np.abs(xs @ dirs.conj().T)  # |<entry, x>|
            idx = np.argmax(overlap, axis=1)
            out = np.empty(xs.shape[0])
            for row, (x, i) in enumerate(zip(xs, idx)):
                pu = np.outer(x, x.conj())
                pv = np.outer(dirs[i], dirs[i].conj())
                d = np.max(np.abs(pu - pv))
                if d > tol.tabulated_lookup:
                    raise NoStoredDirection(
                        f"no stored direction within {tol.tabulated_lookup} (nearest {d:.2e})"
                    )
                out[row] = vals[i]
            return out

        return cls(dim, field, FrameKind.TABULATED, batch, entries=frozen, tol=tol)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=self.field.dtype)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise DimensionMismatch(f"expected (n, {self.dim}) samples, got {xs.shape}")
        vals = np.asarray(self._batch(xs), dtype=float)
        bad = (vals < -self.tol.evaluation_range) | (vals > 1.0 + self.tol.evaluation_range)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise EvaluationRange(f"frame function returned {vals[i]} outside [0, 1]")
        return vals

    def __call__(self, x: UnitVector | np.ndarray) -> float:
        return float(self.evaluate_many(_components(x)[None, :])[0])

    def stored_bases(self, orth_tol: float = 1e-9) -> list[OrthonormalBasis]:
        """Orthonormal bases assembled greedily from the stored directions.

        Only meaningful for the TABULATED kind; used so that tabulated
        fixtures can be frame-checked on their own support instead of on
        random bases, where the nearest-direction lookup would add
        discretization error.
        """
        if self.entries is None:
            return []
        dirs = np.array([v for v, _ in self.entries])
        n = len(dirs)
        overlaps = np.abs(dirs @ dirs.conj().T)
        bases: list[OrthonormalBasis] = []
        for i in range(n):
            group = [i]
            for j in range(i + 1, n):
                if len(group) == self.dim:
                    break
                if all(overlaps[j, k] <= orth_tol for k in group):
                    group.append(j)
            if len(group) == self.dim:
                bases.append(
                    OrthonormalBasis(
                        tuple(UnitVector(dirs[k], self.field) for k in group),
                        label=f"stored-{i}",
                    )
                )
        return bases


# ---------------------------------------------------------------------------
# Frame condition


@dataclass(frozen=True)
class FrameConditionReport:
    max_deviation: float
    worst_basis: OrthonormalBasis
    n_bases: int

    def to_json(self) -> dict:
        from .serialization import basis_to_json

        return {
            "max_deviation": self.max_deviation,
            "n_bases": self.n_bases,
            "worst_basis": basis_to_json(self.worst_basis),
        }


def check_frame_condition(
    f: FrameFunction,
    n_bases: int,
    seed: int,
    bases: Sequence[OrthonormalBasis] | None = None,
) -> FrameConditionReport:
    """Max deviation of sum_i f(x_i) from 1 over orthonormal bases.

    Bases are Haar-sampled unless an explicit list is supplied (e.g. the
    stored bases of a tabulated fixture).  The worst basis is returned as a
    witness.
    """
    if bases is None:
        if n_bases < 1:
            raise InvalidParams("n_bases must be >= 1")
        mats = haar_matrices(n_bases, f.dim, f.field, as_rng(seed))
        # Columns are basis vectors; evaluate all of them in one batch.
        cols = np.swapaxes(mats, 1, 2).reshape(n_bases * f.dim, f.dim)
        vals = f.evaluate_many(cols).reshape(n_bases, f.dim)
        sums = vals.sum(axis=1)
        devs = np.abs(sums - 1.0)
        worst = int(np.argmax(devs))
        worst_basis = OrthonormalBasis.from_matrix(mats[worst], f.field, label=f"sampled-{worst}")
        return FrameConditionReport(float(devs[worst]), worst_basis, n_bases)
    if not bases:
        raise InvalidParams("empty basis list")
    best_dev, worst_basis = -1.0, bases[0]
    for b in bases:
        vals = f.evaluate_many(b.matrix.T)
        dev = abs(float(vals.sum()) - 1.0)
        if dev > best_dev:
            best_dev, worst_basis = dev, b
    return FrameConditionReport(best_dev, worst_basis, len(bases))


# ---------------------------------------------------------------------------
# Regularity: fit a Hermitian form and project to the density cone


@dataclass(frozen=True)
class RegularityReport:
    fitted_rho: DensityMatrix
    max_residual: float
    n_samples: int
    verdict: Verdict
    frame_deviation: float
    worst_residual_vector: np.ndarray

    def to_json(self) -> dict:
        from .serialization import matrix_to_json, vector_to_json

        payload = {
            "verdict": self.verdict.value,
            "max_residual": self.max_residual,
            "frame_deviation": self.frame_deviation,
            "n_samples": self.n_samples,
            "fitted_rho": matrix_to_json(self.fitted_rho.matrix, self.fitted_rho.field),
        }
        if self.verdict is not Verdict.REGULAR:
            payload["witness_vector"] = vector_to_json(
                self.worst_residual_vector, self.fitted_rho.field
            )
        return payload


def _hermitian_features(xs: np.ndarray, dim: int, field: Field) -> np.ndarray:
    """Real design matrix for x -> x^dagger H x over Hermitian H."""
    n = xs.shape[0]
    if field is Field.REAL:
        cols = [xs[:, i] ** 2 for i in range(dim)]
        cols += [2.0 * xs[:, i] * xs[:, j] for i in range(dim) for j in range(i + 1, dim)]
        return np.column_stack(cols)
    cols = [np.abs(xs[:, i]) ** 2 for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            prod = xs[:, i].conj() * xs[:, j]
            cols.append(2.0 * prod.real)
            cols.append(-2.0 * prod.imag)
    return np.column_stack([np.asarray(c, dtype=float) for c in cols])


def _hermitian_from_params(theta: np.ndarray, dim: int, field: Field) -> np.ndarray:
    h = np.zeros((dim, dim), dtype=field.dtype)
    for i in range(dim):
        h[i, i] = theta[i]
    k = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            if field is Field.REAL:
                h[i, j] = h[j, i] = theta[k]
                k += 1
            else:
                h[i, j] = theta[k] + 1j * theta[k + 1]
                h[j, i] = theta[k] - 1j * theta[k + 1]
                k += 2
    return h


def _project_to_density(h: np.ndarray, field: Field) -> DensityMatrix:
    """Eigenvalue clipping at 0 followed by trace renormalization."""
    h = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 1e-12:
        return DensityMatrix.maximally_mixed(h.shape[0], field)
    w = w / total
    m = (v * w) @ v.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m, field)


def reconstruct_rho(
    f: FrameFunction,
    n_samples: int,
    seed: int,
    n_validation: int | None = None,
    n_frame_bases: int = 50,
    tol: Tolerances = DEFAULT,
) -> RegularityReport:
    """Fit the quadratic form behind ``f`` and judge regularity.

    Least-squares fit of a Hermitian H minimizing |x^dagger H x - f(x)|^2
    over sampled unit vectors, projected onto the density cone, then
    validated on a fresh sample.  Verdict is REGULAR when the validation
    residual stays within tolerance and the frame condition holds,
    VIOLATES_FRAME when the basis sums already fail, NOT_REGULAR otherwise.

    Tabulated functions are fitted and validated on their stored directions
    and frame-checked on their stored bases (random directions would pick up
    nearest-neighbor discretization error of order the lookup tolerance).
    """
    dim, field = f.dim, f.field
    n_params = dim * dim if field is Field.COMPLEX else dim * (dim + 1) // 2
    if n_samples < dim * dim:
        raise InsufficientSamples(f"need at least dim^2 = {dim * dim} samples, got {n_samples}")

    if f.kind is FrameKind.TABULATED:
        assert f.entries is not None
        dirs = np.array([v for v, _ in f.entries], dtype=field.dtype)
        if dirs.shape[0] < dim * dim:
            raise InsufficientSamples(
                f"tabulated function stores {dirs.shape[0]} directions, need {dim * dim}"
            )
        fit_xs = dirs
        val_xs = dirs
    else:
        fit_xs = random_unit_vectors(max(n_samples, n_params), dim, field, child_rng(seed, 0))
        n_val = n_samples if n_validation is None else n_validation
        val_xs = random_unit_vectors(max(n_val, 1), dim, field, child_rng(seed, 1))

    targets = f.evaluate_many(fit_xs)
    design = _hermitian_features(fit_xs, dim, field)
    theta, *_ = np.linalg.lstsq(design, targets, rcond=None)
    fitted = _project_to_density(_hermitian_from_params(theta, dim, field), field)

    val_pred = np.einsum("ni,ij,nj->n", val_xs.conj(), fitted.matrix, val_xs).real
    residuals = np.abs(val_pred - f.evaluate_many(val_xs))
    worst = int(np.argmax(residuals))
    max_residual = float(residuals[worst])

    if f.kind is FrameKind.TABULATED:
        stored = f.stored_bases()
        if stored:
            frame_report = check_frame_condition(f, 0, 0, bases=stored)
        else:
            frame_report = check_frame_condition(f, n_frame_bases, child_rng(seed, 2))
    else:
        frame_report = check_frame_condition(f, n_frame_bases, child_rng(seed, 2))

    if frame_report.max_deviation > tol.frame_condition:
        verdict = Verdict.VIOLATES_FRAME
    elif max_residual <= tol.regularity_residual:
        verdict = Verdict.REGULAR
    else:
        verdict = Verdict.NOT_REGULAR
    return RegularityReport(
        fitted_rho=fitted,
        max_residual=max_residual,
        n_samples=int(fit_xs.shape[0]),
        verdict=verdict,
        frame_deviation=frame_report.max_deviation,
        worst_residual_vector=val_xs[worst],
    )


# ---------------------------------------------------------------------------
# General three-term form on the real 3-sphere


@dataclass(frozen=True)
class GeneralFrameParams:
    """Weights and eigenframe of the general mixed form on R^3.

    f(u) = M cos^2(u, p) + m cos^2(u, q) + (1 - M - m) cos^2(u, r) with
    0 <= m <= M <= 1 and M + m <= 1; {p, q, r} orthonormal.
    """

    big_m: float
    small_m: float
    basis: OrthonormalBasis

    def __post_init__(self):
        if self.basis.dim != 3 or self.basis.field is not Field.REAL:
            raise InvalidParams("general form needs an orthonormal basis of R^3")
        if not (0.0 <= self.small_m <= self.big_m <= 1.0):
            raise InvalidParams(f"need 0 <= m <= M <= 1, got m={self.small_m}, M={self.big_m}")
        if self.big_m + self.small_m > 1.0 + 1e-15:
            raise InvalidParams(f"need M + m <= 1, got {self.big_m + self.small_m}")


def eval_general_form(params: GeneralFrameParams, u: UnitVector | np.ndarray) -> float:
    x = _components(u)
    p, q, r = (v.components for v in params.basis.vectors)
    cp, cq, cr = float(x @ p) ** 2, float(x @ q) ** 2, float(x @ r) ** 2
    return params.big_m * cp + params.small_m * cq + (1.0 - params.big_m - params.small_m) * cr


def general_form_function(params: GeneralFrameParams) -> FrameFunction:
    """The general form packaged as a closed-form frame function."""
    p, q, r = (v.components for v in params.basis.vectors)
    w = np.array([params.big_m, params.small_m, 1.0 - params.big_m - params.small_m])

    def batch(xs: np.ndarray) -> np.ndarray:
        c = np.column_stack([(xs @ p) ** 2, (xs @ q) ** 2, (xs @ r) ** 2])
        return c @ w

    return FrameFunction(3, Field.REAL, FrameKind.CLOSED_FORM, batch)


# ---------------------------------------------------------------------------
# Extremes and latitude bands


@dataclass(frozen=True)
class ExtremeValuesReport:
    sup_estimate: float
    inf_estimate: float
    argmax: UnitVector
    argmin: UnitVector

    def to_json(self) -> dict:
        from .serialization import vector_to_json

        return {
            "sup_estimate": self.sup_estimate,
            "inf_estimate": self.inf_estimate,
            "argmax": vector_to_json(self.argmax.components, self.argmax.field),
            "argmin": vector_to_json(self.argmin.components, self.argmin.field),
        }


def _embed(x: np.ndarray, field: Field) -> np.ndarray:
    if field is Field.REAL:
        return np.asarray(x, dtype=float).copy()
    return np.concatenate([x.real, x.imag])


def _unembed(t: np.ndarray, dim: int, field: Field) -> np.ndarray:
    if field is Field.REAL:
        v = t
    else:
        v = t[:dim] + 1j * t[dim:]
    return v / np.linalg.norm(v)


def _refine(f: FrameFunction, x0: np.ndarray, sign: float) -> tuple[float, np.ndarray]:
    """Local Nelder-Mead polish of an extremum candidate on the sphere."""
    dim, field = f.dim, f.field

    def objective(t: np.ndarray) -> float:
        return sign * float(f.evaluate_many(_unembed(t, dim, field)[None, :])[0])

    res = scipy.optimize.minimize(
        objective,
        _embed(x0, field),
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000},
    )
    x = _unembed(res.x, dim, field)
    return sign * float(res.fun), x


def extreme_values(f: FrameFunction, n_samples: int, seed: int) -> ExtremeValuesReport:
    """Estimate sup f and inf f with their argument directions.

    Random sampling followed by local ascent/descent from the best samples.
    Tabulated functions skip the refinement (off-grid evaluation is an
    error) and report the discrete extremes over the stored directions.
    """
    if n_samples < 100:
        raise InsufficientSamples("need at least 100 samples")
    if f.kind is FrameKind.TABULATED:
        assert f.entries is not None
        vals = np.array([v for _, v in f.entries])
        dirs = [v for v, _ in f.entries]
        hi, lo = int(np.argmax(vals)), int(np.argmin(vals))
        return ExtremeValuesReport(
            float(vals[hi]),
            float(vals[lo]),
            UnitVector(dirs[hi], f.field),
            UnitVector(dirs[lo], f.field),
        )
    xs = random_unit_vectors(n_samples, f.dim, f.field, as_rng(seed))
    vals = f.evaluate_many(xs)
    hi, lo = int(np.argmax(vals)), int(np.argmin(vals))
    sup, argmax = _refine(f, xs[hi], -1.0)
    inf, argmin = _refine(f, xs[lo], +1.0)
    sup = max(sup, float(vals[hi]))
    inf = min(inf, float(vals[lo]))
    return ExtremeValuesReport(sup, inf, UnitVector(argmax, f.field), UnitVector(argmin, f.field))


@dataclass(frozen=True)
class LatitudeBandReport:
    latitude: float
    inf_band: float
    sup_band: float
    n_samples: int

    def to_json(self) -> dict:
        return {
            "latitude": self.latitude,
            "inf_band": self.inf_band,
            "sup_band": self.sup_band,
            "n_samples": self.n_samples,
        }


def latitude_band_bounds(
    f: FrameFunction,
    p: UnitVector,
    x: float,
    n_samples: int,
    seed: int,
) -> LatitudeBandReport:
    """Sampled inf/sup of ``f`` over the circle of squared cosine ``x`` around ``p``.

    Uses a jittered uniform grid of azimuths so the maximum gap shrinks as
    1/n.  Sampling can only shrink the band, which keeps the squeeze
    inequality (sup at a lower latitude <= inf at a higher one) conservative.
    """
    if f.dim != 3 or f.field is not Field.REAL:
        raise DimensionMismatch("latitude bands are defined on the real 3-sphere")
    if not 0.0 <= x <= 1.0:
        raise InvalidParams(f"latitude must be in [0, 1], got {x}")
    from .sphere import tangent_frame  # local import to avoid a cycle

    e1, e2 = tangent_frame(p.components)
    rng = as_rng(seed)
    phis = (np.arange(n_samples) + rng.uniform(0.0, 1.0, n_samples)) * (2 * np.pi / n_samples)
    circ = (
        np.sqrt(x) * p.components[None, :]
        + np.sqrt(1.0 - x) * (np.cos(phis)[:, None] * e1 + np.sin(phis)[:, None] * e2)
    )
    circ = circ / np.linalg.norm(circ, axis=1, keepdims=True)
    vals = f.evaluate_many(circ)
    return LatitudeBandReport(x, float(vals.min()), float(vals.max()), n_samples)
