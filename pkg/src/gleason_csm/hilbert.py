"""Scalar-field-generic finite-dimensional Hilbert space primitives.

Vectors, orthonormal bases, projectors, density matrices and unitaries over
the real or complex field, plus seeded random generators (Haar-distributed
bases and unitaries) and the Born probability.  All types are immutable after
construction and validate their own invariants; every randomized operation is
a pure function of its inputs and an explicit seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateInput, DimensionMismatch, InvalidParams
from .seeding import as_rng
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "Field",
    "UnitVector",
    "OrthonormalBasis",
    "Projector",
    "DensityMatrix",
    "UnitaryMatrix",
    "gram_schmidt",
    "random_unit_vector",
    "random_basis",
    "basis_containing",
    "random_unitary",
    "haar_matrices",
    "random_density_matrix",
    "density_from_spectrum",
    "unitary_path_to_permutation",
    "born_probability",
    "transition_probabilities",
    "transition_matrix",
]


class Field(enum.Enum):
    """Scalar field tag: real or complex."""

    REAL = "R"
    COMPLEX = "C"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64 if self is Field.REAL else np.complex128)

    @classmethod
    def from_tag(cls, tag: str) -> "Field":
        for f in cls:
            if f.value == tag:
                return f
        raise InvalidParams(f"unknown field tag {tag!r}, expected 'R' or 'C'")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _as_field_array(data, field: Field) -> np.ndarray:
    a = np.asarray(data)
    if field is Field.REAL and np.iscomplexobj(a):
        if np.max(np.abs(a.imag)) > 0:
            raise InvalidParams("complex components given for a REAL-field object")
        a = a.real
    return _freeze(np.array(a, dtype=field.dtype))


@dataclass(frozen=True)
class UnitVector:
    """A normalized vector on the unit sphere of an N-dimensional space.

    Equality of directions is physical, i.e. defined up to a global phase
    (sign, in the real case); use :meth:`same_direction`.
    """

    components: np.ndarray
    field: Field
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        a = _as_field_array(self.components, self.field)
        object.__setattr__(self, "components", a)
        if a.ndim != 1 or a.shape[0] < 2:
            raise InvalidParams(f"unit vector needs dim >= 2, got shape {a.shape}")
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > self.tol.structural:
            raise InvalidParams(f"vector norm {norm} deviates from 1 beyond {self.tol.structural}")

    @classmethod
    def normalized(cls, data, field: Field | None = None) -> "UnitVector":
        """Build a unit vector by normalizing ``data`` (must be nonzero)."""
        a = np.asarray(data)
        if field is None:
            field = Field.COMPLEX if np.iscomplexobj(a) else Field.REAL
        a = np.array(a, dtype=field.dtype)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise DegenerateInput("cannot normalize the zero vector")
        return cls(a / norm, field)

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def inner(self, other: "UnitVector") -> complex:
        """Hermitian inner product <self, other> (conjugate-linear in self)."""
        return complex(np.vdot(self.components, other.components))

    def projector(self) -> "Projector":
        m = np.outer(self.components, self.components.conj())
        return Projector(m, rank=1, field=self.field)

    def same_direction(self, other: "UnitVector", tol: float | None = None) -> bool:
        """Direction equality up to global phase, via projector distance."""
        t = self.tol.derived if tol is None else tol
        d = np.max(np.abs(self.projector().matrix - other.projector().matrix))
        return bool(d <= t)


@dataclass(frozen=True)
class OrthonormalBasis:
    """An ordered orthonormal basis with an identity label (a context)."""

    vectors: tuple[UnitVector, ...]
    label: str = ""
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        vs = tuple(self.vectors)
        object.__setattr__(self, "vectors", vs)
        if not vs:
            raise InvalidParams("basis needs at least one vector")
        dim = vs[0].dim
        if len(vs) != dim:
            raise InvalidParams(f"basis of dim {dim} needs exactly {dim} vectors, got {len(vs)}")
        m = self.matrix
        gram = m.conj().T @ m
        off = np.max(np.abs(gram - np.eye(dim)))
        if off > self.tol.derived:
            raise InvalidParams(f"basis not orthonormal: max Gram deviation {off}")

    @classmethod
    def from_matrix(cls, m: np.ndarray, field: Field, label: str = "") -> "OrthonormalBasis":
        """Columns of ``m`` become the basis vectors."""
        return cls(tuple(UnitVector(m[:, j], field) for j in range(m.shape[1])), label=label)

    @property
    def dim(self) -> int:
        return self.vectors[0].dim

    @property
    def field(self) -> Field:
        return self.vectors[0].field

    @property
    def matrix(self) -> np.ndarray:
        """dim x dim matrix whose j-th column is the j-th basis vector."""
        return np.column_stack([v.components for v in self.vectors])

    def projectors(self) -> tuple["Projector", ...]:
        return tuple(v.projector() for v in self.vectors)

    def relabeled(self, label: str) -> "OrthonormalBasis":
        return OrthonormalBasis(self.vectors, label=label)


@dataclass(frozen=True)
class Projector:
    """Hermitian idempotent matrix with integer trace equal to its rank."""

    matrix: np.ndarray
    rank: int
    field: Field
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        m = _as_field_array(self.matrix, self.field)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParams(f"projector must be square, got {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > self.tol.structural:
            raise InvalidParams(f"projector not Hermitian: deviation {herm}")
        idem = np.max(np.abs(m @ m - m))
        if idem > self.tol.derived:
            raise InvalidParams(f"projector not idempotent: deviation {idem}")
        tr = complex(np.trace(m)).real
        if abs(tr - self.rank) > self.tol.derived:
            raise InvalidParams(f"trace {tr} does not match rank {self.rank}")

    @classmethod
    def from_vector(cls, v: UnitVector) -> "Projector":
        return v.projector()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def close_to(self, other: "Projector", tol: float | None = None) -> bool:
        """Max-entry distance comparison; the extravalence test."""
        t = self.tol.derived if tol is None else tol
        if self.dim != other.dim:
            return False
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= t)


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite Hermitian operator with unit trace."""

    matrix: np.ndarray
    field: Field
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        m = _as_field_array(self.matrix, self.field)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParams(f"density matrix must be square, got {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > self.tol.structural:
            raise InvalidParams(f"density matrix not Hermitian: deviation {herm}")
        tr = complex(np.trace(m)).real
        if abs(tr - 1.0) > self.tol.derived:
            raise InvalidParams(f"density matrix trace {tr} deviates from 1")
        lo = float(np.min(np.linalg.eigvalsh(m)))
        if lo < -self.tol.derived:
            raise InvalidParams(f"density matrix has eigenvalue {lo} below 0")

    @classmethod
    def pure(cls, v: UnitVector) -> "DensityMatrix":
        return cls(np.outer(v.components, v.components.conj()), v.field)

    @classmethod
    def from_projector(cls, p: Projector) -> "DensityMatrix":
        if p.rank != 1:
            raise InvalidParams("only rank-1 projectors are states")
        return cls(p.matrix, p.field)

    @classmethod
    def maximally_mixed(cls, dim: int, field: Field = Field.COMPLEX) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=field.dtype) / dim, field)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class UnitaryMatrix:
    """Matrix with U^dagger U = I (orthogonal in the real case)."""

    matrix: np.ndarray
    field: Field
    tol: Tolerances = dc_field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        m = _as_field_array(self.matrix, self.field)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParams(f"unitary must be square, got {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > self.tol.derived:
            raise InvalidParams(f"matrix not unitary: deviation {dev}")

    @classmethod
    def identity(cls, dim: int, field: Field = Field.COMPLEX) -> "UnitaryMatrix":
        return cls(np.eye(dim, dtype=field.dtype), field)

    @classmethod
    def permutation(cls, perm: Sequence[int], field: Field = Field.REAL) -> "UnitaryMatrix":
        m = permutation_matrix(perm)
        return cls(m.astype(field.dtype), field)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# Construction helpers


def gram_schmidt(
    vectors: Sequence[np.ndarray | UnitVector],
    field: Field | None = None,
    label: str = "",
    tol: Tolerances = DEFAULT,
) -> OrthonormalBasis:
    """Orthonormalize ``vectors`` into a basis.

    The first output vector is parallel to the first input vector.  Raises
    DEGENERATE_INPUT when the inputs are rank deficient (smallest singular
    value below tolerance) or the count does not match the dimension.
    """
    raw = [v.components if isinstance(v, UnitVector) else np.asarray(v) for v in vectors]
    if field is None:
        field = Field.COMPLEX if any(np.iscomplexobj(a) for a in raw) else Field.REAL
    mat = np.array(raw, dtype=field.dtype).T  # columns are the inputs
    dim = mat.shape[0]
    if mat.shape[1] != dim:
        raise DegenerateInput(f"need exactly {dim} vectors for dim {dim}, got {mat.shape[1]}")
    smin = float(np.linalg.svd(mat, compute_uv=False)[-1])
    if smin <= tol.min_singular_value:
        raise DegenerateInput(f"input vectors are rank deficient (sigma_min={smin:.2e})")
    out = np.zeros_like(mat)
    for j in range(dim):
        w = mat[:, j].copy()
        for k in range(j):
            w -= np.vdot(out[:, k], w) * out[:, k]
        # Second pass for numerical orthogonality.
        for k in range(j):
            w -= np.vdot(out[:, k], w) * out[:, k]
        out[:, j] = w / np.linalg.norm(w)
    return OrthonormalBasis.from_matrix(out, field, label=label)


def haar_matrices(n: int, dim: int, field: Field, seed: int | np.random.Generator) -> np.ndarray:
    """Stack of ``n`` Haar-distributed unitary (orthogonal) matrices.

    Gaussian matrix, batched QR, then the diagonal of R is rephased to unit
    modulus so the distribution is exactly Haar.
    """
    rng = as_rng(seed)
    if field is Field.COMPLEX:
        z = rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))
    else:
        z = rng.standard_normal((n, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.einsum("nii->ni", r)
    phase = d / np.abs(d)
    return q * phase[:, None, :]


def random_unitary(dim: int, field: Field, seed: int | np.random.Generator) -> UnitaryMatrix:
    return UnitaryMatrix(haar_matrices(1, dim, field, seed)[0], field)


def random_basis(
    dim: int, field: Field, seed: int | np.random.Generator, label: str = ""
) -> OrthonormalBasis:
    """Haar-random orthonormal basis; deterministic for a fixed seed."""
    if dim < 2:
        raise InvalidParams("dim must be >= 2")
    u = haar_matrices(1, dim, field, seed)[0]
    return OrthonormalBasis.from_matrix(u, field, label=label)


def random_unit_vector(dim: int, field: Field, seed: int | np.random.Generator) -> UnitVector:
    rng = as_rng(seed)
    if field is Field.COMPLEX:
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    else:
        z = rng.standard_normal(dim)
    return UnitVector.normalized(z, field)


def random_unit_vectors(
    n: int, dim: int, field: Field, seed: int | np.random.Generator
) -> np.ndarray:
    """(n, dim) array of independent uniform directions."""
    rng = as_rng(seed)
    if field is Field.COMPLEX:
        z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    else:
        z = rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def basis_containing(
    v: UnitVector, seed: int | np.random.Generator, label: str = ""
) -> OrthonormalBasis:
    """Complete ``v`` to an orthonormal basis with a random remainder.

    The first basis vector is ``v`` itself; the other dim-1 vectors are a
    Haar-random orthonormal frame of its orthocomplement, so different seeds
    share the first vector and differ in the completion.
    """
    dim = v.dim
    comp = scipy.linalg.null_space(v.components.conj()[None, :])  # (dim, dim-1)
    if v.field is Field.REAL:
        comp = comp.real
    mix = haar_matrices(1, dim - 1, v.field, seed)[0]
    rest = comp @ mix
    m = np.column_stack([v.components, rest])
    return OrthonormalBasis.from_matrix(m, v.field, label=label)


def random_density_matrix(
    dim: int,
    field: Field,
    seed: int | np.random.Generator,
    rank: int | None = None,
) -> DensityMatrix:
    """Random mixed state: normalized G G^dagger with Gaussian G of given rank."""
    rng = as_rng(seed)
    r = dim if rank is None else rank
    if not 1 <= r <= dim:
        raise InvalidParams(f"rank must be in [1, {dim}]")
    if field is Field.COMPLEX:
        g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    else:
        g = rng.standard_normal((dim, r))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    m = (m + m.conj().T) / 2
    return DensityMatrix(m, field)


def density_from_spectrum(
    eigenvalues: Sequence[float], basis: OrthonormalBasis
) -> DensityMatrix:
    """Density matrix with prescribed spectrum in the given eigenbasis."""
    w = np.asarray(eigenvalues, dtype=float)
    if w.shape[0] != basis.dim:
        raise DimensionMismatch("spectrum length must equal basis dimension")
    if abs(w.sum() - 1.0) > DEFAULT.derived or np.min(w) < -DEFAULT.derived:
        raise InvalidParams("spectrum must be nonnegative and sum to 1")
    m = basis.matrix @ np.diag(w.astype(basis.field.dtype)) @ basis.matrix.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m, basis.field)


# ---------------------------------------------------------------------------
# Permutation connectivity


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Matrix P with P e_i = e_perm[i]."""
    perm = list(perm)
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise InvalidParams(f"{perm} is not a permutation of 0..{n - 1}")
    m = np.zeros((n, n))
    for i, j in enumerate(perm):
        m[j, i] = 1.0
    return m


def unitary_path_to_permutation(perm: Sequence[int], steps: int) -> list[UnitaryMatrix]:
    """Continuous unitary path from the identity to a permutation matrix.

    Uses U(t) = exp(t log P) with the principal matrix logarithm of the
    permutation matrix, evaluated at ``steps`` equally spaced t in [0, 1].
    The branch cut is nudged by 1e-9 rad so eigenvalues numerically just
    below the negative real axis log consistently to +i*pi.  The path is
    genuinely complex whenever the permutation is not the identity, which is
    what makes the endpoint reachable continuously at all: real orthogonal
    matrices split into two determinant components.
    """
    if steps < 2:
        raise InvalidParams("steps must be >= 2")
    p = permutation_matrix(perm).astype(np.complex128)
    # Permutation matrices are normal, so the complex Schur form is diagonal.
    t_mat, z = scipy.linalg.schur(p, output="complex")
    lam = np.diag(t_mat)
    theta = np.angle(lam)
    theta = np.where(theta < -np.pi + 1e-9, theta + 2 * np.pi, theta)
    ts = np.linspace(0.0, 1.0, steps)
    path = []
    for t in ts:
        u = (z * np.exp(1j * theta * t)) @ z.conj().T
        path.append(UnitaryMatrix(u, Field.COMPLEX))
    return path


# ---------------------------------------------------------------------------
# Born probabilities


def born_probability(p: Projector, rho: DensityMatrix) -> float:
    """trace(rho P), clamped to [0, 1].

    The probability of the outcome attached to the rank-1 projector ``p``
    when the state is ``rho``.
    """
    if p.dim != rho.dim:
        raise DimensionMismatch(f"projector dim {p.dim} vs state dim {rho.dim}")
    val = complex(np.trace(rho.matrix @ p.matrix))
    if abs(val.imag) > DEFAULT.structural:
        raise InvalidParams(f"Born probability has imaginary part {val.imag}")
    x = val.real
    if x < -DEFAULT.derived or x > 1.0 + DEFAULT.derived:
        raise InvalidParams(f"Born probability {x} outside [0, 1] beyond tolerance")
    return float(min(1.0, max(0.0, x)))


def _as_state(state: DensityMatrix | Projector) -> DensityMatrix:
    if isinstance(state, Projector):
        return DensityMatrix.from_projector(state)
    return state


def transition_probabilities(
    state: DensityMatrix | Projector, target: OrthonormalBasis
) -> np.ndarray:
    """Outcome distribution of measuring ``state`` in the ``target`` context.

    Single shared code path for the simulator and the measurement pipeline:
    entry j is born_probability of the j-th outcome projector.
    """
    rho = _as_state(state)
    probs = np.array([born_probability(q, rho) for q in target.projectors()])
    total = probs.sum()
    if abs(total - 1.0) > DEFAULT.derived:
        raise InvalidParams(f"transition probabilities sum to {total}, not 1")
    return probs


def transition_matrix(ca: OrthonormalBasis, cb: OrthonormalBasis) -> np.ndarray:
    """N x N table t[i, j] = probability of outcome j in cb starting from outcome i of ca."""
    if ca.dim != cb.dim:
        raise DimensionMismatch("contexts must share a dimension")
    return np.vstack(
        [transition_probabilities(p, cb) for p in ca.projectors()]
    )
