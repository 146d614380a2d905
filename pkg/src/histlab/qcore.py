"""Dense complex linear algebra and validated quantum primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The helpers in
this module validate them (unitarity, Hermiticity, normalisation, ...) and
provide the handful of tensor operations everything else is built from.

Tensor-factor convention: in every composite space the leftmost Kronecker
factor is the *latest* instant, so a two-instant history prints as
``|later> (x) |earlier>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

TOL = 1e-9
EIG_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

NAMED_GATES = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H}
NAMED_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


class DimensionError(ValueError):
    """Operand shapes are inconsistent with each other."""


class ValidationError(ValueError):
    """An input violates a physical invariant (unitarity, normalisation, ...)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array."""
    a = np.array(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size == 1 else a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    a = np.array(v, dtype=complex).reshape(-1)
    if a.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def is_hermitian(m: np.ndarray, tol: float = TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def is_unitary(m: np.ndarray, tol: float = TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol


def check_ket(v, tol: float = TOL, name: str = "ket") -> np.ndarray:
    v = as_vector(v, name)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"{name} has norm {norm:.12g}, expected 1")
    return v


def normalize(v) -> np.ndarray:
    v = as_vector(v)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValidationError("cannot normalise the zero vector")
    return v / norm


def check_hermitian(m, tol: float = TOL, name: str = "matrix") -> np.ndarray:
    m = as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got {m.shape}")
    if not is_hermitian(m, tol):
        raise ValidationError(f"{name} is not Hermitian within {tol}")
    return m


def check_unitary(m, tol: float = TOL, name: str = "unitary") -> np.ndarray:
    m = as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got {m.shape}")
    if not is_unitary(m, tol):
        raise ValidationError(f"{name} is not unitary within {tol}")
    return m


def check_density(m, tol: float = TOL, name: str = "density matrix") -> np.ndarray:
    m = check_hermitian(m, tol, name)
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"{name} has trace {tr:.12g}, expected 1")
    lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
    if lo < -tol:
        raise ValidationError(f"{name} has negative eigenvalue {lo:.3g}")
    return m


def projector(v) -> np.ndarray:
    v = as_vector(v)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis stored as a matrix whose columns are the basis kets."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "basis")
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"basis matrix must be square, got {m.shape}")
        if not is_unitary(m):
            raise ValidationError("basis vectors are not orthonormal within 1e-9")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def computational(cls, dim: int) -> "Basis":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def from_vectors(cls, vectors: Sequence) -> "Basis":
        return cls(np.column_stack([as_vector(v) for v in vectors]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self.matrix[:, i] for i in range(self.dim)]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrix[:, i]

    def coefficients(self, ket) -> np.ndarray:
        """Expansion coefficients of ``ket`` in this basis."""
        return self.matrix.conj().T @ as_vector(ket)


def kron(*mats) -> np.ndarray:
    """Kronecker product with the first argument as the slow (leftmost) factor."""
    if not mats:
        raise DimensionError("kron needs at least one operand")
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in mats])


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Reduce a square operator on ``prod(dims)`` to the factors in ``keep``.

    Factors are indexed left to right. The kept factors stay in their
    original order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise DimensionError(f"dims {dims} imply a {n}x{n} operator, got {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"keep={keep} is not a nonempty subset of range({len(dims)})")

    nf = len(dims)
    t = m.reshape(dims + dims)
    traced = [k for k in range(nf) if k not in keep]
    # einsum labels: row axes 0..nf-1, column axes nf..2nf-1; traced column
    # axes reuse their row label
    letters = [chr(ord("a") + i) for i in range(2 * nf)]
    in_labels = letters[:nf] + [letters[k] if k in traced else letters[nf + k] for k in range(nf)]
    out_labels = [letters[k] for k in keep] + [letters[nf + k] for k in keep]
    out = np.einsum("".join(in_labels) + "->" + "".join(out_labels), t)
    d = int(np.prod([dims[k] for k in keep]))
    return out.reshape(d, d)


def reduced_state(psi, dims: Sequence[int], keep) -> np.ndarray:
    """Partial trace of ``|psi><psi|`` computed without forming the full projector."""
    psi = as_vector(psi)
    dims = [int(d) for d in dims]
    if psi.size != int(np.prod(dims)):
        raise DimensionError(f"vector of size {psi.size} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    traced = [k for k in range(len(dims)) if k not in keep]
    t = np.moveaxis(psi.reshape(dims), keep + traced, list(range(len(dims))))
    d = int(np.prod([dims[k] for k in keep]))
    a = t.reshape(d, -1)
    return a @ a.conj().T


def apply_on_axes(state: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply ``op`` to the tensor axes ``axes`` of a state tensor.

    ``op`` acts on the ordered product of those axes, first axis slowest.
    """
    axes = list(axes)
    sub = [state.shape[a] for a in axes]
    k = len(axes)
    op_t = np.asarray(op).reshape(sub + sub)
    out = np.tensordot(op_t, state, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def eigvals_hermitian(m, tol: float = TOL) -> np.ndarray:
    """Real eigenvalues in descending order."""
    m = check_hermitian(m, tol)
    return np.linalg.eigvalsh((m + m.conj().T) / 2)[::-1]


def trace_norm(m, tol: float = TOL) -> float:
    return float(np.sum(np.abs(eigvals_hermitian(m, tol))))


def eigenspaces(m, tol: float = EIG_TOL) -> list[tuple[float, np.ndarray]]:
    """Distinct eigenvalues (descending) paired with their eigenspace projectors."""
    m = check_hermitian(m)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    groups: list[tuple[float, np.ndarray]] = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or abs(w[i] - w[start]) > tol:
            vecs = v[:, start:i]
            groups.append((float(np.mean(w[start:i])), vecs @ vecs.conj().T))
            start = i
    return groups


def pure_fidelity(a, b) -> float:
    """|<a|b>|^2 for normalised kets; insensitive to global phase."""
    return float(abs(np.vdot(as_vector(a), as_vector(b))) ** 2)


# -- random generation -------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar unitary from QR of a complex Ginibre matrix with phase-fixed R diagonal."""
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_ket(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    rng = _rng(seed)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_isometry(dim_in: int, dim_out: int, seed=None) -> np.ndarray:
    if dim_out < dim_in:
        raise DimensionError("an isometry needs dim_out >= dim_in")
    return random_unitary(dim_out, seed)[:, :dim_in]


# -- JSON interchange ----------------------------------------------------------

def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix object: {exc}") from None
    if rows <= 0 or cols <= 0:
        raise DimensionError("rows and cols must be positive")
    if re.size != rows * cols or im.size != rows * cols:
        raise DimensionError(
            f"matrix declares {rows}x{cols} but has {re.size} real / {im.size} imaginary entries"
        )
    return as_matrix((re + 1j * im).reshape(rows, cols))
