"""Choi matrices of quantum channels and two-instant history operators.

Matrix units ``E_ij = |a_i><a_j|`` (input basis) and ``F_kl = |b_k><b_l|``
(output basis) index the Choi matrix as ``choi[k*d_in + i, l*d_in + j] =
tr(F_kl^dag Lambda(E_ij))``: output index slow, input index fast.  In that
layout the channel is completely positive exactly when ``choi`` is positive
semidefinite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    TOL,
    Basis,
    DimensionError,
    ValidationError,
    _frozen,
    _rng,
    as_matrix,
    check_density,
    is_hermitian,
    partial_trace,
    random_isometry,
)

CP_BUG_FLOOR = -1e-6


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple
    trace_decreasing: bool = False

    def __post_init__(self):
        ops = tuple(_frozen(as_matrix(k, f"kraus_ops[{n}]")) for n, k in enumerate(self.kraus_ops))
        if not ops:
            raise ValidationError("a Kraus channel needs at least one operator")
        shape = ops[0].shape
        for n, k in enumerate(ops):
            if k.shape != shape:
                raise DimensionError(f"kraus_ops[{n}] has shape {k.shape}, expected {shape}")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def in_dim(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def tp_residual(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus_ops) - np.eye(self.in_dim)


@dataclass(frozen=True)
class ChoiChannel:
    choi: np.ndarray
    in_basis: Basis
    out_basis: Basis

    @property
    def in_dim(self) -> int:
        return self.in_basis.dim

    @property
    def out_dim(self) -> int:
        return self.out_basis.dim

    def tensor(self) -> np.ndarray:
        """Entries as ``t[k, i, l, j] = Lambda_{kl,ij}``."""
        do, di = self.out_dim, self.in_dim
        return self.choi.reshape(do, di, do, di)


@dataclass(frozen=True)
class HistoryOperator:
    """Operator on out (x) in, later instant leftmost."""

    matrix: np.ndarray
    out_basis: Basis
    in_basis: Basis

    @property
    def dims(self) -> list[int]:
        return [self.out_basis.dim, self.in_basis.dim]


@dataclass
class CptpReport:
    cp_pass: bool
    tp_pass: bool
    min_choi_eigenvalue: float
    tp_deficit: float
    flags: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cp_pass and self.tp_pass

    def to_dict(self) -> dict:
        return {
            "cp_pass": self.cp_pass,
            "tp_pass": self.tp_pass,
            "min_choi_eigenvalue": self.min_choi_eigenvalue,
            "tp_deficit": self.tp_deficit,
            "flags": list(self.flags),
        }


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),))


def unitary_channel(u) -> KrausChannel:
    return KrausChannel((u,))


def depolarizing_channel(dim: int = 2) -> KrausChannel:
    """Completely depolarizing channel, Kraus set ``{|k><l| / sqrt(d)}``."""
    ops = []
    for k in range(dim):
        for l in range(dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[k, l] = 1 / np.sqrt(dim)
            ops.append(m)
    return KrausChannel(tuple(ops))


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1))


def random_cptp_channel(dim_in: int, dim_out: int | None = None, env_dim: int = 2, seed=None) -> KrausChannel:
    """Stinespring construction: random isometry into out (x) env, then trace env."""
    dim_out = dim_in if dim_out is None else dim_out
    if not 1 <= env_dim <= 4:
        raise ValidationError("env_dim must be between 1 and 4")
    if dim_out * env_dim < dim_in:
        raise DimensionError("dim_out * env_dim must be at least dim_in")
    v = random_isometry(dim_in, dim_out * env_dim, _rng(seed)).reshape(dim_out, env_dim, dim_in)
    return KrausChannel(tuple(v[:, e, :] for e in range(env_dim)))


def _basis(b, dim: int, role: str) -> Basis:
    if b is None:
        return Basis.computational(dim)
    b = b if isinstance(b, Basis) else Basis(b)
    if b.dim != dim:
        raise DimensionError(f"{role} basis has dim {b.dim}, channel needs {dim}")
    return b


def choi_from_kraus(ch: KrausChannel, in_basis=None, out_basis=None) -> ChoiChannel:
    in_basis = _basis(in_basis, ch.in_dim, "input")
    out_basis = _basis(out_basis, ch.out_dim, "output")
    choi = np.zeros((ch.out_dim * ch.in_dim,) * 2, dtype=complex)
    for k in ch.kraus_ops:
        # Kraus operator in the chosen bases, flattened row-major: index k*d_in + i
        v = (out_basis.matrix.conj().T @ k @ in_basis.matrix).reshape(-1)
        choi += np.outer(v, v.conj())
    lo = np.linalg.eigvalsh((choi + choi.conj().T) / 2).min()
    if lo < CP_BUG_FLOOR:
        raise ValidationError(f"Choi matrix built from Kraus operators has eigenvalue {lo:.3g}")
    return ChoiChannel(_frozen(choi), in_basis, out_basis)


def choi_channel(choi, in_basis=None, out_basis=None, in_dim: int | None = None, tol: float = TOL) -> ChoiChannel:
    """Wrap a user-supplied Choi matrix after checking positivity."""
    choi = as_matrix(choi, "choi")
    n = choi.shape[0]
    if choi.shape[1] != n:
        raise DimensionError("Choi matrix must be square")
    if in_basis is not None:
        in_dim = (in_basis if isinstance(in_basis, Basis) else Basis(in_basis)).dim
    if in_dim is None:
        in_dim = int(round(np.sqrt(n)))
    if n % in_dim:
        raise DimensionError(f"Choi size {n} is not a multiple of input dim {in_dim}")
    out_dim = n // in_dim
    if not is_hermitian(choi, tol):
        raise ValidationError("Choi matrix is not Hermitian")
    lo = np.linalg.eigvalsh((choi + choi.conj().T) / 2).min()
    if lo < -tol:
        raise ValidationError(f"Choi matrix is not positive semidefinite (eigenvalue {lo:.3g})")
    return ChoiChannel(_frozen(choi), _basis(in_basis, in_dim, "input"), _basis(out_basis, out_dim, "output"))


def apply_choi(choi: ChoiChannel, rho) -> np.ndarray:
    """Lambda(rho) rebuilt from Choi entries alone."""
    rho = as_matrix(rho)
    if rho.shape != (choi.in_dim, choi.in_dim):
        raise DimensionError(f"rho is {rho.shape}, channel input dim is {choi.in_dim}")
    a, b = choi.in_basis.matrix, choi.out_basis.matrix
    r = a.conj().T @ rho @ a
    out = np.einsum("kilj,ij->kl", choi.tensor(), r)
    return b @ out @ b.conj().T


def kraus_from_choi(choi: ChoiChannel, tol: float = 1e-12) -> KrausChannel:
    w, v = np.linalg.eigh(choi.choi)
    ops = []
    for val, vec in zip(w, v.T):
        if val > tol:
            k = np.sqrt(val) * vec.reshape(choi.out_dim, choi.in_dim)
            ops.append(choi.out_basis.matrix @ k @ choi.in_basis.matrix.conj().T)
    return KrausChannel(tuple(ops))


def channel_history(rho, choi: ChoiChannel, tol: float = TOL) -> HistoryOperator:
    """sum over kl,ij of Lambda_{kl,ij} rho_ij F_kl (x) E_ij."""
    rho = check_density(rho, tol, "rho")
    if rho.shape[0] != choi.in_dim:
        raise DimensionError(f"rho has dim {rho.shape[0]}, channel input dim is {choi.in_dim}")
    a, b = choi.in_basis.matrix, choi.out_basis.matrix
    r = a.conj().T @ rho @ a
    t = choi.tensor() * r[np.newaxis, :, np.newaxis, :]
    n = choi.out_dim * choi.in_dim
    w = np.kron(b, a)
    return HistoryOperator(_frozen(w @ t.reshape(n, n) @ w.conj().T), choi.out_basis, choi.in_basis)


def marginal_out(h: HistoryOperator, mode: str = "path_sum") -> np.ndarray:
    """Reduce a history operator to the later instant.

    ``"path_sum"`` contracts the earlier factor with ``sum_ij <a_i| . |a_j>``,
    adding the earlier-instant paths coherently; for a channel history this
    returns ``Lambda(rho)``.  ``"partial_trace"`` is the ordinary partial trace,
    which keeps only the diagonal paths and returns ``Lambda(diag(rho))``
    (``diag`` taken in the input basis): the output seen when the earlier
    instant is monitored.
    """
    if mode == "partial_trace":
        return partial_trace(h.matrix, h.dims, [0])
    if mode != "path_sum":
        raise ValueError(f"unknown mode {mode!r}")
    s = h.in_basis.matrix.sum(axis=1)
    do, di = h.dims
    t = h.matrix.reshape(do, di, do, di)
    return np.einsum("kilj,i,j->kl", t, s.conj(), s)


def validate_cptp(ch: KrausChannel, tol: float = TOL) -> CptpReport:
    flags = []
    choi = np.zeros((ch.out_dim * ch.in_dim,) * 2, dtype=complex)
    for k in ch.kraus_ops:
        v = k.reshape(-1)
        choi += np.outer(v, v.conj())
    lo = float(np.linalg.eigvalsh(choi).min())
    deficit = float(np.linalg.norm(ch.tp_residual(), 2))
    cp_ok = lo >= -tol
    tp_ok = deficit <= tol
    if not cp_ok:
        flags.append("not_completely_positive")
    if not tp_ok:
        flags.append("trace_decreasing_declared" if ch.trace_decreasing else "not_trace_preserving")
    return CptpReport(cp_ok, tp_ok, lo, deficit, flags)


def history_operator_report(h: HistoryOperator) -> dict:
    m = h.matrix
    return {
        "trace": float(np.trace(m).real),
        "trace_imag": float(np.trace(m).imag),
        "hermiticity_residual": float(np.max(np.abs(m - m.conj().T))),
        "min_eigenvalue": float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()),
    }
