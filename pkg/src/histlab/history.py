"""Entangled history states for discrete chains of instants.

A chain ``t0 < t1 < ... < tN`` carries one orthonormal basis per instant and
one unitary per step.  The history state lives in the product of the per-instant
spaces with the latest instant as the leftmost factor; the amplitude of the
basis path ``(i0, ..., iN)`` is ``alpha[i0] * prod_k <b_{k+1}[i_{k+1}]|U_k|b_k[i_k]>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    Basis,
    DimensionError,
    TOL,
    ValidationError,
    _frozen,
    check_ket,
    check_unitary,
    kron,
    matrix_to_json,
    reduced_state,
)

MAX_HISTORY_DIM = 2**20


@dataclass(frozen=True)
class InstantChain:
    """Instants, their bases and the unitaries between consecutive instants.

    ``steps[k]`` maps instant ``k`` to instant ``k + 1``.  When ``bases`` is
    omitted every instant uses the computational basis.
    """

    steps: tuple
    bases: tuple = None
    labels: tuple = None
    tol: float = TOL

    def __post_init__(self):
        steps = tuple(_frozen(check_unitary(u, self.tol, f"steps[{k}]")) for k, u in enumerate(self.steps))
        if not steps:
            raise ValidationError("a chain needs at least 2 instants (1 step)")
        if self.bases is None:
            bases = [Basis.computational(steps[0].shape[1])]
            bases += [Basis.computational(u.shape[0]) for u in steps]
        else:
            bases = [b if isinstance(b, Basis) else Basis(b) for b in self.bases]
        if len(bases) != len(steps) + 1:
            raise DimensionError(f"{len(steps)} steps need {len(steps) + 1} bases, got {len(bases)}")
        for k, u in enumerate(steps):
            if bases[k].dim != u.shape[1] or bases[k + 1].dim != u.shape[0]:
                raise DimensionError(
                    f"steps[{k}] is {u.shape[0]}x{u.shape[1]} but bases {k}, {k + 1} "
                    f"have dims {bases[k].dim}, {bases[k + 1].dim}"
                )
        labels = self.labels
        if labels is None:
            labels = tuple(f"t{k}" for k in range(len(bases)))
        elif len(labels) != len(bases):
            raise DimensionError(f"expected {len(bases)} labels, got {len(labels)}")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "bases", tuple(bases))
        object.__setattr__(self, "labels", tuple(labels))

    @classmethod
    def uniform(cls, step, n_instants: int, bases=None, **kw) -> "InstantChain":
        """Chain with the same step unitary between every pair of instants."""
        if n_instants < 2:
            raise ValidationError("a chain needs at least 2 instants")
        return cls(steps=tuple([step] * (n_instants - 1)), bases=bases, **kw)

    @property
    def n_instants(self) -> int:
        return len(self.bases)

    @property
    def dims(self) -> list[int]:
        """Per-instant dimensions in instant order (earliest first)."""
        return [b.dim for b in self.bases]

    @property
    def factor_dims(self) -> list[int]:
        """Per-factor dimensions in storage order (latest instant first)."""
        return self.dims[::-1]

    def factor_of(self, instant: int) -> int:
        _check_instant(instant, self.n_instants)
        return self.n_instants - 1 - instant

    def propagator(self, start: int, stop: int) -> np.ndarray:
        """Product of steps taking instant ``start`` to instant ``stop``."""
        u = np.eye(self.bases[start].dim, dtype=complex)
        for k in range(start, stop):
            u = self.steps[k] @ u
        return u


@dataclass(frozen=True)
class HistoryState:
    chain: InstantChain
    vector: np.ndarray

    @property
    def dims(self) -> list[int]:
        return self.chain.factor_dims

    def tensor(self) -> np.ndarray:
        """The vector reshaped with one axis per factor (latest instant first)."""
        return self.vector.reshape(self.dims)

    def coefficients(self) -> np.ndarray:
        """Path amplitudes: axis ``j`` indexes the basis of factor ``j``."""
        t = self.tensor()
        for axis, b in enumerate(self.chain.bases[::-1]):
            t = np.moveaxis(np.tensordot(b.matrix.conj().T, t, axes=(1, axis)), 0, axis)
        return t


@dataclass(frozen=True)
class BridgeOperator:
    """Step unitary written in the bases of its two instants.

    The two-vector formalism labels its ends tau-minus (towards the future,
    at instant k+1) and tau-plus (towards the past, at instant k); those
    labels are carried here as documentation only.
    """

    matrix: np.ndarray
    step: int
    ends: tuple = ("tau-", "tau+")


def _check_instant(instant: int, n: int):
    if not 0 <= instant < n:
        raise IndexError(f"instant {instant} out of range for {n} instants")


def build_history(chain: InstantChain, initial) -> HistoryState:
    """Entangled history of ``initial`` evolving along ``chain``."""
    d0 = chain.bases[0].dim
    initial = check_ket(initial, chain.tol, "initial state")
    if initial.size != d0:
        raise DimensionError(f"initial state has dim {initial.size}, instant 0 basis has dim {d0}")
    total = int(np.prod(chain.dims))
    if total > MAX_HISTORY_DIM:
        raise DimensionError(f"history dimension {total} exceeds the dense limit {MAX_HISTORY_DIM}")

    # coefficient tensor, axes ordered latest instant first
    c = chain.bases[0].coefficients(initial)
    for k in range(len(chain.steps)):
        b = bridge_operator(chain, k).matrix
        c = b.reshape(b.shape + (1,) * (c.ndim - 1)) * c[np.newaxis, ...]
    # map path coefficients to physical kets of each instant's basis
    t = c
    for axis, basis in enumerate(chain.bases[::-1]):
        t = np.moveaxis(np.tensordot(basis.matrix, t, axes=(1, axis)), 0, axis)
    vec = t.reshape(-1)
    vec = vec / np.linalg.norm(vec)
    return HistoryState(chain, _frozen(vec))


def transition_amplitude(u, a, b) -> complex:
    """<b|U|a>."""
    u = np.asarray(u, dtype=complex)
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if u.ndim != 2 or u.shape[1] != a.size or u.shape[0] != b.size:
        raise DimensionError(f"cannot form <b|U|a> with U {u.shape}, a {a.size}, b {b.size}")
    return complex(np.vdot(b, u @ a))


def bridge_operator(chain: InstantChain, k: int) -> BridgeOperator:
    if not 0 <= k < len(chain.steps):
        raise IndexError(f"step {k} out of range for {len(chain.steps)} steps")
    bk, bk1 = chain.bases[k].matrix, chain.bases[k + 1].matrix
    return BridgeOperator(_frozen(bk1.conj().T @ chain.steps[k] @ bk), k)


def temporal_marginal(h: HistoryState, instant: int) -> np.ndarray:
    """Reduced density matrix of a single instant's factor."""
    factor = h.chain.factor_of(instant)
    return reduced_state(h.vector, h.dims, [factor])


def naive_product_model(initial, copies: int) -> np.ndarray:
    """The product state |phi> (x) ... (x) |phi>, kept as a foil for the history state."""
    if copies < 1:
        raise ValidationError("copies must be at least 1")
    initial = np.asarray(initial, dtype=complex).reshape(-1)
    return kron(*([initial] * copies))


def history_to_json(h: HistoryState) -> dict:
    out = matrix_to_json(h.vector.reshape(-1, 1))
    out["dims"] = h.dims
    out["labels"] = list(h.chain.labels[::-1])
    return out
