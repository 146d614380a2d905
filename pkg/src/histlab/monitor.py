"""Monitor-system realisation of a history state.

One ancilla per instant starts in ``|0>``.  At instant ``k`` a controlled-copy
gate writes the main system's basis index (in the instant-``k`` basis) onto
ancilla ``k``; the step unitary then moves the main system on.  After the last
instant the main system is projected onto a post-selection state and
discarded.  With the default uniform post-selection the ancillas end up in the
history state, with spatial instead of temporal tensor factors.

Register layout of the simulated state tensor: ``main, m_N, ..., m_0``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .history import HistoryState, InstantChain, build_history
from .qcore import (
    TOL,
    Basis,
    DimensionError,
    apply_on_axes,
    check_hermitian,
    check_ket,
    eigenspaces,
    kron,
    pure_fidelity,
    reduced_state,
)

MIN_SUCCESS_PROB = 1e-12


class PostselectionError(RuntimeError):
    """Post-selection has (numerically) zero probability."""


@dataclass(frozen=True)
class MonitorProtocol:
    chain: InstantChain
    initial: np.ndarray
    postselect: np.ndarray = None

    def __post_init__(self):
        initial = check_ket(self.initial, self.chain.tol, "initial state")
        if initial.size != self.chain.dims[0]:
            raise DimensionError(
                f"initial state has dim {initial.size}, instant 0 has dim {self.chain.dims[0]}"
            )
        post = self.postselect
        if post is None:
            post = uniform_superposition(self.chain.bases[-1])
        post = check_ket(post, self.chain.tol, "postselect")
        if post.size != self.chain.dims[-1]:
            raise DimensionError(
                f"postselect has dim {post.size}, final instant has dim {self.chain.dims[-1]}"
            )
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "postselect", post)


@dataclass(frozen=True)
class MonitorOutcome:
    monitor_state: np.ndarray
    success_prob: float
    fidelity_vs_history: float
    history: HistoryState

    @property
    def dims(self) -> list[int]:
        return self.history.dims

    def marginal(self, instant: int) -> np.ndarray:
        return reduced_state(self.monitor_state, self.dims, [self.history.chain.factor_of(instant)])


def uniform_superposition(basis: Basis) -> np.ndarray:
    return basis.matrix.sum(axis=1) / np.sqrt(basis.dim)


def controlled_copy(basis: Basis) -> np.ndarray:
    """Gate on main (x) ancilla with ``|v_i>|0> -> |v_i>|v_i>``.

    On the rest of the ancilla space the gate acts as ``V X^i``, a cyclic
    increment by ``i`` followed by the basis change ``V|j> = |v_j>``.
    """
    if not isinstance(basis, Basis):
        basis = Basis(basis)
    d = basis.dim
    v = basis.matrix
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)  # |j> -> |j+1 mod d>
    gate = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        gate += kron(np.outer(v[:, i], v[:, i].conj()), v @ np.linalg.matrix_power(shift, i))
    return gate


def run_protocol(p: MonitorProtocol) -> MonitorOutcome:
    chain = p.chain
    n = chain.n_instants
    dims = chain.dims
    # axis 0 is the main system, axis 1 + factor_of(k) is monitor k
    state = np.zeros([dims[0]] + chain.factor_dims, dtype=complex)
    state[(slice(None),) + (0,) * n] = p.initial
    for k in range(n):
        if k > 0:
            state = apply_on_axes(state, chain.steps[k - 1], [0])
        gate = controlled_copy(chain.bases[k])
        state = apply_on_axes(state, gate, [0, 1 + chain.factor_of(k)])

    projected = np.tensordot(p.postselect.conj(), state, axes=(0, 0)).reshape(-1)
    prob = float(np.vdot(projected, projected).real)
    if prob < MIN_SUCCESS_PROB:
        raise PostselectionError(f"post-selection probability {prob:.3g} is below {MIN_SUCCESS_PROB}")
    monitor = projected / np.sqrt(prob)
    hist = build_history(chain, p.initial)
    return MonitorOutcome(monitor, prob, pure_fidelity(hist.vector, monitor), hist)


def measure_monitors(outcome: MonitorOutcome, observables, tol: float = TOL) -> dict:
    """Joint Born-rule distribution of measuring one observable per monitor.

    ``observables[k]`` is measured on the monitor of instant ``k``.  Keys of
    the returned dict are eigenvalue tuples in factor order, latest instant
    first, the same order in which the states are written.
    """
    chain = outcome.history.chain
    n = chain.n_instants
    if len(observables) != n:
        raise DimensionError(f"need {n} observables, got {len(observables)}")
    spaces = []
    for k in range(n):
        obs = check_hermitian(observables[k], tol, f"observables[{k}]")
        if obs.shape[0] != chain.dims[k]:
            raise DimensionError(f"observables[{k}] has dim {obs.shape[0]}, instant {k} has dim {chain.dims[k]}")
        spaces.append(eigenspaces(obs))
    # factor order: latest instant first
    spaces = spaces[::-1]
    psi = outcome.monitor_state.reshape(outcome.dims)
    dist = {}
    for combo in itertools.product(*spaces):
        t = psi
        for axis, (_, proj) in enumerate(combo):
            t = apply_on_axes(t, proj, [axis])
        key = tuple(round(val, 12) + 0.0 for val, _ in combo)
        dist[key] = dist.get(key, 0.0) + float(np.vdot(t, t).real)
    return dist
