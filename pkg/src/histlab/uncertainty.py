"""Energy and time uncertainty of a history.

Time uncertainty is measured by how well the instant label can be guessed
from a single-instant marginal of the history (minimum-error discrimination
with uniform priors).  Energy uncertainty is reported as the variance and the
Shannon entropy of the energy-eigenbasis distribution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .history import HistoryState, InstantChain, build_history, temporal_marginal
from .qcore import (
    TOL,
    Basis,
    DimensionError,
    ValidationError,
    X,
    Y,
    Z,
    _frozen,
    as_matrix,
    check_density,
    check_hermitian,
    eigenspaces,
    projector,
    trace_norm,
)

DEGENERACY_GAP = 1e-9
STRATEGIES = ("pretty_good", "brute_force_projective", "random_guess")


@dataclass(frozen=True)
class InstantEnsemble:
    states: tuple
    priors: np.ndarray = None

    def __post_init__(self):
        states = tuple(_frozen(check_density(s, 1e-8, f"states[{n}]")) for n, s in enumerate(self.states))
        if not states:
            raise ValidationError("ensemble is empty")
        d = states[0].shape[0]
        if any(s.shape[0] != d for s in states):
            raise DimensionError("all ensemble states must have the same dimension")
        priors = self.priors
        priors = np.full(len(states), 1 / len(states)) if priors is None else np.asarray(priors, dtype=float)
        if priors.shape != (len(states),):
            raise DimensionError(f"{len(states)} states but {priors.size} priors")
        if np.any(priors < 0) or abs(priors.sum() - 1) > 1e-12:
            raise ValidationError("priors must be nonnegative and sum to 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", _frozen(priors))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class EnergyModel:
    hamiltonian: np.ndarray
    allow_degenerate: bool = False

    def __post_init__(self):
        h = check_hermitian(self.hamiltonian, TOL, "hamiltonian")
        h = (h + h.conj().T) / 2
        w = np.linalg.eigvalsh(h)
        if not self.allow_degenerate and np.any(np.diff(w) < DEGENERACY_GAP):
            raise ValidationError("hamiltonian is degenerate; pass allow_degenerate=True to accept it")
        object.__setattr__(self, "hamiltonian", _frozen(h))

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenbasis, **kw) -> "EnergyModel":
        b = eigenbasis if isinstance(eigenbasis, Basis) else Basis(eigenbasis)
        return cls(b.matrix @ np.diag(np.asarray(eigenvalues, dtype=float)) @ b.matrix.conj().T, **kw)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigh(self.hamiltonian)[0]

    @property
    def eigenbasis(self) -> Basis:
        return Basis(np.linalg.eigh(self.hamiltonian)[1])

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def propagator(self, tau: float) -> np.ndarray:
        return expm(-1j * tau * self.hamiltonian)


def instant_marginals(h: HistoryState) -> InstantEnsemble:
    return InstantEnsemble(tuple(temporal_marginal(h, k) for k in range(h.chain.n_instants)))


def helstrom_success(e: InstantEnsemble) -> float:
    if len(e) != 2:
        raise ValidationError(f"Helstrom bound needs exactly 2 states, got {len(e)}")
    p0, p1 = e.priors
    diff = p0 * e.states[0] - p1 * e.states[1]
    return 0.5 * (1 + trace_norm((diff + diff.conj().T) / 2))


def pretty_good_success(e: InstantEnsemble) -> float:
    """Success probability of the square-root measurement itself."""
    avg = sum(p * s for p, s in zip(e.priors, e.states))
    w, v = np.linalg.eigh(avg)
    keep = w > 1e-12
    inv_sqrt = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    total = 0.0
    for p, s in zip(e.priors, e.states):
        m = inv_sqrt @ (p * s) @ inv_sqrt
        total += p * float(np.trace(s @ m).real)
    return total


def _bloch(rho: np.ndarray) -> np.ndarray:
    return np.array([np.trace(rho @ P).real for P in (X, Y, Z)])


def _projective_scores(r: np.ndarray, p: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    proj = n @ r.T  # (..., N): r_i . n
    plus = np.max(p * (1 + proj) / 2, axis=-1)
    minus = np.max(p * (1 - proj) / 2, axis=-1)
    return plus + minus


def brute_force_projective(e: InstantEnsemble, resolution: float = 1e-3, refine_top: int = 8) -> float:
    """Best success over qubit projective measurements on a (theta, phi) grid.

    A grid at ten times ``resolution`` covers the whole sphere; the best
    ``refine_top`` cells are then re-searched at ``resolution``.  Each outcome
    is assigned to the state with the largest weighted likelihood.  The
    trivial measurement (always guess the likeliest prior) is a candidate too.
    """
    if e.dim != 2 or len(e) > 4 or len(e) < 2:
        raise ValidationError("brute_force_projective supports qubit ensembles of 2 to 4 states")
    r = np.array([_bloch(s) for s in e.states])
    p = np.asarray(e.priors)
    coarse = 10 * resolution
    th = np.linspace(0, np.pi, int(np.ceil(np.pi / coarse)) + 1)
    ph = np.arange(0, 2 * np.pi, coarse)
    T, P = np.meshgrid(th, ph, indexing="ij")
    scores = _projective_scores(r, p, T, P)
    best = float(np.max(p))
    best = max(best, float(scores.max()))
    flat = np.argsort(scores, axis=None)[::-1][:refine_top]
    offsets = np.arange(-1.5 * coarse, 1.5 * coarse + resolution / 2, resolution)
    for idx in flat:
        t0, p0 = T.flat[idx], P.flat[idx]
        tt, pp = np.meshgrid(np.clip(t0 + offsets, 0, np.pi), p0 + offsets, indexing="ij")
        best = max(best, float(_projective_scores(r, p, tt, pp).max()))
    return best


def discrimination_success(e: InstantEnsemble, strategy: str = "pretty_good", resolution: float = 1e-3) -> float:
    """Success probability of guessing which state of ``e`` was prepared.

    ``pretty_good`` reports the better of the square-root measurement and
    plain guessing, since guessing the likeliest prior is always available.
    """
    if len(e) < 2:
        raise ValidationError("discrimination needs at least 2 states")
    if strategy == "random_guess":
        return float(np.max(e.priors))
    if strategy == "pretty_good":
        return max(pretty_good_success(e), float(np.max(e.priors)))
    if strategy == "brute_force_projective":
        return brute_force_projective(e, resolution)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def _all_identical(e: InstantEnsemble, tol: float = 1e-12) -> bool:
    return all(np.max(np.abs(s - e.states[0])) <= tol for s in e.states[1:])


def _all_orthogonal(e: InstantEnsemble, tol: float = 1e-12) -> bool:
    n = len(e)
    return all(
        abs(np.trace(e.states[i] @ e.states[j])) <= tol for i in range(n) for j in range(i + 1, n)
    )


def time_discrimination(e: InstantEnsemble) -> dict:
    """Best available figure for the instant-guessing game, with its provenance."""
    if len(e) == 2:
        return {"success": helstrom_success(e), "method": "helstrom", "optimal": True, "n_instants": 2}
    optimal = _all_identical(e) or _all_orthogonal(e)
    return {
        "success": discrimination_success(e, "pretty_good"),
        "method": "pretty_good" if optimal else "pretty_good (lower bound)",
        "optimal": optimal,
        "n_instants": len(e),
    }


def energy_statistics(state, em: EnergyModel) -> dict:
    rho = as_matrix(state, "state")
    if rho.shape[0] == 1 or rho.shape[1] == 1:
        rho = projector(rho.reshape(-1))
    rho = check_density(rho, 1e-8, "state")
    if rho.shape[0] != em.dim:
        raise DimensionError(f"state has dim {rho.shape[0]}, hamiltonian has dim {em.dim}")
    h = em.hamiltonian
    mean = float(np.trace(rho @ h).real)
    var = float(np.trace(rho @ h @ h).real) - mean**2
    probs = np.array([np.trace(rho @ proj).real for _, proj in eigenspaces(h, DEGENERACY_GAP)])
    probs = probs[probs > 1e-15]
    entropy = float(-np.sum(probs * np.log2(probs))) + 0.0
    return {"mean": mean, "variance": max(var, 0.0), "entropy_bits": max(entropy, 0.0)}


def chain_from_energy_model(em: EnergyModel, tau: float, n_instants: int) -> InstantChain:
    """Chain with steps exp(-i H tau) and the energy eigenbasis at every instant."""
    basis = em.eigenbasis
    return InstantChain.uniform(em.propagator(tau), n_instants, bases=[basis] * n_instants)


def steps_commute(chain: InstantChain, em: EnergyModel, tol: float = 1e-9) -> bool:
    h = em.hamiltonian
    return all(np.max(np.abs(u @ h - h @ u)) <= tol for u in chain.steps)


def uncertainty_report(chain: InstantChain, initial, em: EnergyModel) -> dict:
    """Energy spread of ``initial`` next to the instant-discrimination success of its history."""
    if chain.dims[0] != em.dim:
        raise DimensionError(f"chain dim {chain.dims[0]} does not match hamiltonian dim {em.dim}")
    h = build_history(chain, initial)
    ensemble = instant_marginals(h)
    return {
        "energy": energy_statistics(initial, em),
        "energy_per_instant": [energy_statistics(s, em) for s in ensemble.states],
        "time": time_discrimination(ensemble),
        "steps_generated_by_energy_model": steps_commute(chain, em),
    }
