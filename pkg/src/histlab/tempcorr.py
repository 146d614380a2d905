"""Two-time observables and temporal correlations.

* A von Neumann pointer on a finite lattice coupled impulsively to a spin at
  two instants, with opposite signs, so it records only ``s(t2) - s(t1)``.
* Sequential projective measurements: exact joint law by path enumeration
  plus seeded Monte-Carlo sampling.
* Leggett-Garg correlators ``C_ij`` and ``K = C12 + C23 - C13`` under the
  invasive sequential-projective scheme (collapse at the earlier instant).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .history import InstantChain
from .qcore import (
    DimensionError,
    ValidationError,
    Y,
    Z,
    X,
    _frozen,
    _rng,
    check_density,
    check_hermitian,
    check_ket,
    eigenspaces,
)

EIGENVALUE_TOL = 1e-8


@dataclass(frozen=True)
class SpinObservable:
    direction: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.direction, dtype=float).reshape(-1)
        if r.size != 3:
            raise DimensionError("spin direction must be a 3-vector")
        norm = np.linalg.norm(r)
        if abs(norm - 1) > 1e-9:
            raise ValidationError(f"spin direction has norm {norm:.12g}, expected 1")
        object.__setattr__(self, "direction", _frozen(r))

    @property
    def matrix(self) -> np.ndarray:
        x, y, z = self.direction
        return x * X + y * Y + z * Z


@dataclass(frozen=True)
class PointerModel:
    """Pointer on positions ``-(d-1)/2 .. (d-1)/2``; ``shift`` moves it by +1 (cyclically)."""

    lattice_dim: int

    def __post_init__(self):
        d = self.lattice_dim
        if d < 1 or d % 2 == 0:
            raise ValidationError(f"lattice_dim must be a positive odd integer, got {d}")

    @property
    def half_width(self) -> int:
        return (self.lattice_dim - 1) // 2

    @property
    def positions(self) -> np.ndarray:
        h = self.half_width
        return np.arange(-h, h + 1)

    @property
    def shift(self) -> np.ndarray:
        return np.roll(np.eye(self.lattice_dim, dtype=complex), 1, axis=0)

    def shift_by(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(self.shift, int(n) % self.lattice_dim)

    def origin_index(self) -> int:
        return self.half_width


@dataclass(frozen=True)
class SequentialMeasurementPlan:
    chain: InstantChain
    measured_instants: tuple
    observables: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.measured_instants)
        if not idx:
            raise ValidationError("at least one measured instant is required")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"measured instants must be strictly increasing, got {idx}")
        if idx[0] < 0 or idx[-1] >= self.chain.n_instants:
            raise IndexError(f"measured instants {idx} outside chain of {self.chain.n_instants}")
        if len(self.observables) != len(idx):
            raise DimensionError(f"{len(idx)} instants but {len(self.observables)} observables")
        obs = []
        for n, (i, o) in enumerate(zip(idx, self.observables)):
            o = check_hermitian(o, self.chain.tol, f"observables[{n}]")
            if o.shape[0] != self.chain.dims[i]:
                raise DimensionError(f"observables[{n}] has dim {o.shape[0]}, instant {i} has dim {self.chain.dims[i]}")
            obs.append(_frozen(o))
        object.__setattr__(self, "measured_instants", idx)
        object.__setattr__(self, "observables", tuple(obs))


@dataclass
class SequentialResult:
    exact: dict
    records: np.ndarray
    outcome_values: list

    def frequencies(self) -> dict:
        out = {key: 0 for key in self.exact}
        keys, counts = np.unique(self.records, axis=0, return_counts=True)
        for row, c in zip(keys, counts):
            out[tuple(float(v) for v in row)] = int(c)
        n = len(self.records)
        return {k: v / n for k, v in out.items()}


def _label(val: float) -> float:
    # eigenvalues as outcome labels; rounding merges numerically equal values
    return round(val, 12) + 0.0


def _pointer_couplings(spin: np.ndarray, model: PointerModel, sign: int, offset: int) -> np.ndarray:
    """Controlled shift ``sum_s P_s (x) S^(sign*(s+offset))`` on spin (x) pointer."""
    d = spin.shape[0]
    op = np.zeros((d * model.lattice_dim,) * 2, dtype=complex)
    for val, proj in eigenspaces(spin):
        s = int(round(val))
        if abs(val - s) > EIGENVALUE_TOL:
            raise ValidationError(f"pointer coupling needs integer eigenvalues, got {val}")
        op += np.kron(proj, model.shift_by(sign * (s + offset)))
    return op


def pointer_two_time(
    chain: InstantChain,
    initial,
    spin,
    t1: int,
    t2: int,
    lattice_dim: int = 7,
    offset: int = 0,
) -> dict:
    """Distribution of the net pointer displacement after couplings at t1 and t2.

    At ``t1`` the pointer is shifted by ``-(s + offset)`` and at ``t2`` by
    ``+(s + offset)``, where ``s`` is the spin eigenvalue.  ``offset`` is a
    spin-independent shift applied with the same signs; it must not change
    the result.  Returns ``{displacement: probability}`` over every lattice
    position.
    """
    spin = spin.matrix if isinstance(spin, SpinObservable) else check_hermitian(spin)
    model = PointerModel(lattice_dim)
    if lattice_dim < 5:
        raise ValidationError(f"lattice_dim must be at least 5, got {lattice_dim}")
    if not 0 <= t1 < t2 < chain.n_instants:
        raise ValidationError(f"need 0 <= t1 < t2 < {chain.n_instants}, got t1={t1}, t2={t2}")
    vals = [v for v, _ in eigenspaces(spin)]
    smax = max(abs(v) for v in vals)
    if smax + abs(offset) > model.half_width or 2 * smax > model.half_width:
        raise ValidationError(
            f"lattice_dim {lattice_dim} too small: displacements would wrap around the lattice"
        )
    psi = check_ket(initial, chain.tol, "initial state")
    if psi.size != chain.dims[0] or spin.shape[0] != chain.dims[t1] or spin.shape[0] != chain.dims[t2]:
        raise DimensionError("initial state, spin and chain dimensions disagree")

    pointer0 = np.zeros(lattice_dim, dtype=complex)
    pointer0[model.origin_index()] = 1
    state = np.kron(chain.propagator(0, t1) @ psi, pointer0)
    state = _pointer_couplings(spin, model, -1, offset) @ state
    state = np.kron(chain.propagator(t1, t2), np.eye(lattice_dim)) @ state
    state = _pointer_couplings(spin, model, +1, offset) @ state

    probs = np.sum(np.abs(state.reshape(spin.shape[0], lattice_dim)) ** 2, axis=0)
    return {int(q): float(p) for q, p in zip(model.positions, probs)}


def _evolve_to(chain: InstantChain, start: int, stop: int, psi):
    return chain.propagator(start, stop) @ psi


def sequential_exact(plan: SequentialMeasurementPlan, initial) -> dict:
    """Joint outcome law by enumerating all branches of projective collapse.

    Keys are eigenvalue tuples in chronological order.
    """
    psi = check_ket(initial, plan.chain.tol, "initial state")
    spaces = [eigenspaces(o) for o in plan.observables]
    dist = {}
    for combo in itertools.product(*spaces):
        v = psi
        prev = 0
        for inst, (_, proj) in zip(plan.measured_instants, combo):
            v = proj @ _evolve_to(plan.chain, prev, inst, v)
            prev = inst
        key = tuple(_label(val) for val, _ in combo)
        dist[key] = dist.get(key, 0.0) + float(np.vdot(v, v).real)
    return dist


def sequential_measure(plan: SequentialMeasurementPlan, initial, shots: int, seed) -> SequentialResult:
    """Monte-Carlo sequential measurement with collapse between instants.

    Each shot draws its outcome at every measured instant by inverse CDF over
    eigenvalues in descending order, then collapses and evolves on.  Shots
    sharing a branch are processed together.
    """
    if shots < 1:
        raise ValidationError("shots must be at least 1")
    if seed is None:
        raise ValidationError("sequential_measure requires an explicit seed")
    rng = _rng(seed)
    psi = check_ket(initial, plan.chain.tol, "initial state")
    spaces = [eigenspaces(o) for o in plan.observables]
    m = len(plan.measured_instants)
    records = np.empty((shots, m))
    # branch: (normalised state, shot indices)
    branches = [(psi, np.arange(shots))]
    prev = 0
    for step, inst in enumerate(plan.measured_instants):
        u = plan.chain.propagator(prev, inst)
        prev = inst
        new = []
        for v, idx in branches:
            v = u @ v
            posts = [proj @ v for _, proj in spaces[step]]
            p = np.array([np.vdot(w, w).real for w in posts])
            cdf = np.cumsum(p / p.sum())
            pick = np.minimum(np.searchsorted(cdf, rng.random(idx.size), side="right"), len(p) - 1)
            for o, (val, _) in enumerate(spaces[step]):
                sel = idx[pick == o]
                if sel.size:
                    records[sel, step] = _label(val)
                    new.append((posts[o] / np.sqrt(p[o]), sel))
        branches = new
    return SequentialResult(sequential_exact(plan, psi), records, [[_label(v) for v, _ in s] for s in spaces])


def _check_pm_one(q_obs) -> list:
    spaces = eigenspaces(check_hermitian(q_obs))
    for val, _ in spaces:
        if min(abs(val - 1), abs(val + 1)) > EIGENVALUE_TOL:
            raise ValidationError(f"observable must have eigenvalues +1/-1, found {val:.6g}")
    return spaces


def lg_correlator(chain: InstantChain, initial, q_obs, i: int, j: int) -> float:
    """C_ij = sum_{a,b} a b P(a at i, b at j), collapse at i, nothing measured in between."""
    if not 0 <= i < j < chain.n_instants:
        raise ValidationError(f"need 0 <= i < j < {chain.n_instants}, got i={i}, j={j}")
    spaces = _check_pm_one(q_obs)
    rho = check_density(initial, chain.tol, "initial state")
    u0 = chain.propagator(0, i)
    rho_i = u0 @ rho @ u0.conj().T
    u = chain.propagator(i, j)
    c = 0.0
    for a, pa in spaces:
        branch = u @ (pa @ rho_i @ pa) @ u.conj().T
        for b, pb in spaces:
            c += round(a) * round(b) * float(np.trace(pb @ branch).real)
    return c


def rotation_y(theta: float) -> np.ndarray:
    """exp(-i theta sigma_y / 2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def lg_classical_max() -> float:
    """Largest K over the 8 deterministic assignments of +-1 to three instants."""
    return max(
        q1 * q2 + q2 * q3 - q1 * q3 for q1, q2, q3 in itertools.product((1, -1), repeat=3)
    )


def lg_sweep(angles, obs=Z, initial=None, violation_tol: float = 1e-12) -> list[dict]:
    """Rows of (theta, C12, C23, C13, K, violated) for a three-instant chain
    whose steps are ``exp(-i theta sigma_y / 2)``."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size == 0:
        raise ValidationError("angle grid is empty")
    initial = np.eye(2) / 2 if initial is None else initial
    rows = []
    for theta in angles:
        chain = InstantChain.uniform(rotation_y(theta), 3)
        c12 = lg_correlator(chain, initial, obs, 0, 1)
        c23 = lg_correlator(chain, initial, obs, 1, 2)
        c13 = lg_correlator(chain, initial, obs, 0, 2)
        k = c12 + c23 - c13
        rows.append({
            "theta": float(theta), "C12": c12, "C23": c23, "C13": c13,
            "K": k, "violated": bool(k > 1 + violation_tol),
        })
    return rows


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` roughly uniform unit vectors (golden-angle spiral)."""
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z**2)
    phi = np.pi * (1 + np.sqrt(5)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
