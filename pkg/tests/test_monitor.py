import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from histlab.history import InstantChain, temporal_marginal
from histlab.monitor import (
    MonitorProtocol, PostselectionError, controlled_copy, measure_monitors,
    run_protocol,
)
from histlab.qcore import (
    H, I2, NAMED_KETS, X, Z, Basis, DimensionError, kron, random_ket,
    random_unitary,
)
from histlab.tempcorr import SpinObservable

KET0, KET1, PLUS = NAMED_KETS["0"], NAMED_KETS["1"], NAMED_KETS["+"]
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def test_controlled_copy_computational_is_cnot():
    assert np.allclose(controlled_copy(Basis.computational(2)), CNOT)


def test_controlled_copy_hadamard_basis():
    g = controlled_copy(Basis(H))
    assert np.allclose(g, kron(H, H) @ CNOT @ kron(H, I2))
    for i in range(2):
        v = H[:, i]
        assert np.allclose(g @ np.kron(v, KET0), np.kron(v, v))


def test_controlled_copy_qutrit_permutation():
    oracle = np.zeros((9, 9))
    for i, j in itertools.product(range(3), repeat=2):
        oracle[3 * i + (j + i) % 3, 3 * i + j] = 1
    g = controlled_copy(Basis.computational(3))
    assert np.allclose(g, oracle)


def test_controlled_copy_is_unitary(rng):
    g = controlled_copy(Basis(random_unitary(3, rng)))
    assert np.allclose(g.conj().T @ g, np.eye(9))


def two_instant_oracle(u, psi, post):
    """Direct 8-dim simulation on main (x) m1 (x) m0, computational bases."""
    def copy_to(slot):
        g = np.zeros((8, 8))
        for s, a1, a0 in itertools.product(range(2), repeat=3):
            b = [a1, a0]
            b[slot] ^= s
            g[4 * s + 2 * b[0] + b[1], 4 * s + 2 * a1 + a0] = 1
        return g
    state = np.kron(psi, np.kron(KET0, KET0))
    state = copy_to(1) @ state
    state = np.kron(u, np.eye(4)) @ state
    state = copy_to(0) @ state
    projected = np.kron(post.conj(), np.eye(4)) @ state
    return projected


def test_two_instant_protocol_against_direct_simulation(rng):
    for _ in range(10):
        u, psi = random_unitary(2, rng), random_ket(2, rng)
        out = run_protocol(MonitorProtocol(InstantChain((u,)), psi))
        projected = two_instant_oracle(u, psi, PLUS)
        assert out.success_prob == pytest.approx(0.5, abs=1e-12)
        assert np.vdot(projected, projected).real == pytest.approx(out.success_prob, abs=1e-12)
        assert abs(abs(np.vdot(projected / np.sqrt(0.5), out.monitor_state)) - 1) <= 1e-12


def test_two_instant_amplitudes_in_general_bases(rng):
    a, b, u = (random_unitary(2, rng) for _ in range(3))
    alpha = random_ket(2, rng)
    initial = a @ alpha
    out = run_protocol(MonitorProtocol(InstantChain((u,), bases=(a, b)), initial))
    expected = np.zeros(4, dtype=complex)
    for n, m in itertools.product(range(2), repeat=2):
        amp = np.vdot(b[:, n], u @ a[:, m]) * alpha[m]
        expected += amp * np.kron(b[:, n], a[:, m])
    assert abs(abs(np.vdot(expected, out.monitor_state)) - 1) <= 1e-12
    assert out.fidelity_vs_history == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_trivial_chain_monitor_is_ghz(n, rng):
    alpha = random_ket(2, rng)
    out = run_protocol(MonitorProtocol(InstantChain.uniform(I2, n), alpha))
    ghz = alpha[0] * kron(*[KET0] * n) + alpha[1] * kron(*[KET1] * n)
    assert abs(abs(np.vdot(ghz, out.monitor_state)) - 1) <= 1e-12
    assert out.fidelity_vs_history == pytest.approx(1, abs=1e-12)


def test_success_probability_is_one_over_d(rng):
    for d, n in [(2, 2), (2, 4), (3, 3)]:
        chain = InstantChain(tuple(random_unitary(d, rng) for _ in range(n - 1)))
        out = run_protocol(MonitorProtocol(chain, random_ket(d, rng)))
        assert out.success_prob == pytest.approx(1 / d, abs=1e-12)


def test_measure_monitors_examples():
    out = run_protocol(MonitorProtocol(InstantChain((I2,)), PLUS))
    dist = measure_monitors(out, [Z, Z])
    assert dist[(1.0, 1.0)] == pytest.approx(0.5)
    assert dist[(-1.0, -1.0)] == pytest.approx(0.5)
    assert dist[(1.0, -1.0)] == pytest.approx(0) and dist[(-1.0, 1.0)] == pytest.approx(0)

    out = run_protocol(MonitorProtocol(InstantChain((X,)), KET0))
    dist = measure_monitors(out, [Z, Z])
    assert dist[(-1.0, 1.0)] == pytest.approx(1)

    out = run_protocol(MonitorProtocol(InstantChain((I2,)), KET0))
    dist = measure_monitors(out, [X, X])
    assert all(p == pytest.approx(0.25) for p in dist.values())
    assert len(dist) == 4


def test_measure_monitors_errors():
    out = run_protocol(MonitorProtocol(InstantChain((I2,)), KET0))
    with pytest.raises(DimensionError):
        measure_monitors(out, [Z])
    with pytest.raises(DimensionError):
        measure_monitors(out, [Z, np.eye(3)])


def test_zero_probability_postselection():
    with pytest.raises(PostselectionError):
        run_protocol(MonitorProtocol(InstantChain((I2,)), KET0, postselect=KET1))


def test_protocol_dimension_errors():
    with pytest.raises(DimensionError):
        MonitorProtocol(InstantChain((I2,)), np.ones(3) / np.sqrt(3))
    with pytest.raises(DimensionError):
        MonitorProtocol(InstantChain((I2,)), KET0, postselect=np.ones(3) / np.sqrt(3))


def test_protocol_history_equivalence_random():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for case in range(240):
        n = 2 + case % 2
        chain = InstantChain(
            tuple(random_unitary(2, rng) for _ in range(n - 1)),
            tuple(random_unitary(2, rng) for _ in range(n)),
        )
        out = run_protocol(MonitorProtocol(chain, random_ket(2, rng)))
        worst = max(worst, abs(out.fidelity_vs_history - 1))
    assert worst <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_same_spin_repetition(seed, n):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal(3)
    spin = SpinObservable(r / np.linalg.norm(r)).matrix
    # instants recorded in the eigenbasis of the spin being repeated
    eigbasis = np.linalg.eigh(spin)[1]
    chain = InstantChain.uniform(I2, n, bases=[eigbasis] * n)
    out = run_protocol(MonitorProtocol(chain, random_ket(2, rng)))
    for j, l in itertools.combinations(range(n), 2):
        obs = [np.eye(2)] * n
        obs[j] = obs[l] = spin
        dist = measure_monitors(out, obs)
        same = sum(p for key, p in dist.items() if key[out.history.chain.factor_of(j)] == key[out.history.chain.factor_of(l)])
        assert same == pytest.approx(1, abs=1e-12)


def test_no_tomography_phase_invariance():
    alpha, beta = 0.6, 0.8
    ref = None
    for theta in np.linspace(0, 2 * np.pi, 13):
        psi = np.array([alpha * np.exp(1j * theta), beta])
        out = run_protocol(MonitorProtocol(InstantChain.uniform(I2, 3), psi))
        for k in range(3):
            m = out.marginal(k)
            assert np.max(np.abs(m - temporal_marginal(out.history, k))) <= 1e-12
            assert np.max(np.abs(m - np.diag(np.diag(m)))) <= 1e-12
        margs = [out.marginal(k) for k in range(3)]
        if ref is None:
            ref = margs
        assert all(np.max(np.abs(a - b)) <= 1e-12 for a, b in zip(margs, ref))


def test_postselection_phase_covariance(rng):
    chain = InstantChain((random_unitary(2, rng), random_unitary(2, rng)))
    psi = random_ket(2, rng)
    post = random_ket(2, rng)
    base = run_protocol(MonitorProtocol(chain, psi, post))
    for phi in (0.3, 1.7, np.pi):
        other = run_protocol(MonitorProtocol(chain, psi, np.exp(1j * phi) * post))
        overlap = np.vdot(base.monitor_state, other.monitor_state)
        assert abs(abs(overlap) - 1) <= 1e-12
        assert other.success_prob == pytest.approx(base.success_prob, abs=1e-12)
        assert other.fidelity_vs_history == pytest.approx(base.fidelity_vs_history, abs=1e-12)
