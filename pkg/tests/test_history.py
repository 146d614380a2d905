import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from histlab.history import (
    InstantChain, bridge_operator, build_history, naive_product_model,
    temporal_marginal, transition_amplitude,
)
from histlab.qcore import (
    H, I2, NAMED_KETS, X, Basis, DimensionError, ValidationError, kron,
    projector, random_ket, random_unitary, reduced_state,
)

KET0, KET1, PLUS = NAMED_KETS["0"], NAMED_KETS["1"], NAMED_KETS["+"]


def ghz(alpha, n):
    return alpha[0] * kron(*[KET0] * n) + alpha[1] * kron(*[KET1] * n)


def random_chain(rng, dim, n_instants):
    steps = tuple(random_unitary(dim, rng) for _ in range(n_instants - 1))
    bases = tuple(random_unitary(dim, rng) for _ in range(n_instants))
    return InstantChain(steps, bases)


def test_two_instant_identity_is_ghz_form():
    alpha = np.array([0.6, 0.8j])
    h = build_history(InstantChain((I2,)), alpha)
    assert np.allclose(h.vector, alpha[0] * np.kron(KET0, KET0) + alpha[1] * np.kron(KET1, KET1), atol=1e-15)


def test_x_step_gives_one_after_zero():
    h = build_history(InstantChain((X,)), KET0)
    assert np.allclose(h.vector, np.kron(KET1, KET0))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_trivial_chain_ghz_general_n(n):
    alpha = random_ket(2, np.random.default_rng(n))
    h = build_history(InstantChain.uniform(I2, n), alpha)
    assert np.max(np.abs(h.vector - ghz(alpha, n))) <= 1e-12


def test_transition_amplitude_examples():
    assert transition_amplitude(I2, KET0, KET0) == 1
    assert transition_amplitude(X, KET0, KET1) == 1
    # <1|H|0>: second row, first column of H = 1/sqrt(2)
    assert transition_amplitude(H, KET0, KET1) == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(DimensionError):
        transition_amplitude(I2, KET0, np.ones(3))


def test_bridge_operator_examples():
    assert np.allclose(bridge_operator(InstantChain((I2,)), 0).matrix, np.eye(2))
    assert np.allclose(bridge_operator(InstantChain((X,)), 0).matrix, X)
    chain = InstantChain((I2,), bases=(np.eye(2), H))
    b = bridge_operator(chain, 0).matrix
    oracle = np.array([[np.vdot(H[:, n], np.eye(2)[:, m]) for m in range(2)] for n in range(2)])
    assert np.allclose(b, oracle)
    assert np.allclose(b, H)
    with pytest.raises(IndexError):
        bridge_operator(chain, 1)


def test_temporal_marginal_examples():
    alpha = np.array([0.6, 0.8])
    h = build_history(InstantChain.uniform(I2, 4), alpha)
    for k in range(4):
        assert np.allclose(temporal_marginal(h, k), np.diag(np.abs(alpha) ** 2))
    h = build_history(InstantChain((X,)), KET0)
    assert np.allclose(temporal_marginal(h, 0), projector(KET0))
    assert np.allclose(temporal_marginal(h, 1), projector(KET1))
    with pytest.raises(IndexError):
        temporal_marginal(h, 2)


def test_naive_product_model_examples():
    assert np.allclose(naive_product_model(KET0, 3), kron(KET0, KET0, KET0))
    assert np.allclose(naive_product_model(PLUS, 2), np.ones(4) / 2)
    alpha = np.array([0.6, 0.8])
    assert not np.allclose(naive_product_model(alpha, 2), ghz(alpha, 2))
    assert np.allclose(naive_product_model(KET1, 2), ghz([0, 1], 2))
    with pytest.raises(ValidationError):
        naive_product_model(KET0, 0)


def test_product_model_contrast(rng):
    for _ in range(20):
        alpha = random_ket(2, rng)
        prod = naive_product_model(alpha, 2)
        hist = build_history(InstantChain((I2,)), alpha).vector
        # inner product expanded term by term
        overlap = np.conj(alpha[0]) * alpha[0] ** 2 + np.conj(alpha[1]) * alpha[1] ** 2
        fid = abs(np.vdot(hist, prod)) ** 2
        assert fid == pytest.approx(abs(overlap) ** 2, abs=1e-12)
        assert fid < 1
        # chance that the product model repeats the same value at both instants
        same = abs(prod[0]) ** 2 + abs(prod[3]) ** 2
        assert same == pytest.approx(abs(alpha[0]) ** 4 + abs(alpha[1]) ** 4, abs=1e-12)
        assert same < 1
        assert abs(hist[0]) ** 2 + abs(hist[3]) ** 2 == pytest.approx(1)


def test_build_history_errors():
    with pytest.raises(DimensionError):
        build_history(InstantChain((I2,)), np.ones(3) / np.sqrt(3))
    with pytest.raises(ValidationError):
        InstantChain((np.diag([1, 2]),))
    with pytest.raises(ValidationError):
        build_history(InstantChain((I2,)), [1, 1])
    with pytest.raises(DimensionError):
        build_history(InstantChain.uniform(I2, 21), KET0)


def test_chain_rejects_bad_bases():
    with pytest.raises(DimensionError):
        InstantChain((I2,), bases=(np.eye(2),))
    with pytest.raises(DimensionError):
        InstantChain((I2,), bases=(np.eye(2), np.eye(3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 6))
def test_norm_preservation(seed, dim, n_instants):
    if dim**n_instants > 4**5:
        n_instants = 5
    rng = np.random.default_rng(seed)
    chain = random_chain(rng, dim, n_instants)
    psi = random_ket(dim, rng)
    h = build_history(chain, psi)
    # norm before the final renormalisation: rebuild from path amplitudes
    assert abs(np.linalg.norm(h.coefficients()) - 1) <= 1e-9
    assert abs(np.linalg.norm(h.vector) - 1) <= 1e-9


def test_path_amplitude_factorization(rng):
    for dim, n in [(2, 3), (3, 3), (2, 4)]:
        chain = random_chain(rng, dim, n)
        psi = random_ket(dim, rng)
        c = build_history(chain, psi).coefficients()
        alpha = chain.bases[0].coefficients(psi)
        bridges = [bridge_operator(chain, k).matrix for k in range(n - 1)]
        for path in itertools.product(range(dim), repeat=n):  # path[k] = index at instant k
            amp = alpha[path[0]]
            for k, b in enumerate(bridges):
                amp *= b[path[k + 1], path[k]]
            assert abs(c[path[::-1]] - amp) <= 1e-12


def test_ghz_collapse_correlation(rng):
    n = 4
    alpha = random_ket(2, rng)
    for direction_basis in (np.eye(2), H, random_unitary(2, rng)):
        chain = InstantChain.uniform(I2, n, bases=[direction_basis] * n)
        h = build_history(chain, alpha)
        for j in range(n):
            for v in Basis(direction_basis).vectors:
                ops = [np.eye(2)] * n
                ops[chain.factor_of(j)] = projector(v)
                post = kron(*ops) @ h.vector
                if np.linalg.norm(post) < 1e-9:
                    continue
                post /= np.linalg.norm(post)
                for other in range(n):
                    marg = reduced_state(post, h.dims, [chain.factor_of(other)])
                    assert np.max(np.abs(marg - projector(v))) <= 1e-12


def test_basis_change_covariance(rng):
    dim, n = 3, 3
    chain = random_chain(rng, dim, n)
    psi = random_ket(dim, rng)
    h = build_history(chain, psi)
    k = 1
    v = random_unitary(dim, rng)
    bases = list(b.matrix for b in chain.bases)
    steps = list(chain.steps)
    bases[k] = v @ bases[k]
    steps[k - 1] = v @ steps[k - 1]
    steps[k] = steps[k] @ v.conj().T
    h2 = build_history(InstantChain(tuple(steps), tuple(bases)), psi)
    assert np.max(np.abs(h2.coefficients() - h.coefficients())) <= 1e-12
    ops = [np.eye(dim)] * n
    ops[chain.factor_of(k)] = v
    assert np.max(np.abs(h2.vector - kron(*ops) @ h.vector)) <= 1e-12


def test_history_state_arrays_are_read_only():
    h = build_history(InstantChain((I2,)), KET0)
    with pytest.raises(ValueError):
        h.vector[0] = 2
