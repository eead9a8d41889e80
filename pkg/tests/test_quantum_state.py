import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import zz_unitary
from qsvm_omics.quantum_state import (
    ReducedDensityMatrixSet,
    StateVector,
    ZzMapConfig,
    amplitude_qubits,
    encode_amplitude,
    encode_angle,
    encode_zz,
    reduced_density_matrices,
    state_inner_product,
)

def test_statevector_validates_norm_and_length():
    with pytest.raises(ValueError):
        StateVector(1, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        StateVector(2, np.array([1.0, 0.0]))
    s = StateVector(1, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0.0


@pytest.mark.parametrize("p, q", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (16, 4)])
def test_amplitude_qubits(p, q):
    assert amplitude_qubits(p) == q
    assert encode_amplitude(np.arange(1, p + 1)).num_qubits == q


def test_amplitude_encoding_pads_with_zeros():
    s = encode_amplitude([3.0, 4.0, 0.0])
    np.testing.assert_allclose(s.amplitudes, [0.6, 0.8, 0.0, 0.0])


def test_amplitude_rejects_zero_vector():
    with pytest.raises(ValueError, match="unnormalizable amplitude vector"):
        encode_amplitude(np.zeros(4))


def test_angle_encoding_product_state():
    s = encode_angle([0.0, np.pi])
    # qubit 0 in |0>, qubit 1 in |1>  ->  |01>
    np.testing.assert_allclose(s.amplitudes, [0, 1, 0, 0], atol=1e-15)


def test_angle_range_checks():
    encode_angle([-1e-10, np.pi + 1e-10])
    with pytest.raises(ValueError, match="angle out of range"):
        encode_angle([-1e-3])
    with pytest.raises(ValueError, match="angle out of range"):
        encode_angle([np.pi + 1e-3])


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("reps", [1, 2])
def test_zz_matches_dense_unitary(n, reps):
    rng = np.random.default_rng(10 * n + reps)
    for _ in range(20):
        x = rng.uniform(0, np.pi, n)
        expected = zz_unitary(x, reps)[:, 0]
        got = encode_zz(x, ZzMapConfig(reps)).amplitudes
        np.testing.assert_allclose(got, expected, atol=1e-10)


def test_zz_config_rejects_bad_repetitions():
    with pytest.raises(ValueError):
        ZzMapConfig(0)


def test_inner_product_conjugates_left_argument():
    a = StateVector(1, np.array([1j, 0]))
    b = StateVector(1, np.array([1, 0]))
    assert state_inner_product(a, b) == pytest.approx(-1j)
    with pytest.raises(ValueError):
        state_inner_product(a, encode_angle([0.1, 0.2]))


def partial_trace_oracle(psi, keep, n):
    """Sum |psi><psi| over all basis states of the other qubits, entry by entry."""
    rho = np.zeros((2, 2), dtype=complex)
    for i in range(2**n):
        for j in range(2**n):
            bi = [(i >> (n - 1 - q)) & 1 for q in range(n)]
            bj = [(j >> (n - 1 - q)) & 1 for q in range(n)]
            if all(bi[q] == bj[q] for q in range(n) if q != keep):
                rho[bi[keep], bj[keep]] += psi[i] * np.conj(psi[j])
    return rho


def test_rdm_matches_explicit_partial_trace():
    rng = np.random.default_rng(3)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    rdms = reduced_density_matrices(StateVector(3, psi))
    for k in range(3):
        np.testing.assert_allclose(rdms[k], partial_trace_oracle(psi, k, 3), atol=1e-12)


def test_rdm_of_product_state_is_pure_and_local():
    x = np.array([0.3, 1.2, 2.5])
    rdms = reduced_density_matrices(encode_angle(x))
    for k, xk in enumerate(x):
        v = np.array([np.cos(xk / 2), np.sin(xk / 2)])
        np.testing.assert_allclose(rdms[k], np.outer(v, v), atol=1e-12)


def test_rdm_set_validates_shape():
    with pytest.raises(ValueError):
        ReducedDensityMatrixSet(np.zeros((2, 3, 3)))


angles = st.integers(1, 5).flatmap(
    lambda n: arrays(np.float64, n, elements=st.floats(0, np.pi, allow_nan=False))
)


@settings(max_examples=60, deadline=None)
@given(angles, st.integers(1, 3))
def test_zz_states_are_normalized_with_valid_rdms(x, reps):
    s = encode_zz(x, ZzMapConfig(reps))
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0, abs=1e-12)
    for rho in reduced_density_matrices(s).per_qubit:
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(rho).min() >= -1e-12


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_amplitude_encoding_is_unit_norm(x):
    if not x.any():
        return
    s = encode_amplitude(x)
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0, abs=1e-12)
    assert 2**s.num_qubits >= len(x)
