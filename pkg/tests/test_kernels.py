import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qsvm_omics.kernels import (
    KERNEL_IDS,
    GramMatrix,
    KernelSpec,
    angle_kernel_closed_form,
    cross_gram_matrix,
    gram_matrix,
    kernel_value,
    qubit_count,
    read_gram_csv,
    resolve_spec,
    scale_gamma,
)


def test_from_id_roundtrip():
    for kid in KERNEL_IDS:
        assert KernelSpec.from_id(kid).id == kid
    with pytest.raises(ValueError):
        KernelSpec.from_id("laplacian")


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("fidelity", "qft")
    with pytest.raises(ValueError):
        KernelSpec("rbf", "angle")
    with pytest.raises(ValueError):
        KernelSpec("rbf", gamma=-1.0)
    with pytest.raises(ValueError):
        KernelSpec("poly", degree=0)
    assert KernelSpec("projected", "zz").gamma == 1.0


def test_rbf_needs_resolved_gamma():
    with pytest.raises(ValueError, match="unresolved"):
        kernel_value(KernelSpec("rbf"), [0.0], [1.0])


def test_scale_gamma_heuristic():
    X = np.array([[0.0, 2.0], [2.0, 0.0]])
    assert scale_gamma(X) == pytest.approx(1.0 / (2 * 1.0))
    assert scale_gamma(np.ones((3, 2))) == 1.0
    assert resolve_spec(KernelSpec("rbf"), X).gamma == pytest.approx(0.5)


def test_classical_kernel_values():
    x, y = np.array([1.0, 2.0]), np.array([0.0, 1.0])
    assert kernel_value(KernelSpec("rbf", gamma=0.5), x, y) == pytest.approx(np.exp(-1.0))
    assert kernel_value(KernelSpec("poly", degree=2, coef=1.0), x, y) == pytest.approx(9.0)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        kernel_value(KernelSpec("fidelity", "angle"), [0.1, 0.2], [0.1])


@pytest.mark.parametrize("d", [1, 3, 8])
def test_fidelity_oracles(d):
    rng = np.random.default_rng(d)
    for _ in range(50):
        x, y = rng.uniform(0, np.pi, d), rng.uniform(0, np.pi, d)
        assert kernel_value(KernelSpec("fidelity", "angle"), x, y) == pytest.approx(
            angle_kernel_closed_form(x, y), abs=1e-10
        )
        a, b = rng.normal(size=d), rng.normal(size=d)
        expect = (a @ b) ** 2 / ((a @ a) * (b @ b))
        assert kernel_value(KernelSpec("fidelity", "amplitude"), a, b) == pytest.approx(expect, abs=1e-10)


def test_projected_angle_kernel_closed_form():
    # For a product state, rho_k = v v^T with v = (cos x/2, sin x/2), and
    # ||v v^T - w w^T||_F^2 = 2 (1 - cos^2((x - y)/2)) = 2 sin^2((x - y)/2).
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.uniform(0, np.pi, 4), rng.uniform(0, np.pi, 4)
        expect = np.exp(-0.7 * np.sum(2 * np.sin((x - y) / 2) ** 2))
        got = kernel_value(KernelSpec("projected", "angle", gamma=0.7), x, y)
        assert got == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("kid", KERNEL_IDS)
def test_gram_matrix_structure(kid):
    rng = np.random.default_rng(1)
    X = rng.uniform(0, np.pi, (12, 3))
    spec = resolve_spec(KernelSpec.from_id(kid), X)
    G = gram_matrix(spec, X)
    G.check()
    np.testing.assert_array_equal(G.values, G.values.T)
    for i, j in [(0, 1), (3, 7), (11, 2)]:
        assert G.values[i, j] == pytest.approx(kernel_value(spec, X[i], X[j]), abs=1e-14)


def test_cross_gram_matches_gram_block_and_threads():
    rng = np.random.default_rng(2)
    X = rng.uniform(0, np.pi, (10, 3))
    spec = KernelSpec("fidelity", "zz")
    G = gram_matrix(spec, X).values
    np.testing.assert_allclose(cross_gram_matrix(spec, X[:4], X), G[:4], atol=1e-14)
    np.testing.assert_array_equal(gram_matrix(spec, X, n_jobs=2).values, G)


def test_gram_check_detects_broken_matrices():
    spec = KernelSpec("fidelity", "angle")
    with pytest.raises(ValueError, match="symmetric"):
        GramMatrix(np.array([[1.0, 0.5], [0.2, 1.0]]), spec).check()
    with pytest.raises(ValueError, match="diagonal"):
        GramMatrix(np.array([[0.9, 0.5], [0.5, 1.0]]), spec).check()
    with pytest.raises(ValueError, match="semidefinite"):
        GramMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]), spec).check()
    with pytest.raises(ValueError):
        GramMatrix(np.ones((2, 3)), spec)


def test_gram_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    G = gram_matrix(KernelSpec("fidelity", "zz"), rng.uniform(0, np.pi, (5, 2)), row_ids="abcde")
    assert G.row_ids == tuple("abcde")
    G.to_csv(tmp_path / "k.csv")
    np.testing.assert_array_equal(read_gram_csv(tmp_path / "k.csv"), G.values)


def test_qubit_counts():
    assert qubit_count(KernelSpec("rbf", gamma=1.0), 8) == 0
    for d, q in [(2, 1), (4, 2), (8, 3), (16, 4)]:
        assert qubit_count(KernelSpec("fidelity", "amplitude"), d) == q
        assert qubit_count(KernelSpec("projected", "zz"), d) == d


pairs = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, n, elements=st.floats(0, np.pi)),
        arrays(np.float64, n, elements=st.floats(0, np.pi)),
    )
)


@settings(max_examples=80, deadline=None)
@given(pairs, st.sampled_from(["amplitude", "angle", "zz"]))
def test_quantum_kernels_bounded_symmetric(xy, encoding):
    x, y = xy
    if encoding == "amplitude" and (not x.any() or not y.any()):
        return
    for kind in ("fidelity", "projected"):
        spec = KernelSpec(kind, encoding)
        k = kernel_value(spec, x, y)
        assert -1e-12 <= k <= 1 + 1e-12
        assert k == pytest.approx(kernel_value(spec, y, x), abs=1e-12)
        assert kernel_value(spec, x, x) == pytest.approx(1.0, abs=1e-12)
