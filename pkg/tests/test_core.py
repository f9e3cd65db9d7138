import numpy as np
import pytest

from mzthermo.core import (
    HilbertLabel,
    basis_state,
    eig_hermitian,
    hamming_weights,
    kron,
    kron_all,
    partial_trace,
)
from mzthermo.errors import DimensionError, NotHermitianError


def random_density(n_qubits, rng):
    d = 2**n_qubits
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestHilbertLabel:
    def test_standard_layout(self):
        lab = HilbertLabel.standard(arm_a=2, arm_b=2, sample=1, ancilla=1)
        assert lab.tags == ("a0", "a1", "b0", "b1", "s0", "anc0")
        assert lab.dim == 64
        assert lab.group("a") == ("a0", "a1")
        assert lab.group("anc") == ("anc0",)

    def test_duplicate_tags_rejected(self):
        with pytest.raises(ValueError):
            HilbertLabel(("a0", "a0"))

    def test_unknown_tag(self):
        with pytest.raises(KeyError):
            HilbertLabel(("a0",)).index("zz")


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal_phase(self):
        phi = 0.37
        got = kron(np.diag([1, np.exp(1j * phi)]), np.eye(2))
        np.testing.assert_allclose(got, np.diag([1, 1, np.exp(1j * phi), np.exp(1j * phi)]))

    def test_index_formula(self):
        rng = np.random.default_rng(1)
        A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        K = kron(A, B)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        assert abs(K[2 * i + k, 2 * j + l] - A[i, j] * B[k, l]) < 1e-15

    def test_associative(self):
        rng = np.random.default_rng(2)
        A, B, C = (rng.normal(size=(2, 2)) for _ in range(3))
        np.testing.assert_allclose(kron(kron(A, B), C), kron(A, kron(B, C)), atol=1e-15)
        np.testing.assert_allclose(kron_all([A, B, C]), kron(kron(A, B), C), atol=1e-15)


class TestPartialTrace:
    def test_product_state(self):
        rng = np.random.default_rng(3)
        ra, rb = random_density(1, rng), random_density(2, rng)
        lab = HilbertLabel(("x", "y0", "y1"))
        np.testing.assert_allclose(partial_trace(kron(ra, rb), lab, ["x"]), ra, atol=1e-14)
        np.testing.assert_allclose(partial_trace(kron(ra, rb), lab, ["y0", "y1"]), rb, atol=1e-14)

    def test_bell_state(self):
        psi = (basis_state([0, 0]) + basis_state([1, 1])) / np.sqrt(2)
        rho = np.outer(psi, psi.conj())
        got = partial_trace(rho, HilbertLabel(("p", "q")), ["p"])
        np.testing.assert_allclose(got, np.eye(2) / 2, atol=1e-15)

    def test_index_sum_oracle(self):
        rng = np.random.default_rng(4)
        rho = random_density(3, rng)
        lab = HilbertLabel(("q0", "q1", "q2"))
        expected = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                for a in range(2):
                    for c in range(2):
                        expected[i, j] += rho[4 * a + 2 * i + c, 4 * a + 2 * j + c]
        np.testing.assert_allclose(partial_trace(rho, lab, ["q1"]), expected, atol=1e-15)

    def test_trace_preserved_and_order_independent(self):
        rng = np.random.default_rng(5)
        rho = random_density(4, rng)
        lab = HilbertLabel(("a", "b", "c", "d"))
        red = partial_trace(rho, lab, ["a", "c"])
        assert abs(np.trace(red) - 1) < 1e-12
        step = partial_trace(rho, lab, ["a", "b", "c"])
        two = partial_trace(step, HilbertLabel(("a", "b", "c")), ["a", "c"])
        np.testing.assert_allclose(two, red, atol=1e-12)

    def test_keep_order_is_label_order(self):
        rng = np.random.default_rng(6)
        rho = random_density(3, rng)
        lab = HilbertLabel(("a", "b", "c"))
        np.testing.assert_array_equal(partial_trace(rho, lab, ["c", "a"]), partial_trace(rho, lab, ["a", "c"]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), HilbertLabel(("a", "b", "c")), ["a"])
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), HilbertLabel(("a", "b")), ["z"])


class TestEig:
    def test_diagonal(self):
        vals, vecs = eig_hermitian(np.diag([0.25, 0.75]))
        np.testing.assert_allclose(vals, [0.25, 0.75])
        np.testing.assert_allclose(np.abs(vecs), np.eye(2))

    def test_projector(self):
        sx = np.array([[0, 1], [1, 0]])
        vals, _ = eig_hermitian((np.eye(2) + sx) / 2)
        np.testing.assert_allclose(vals, [0, 1], atol=1e-15)

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        h = a + a.conj().T
        vals, vecs = eig_hermitian(h)
        assert np.all(np.diff(vals) >= 0)
        assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - h) < 1e-10
        off = vecs.conj().T @ h @ vecs - np.diag(vals)
        assert np.max(np.abs(off)) < 1e-10

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_hamming_weights():
    np.testing.assert_array_equal(hamming_weights(3), [0, 1, 1, 2, 1, 2, 2, 3])
