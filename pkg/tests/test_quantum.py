import hashlib
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tomoq.probcore import Permutation
from tomoq.quantum import (
    DensityMatrix,
    StateError,
    UnitaryMatrix,
    bell_state,
    eigenvalue_vector,
    haar_batch,
    haar_sample,
    hermitian_eigensystem,
    is_degenerate,
    jacobi_eigh,
    local_unitary,
    marginal_tomogram,
    maximally_mixed,
    partial_trace,
    permutation_conjugate,
    product_state,
    pure_state,
    quantum_q_entropy,
    random_density,
    spin_projections,
    tomogram,
    tomogram_probs,
    vectorized_tomogram,
    von_neumann_entropy,
)

LN2 = math.log(2.0)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def brute_partial_trace(mat, dims, keep):
    """Explicit index loops over the traced-out factors."""
    kept = [dims[i] for i in keep]
    size = math.prod(kept)
    out = np.zeros((size, size), dtype=complex)
    t = mat.reshape(tuple(dims) * 2)
    drop = [i for i in range(len(dims)) if i not in keep]
    for a in itertools.product(*(range(d) for d in kept)):
        for b in itertools.product(*(range(d) for d in kept)):
            acc = 0.0
            for k in itertools.product(*(range(dims[i]) for i in drop)):
                row, col = [0] * len(dims), [0] * len(dims)
                for pos, i in enumerate(keep):
                    row[i], col[i] = a[pos], b[pos]
                for pos, i in enumerate(drop):
                    row[i] = col[i] = k[pos]
                acc += t[tuple(row) + tuple(col)]
            ia = np.ravel_multi_index(a, kept)
            ib = np.ravel_multi_index(b, kept)
            out[ia, ib] = acc
    return out


class TestDensityMatrix:
    def test_validation(self):
        with pytest.raises(StateError):
            DensityMatrix([[0.5, 0.1], [0.2, 0.5]])
        with pytest.raises(StateError):
            DensityMatrix(np.eye(2))
        with pytest.raises(StateError):
            DensityMatrix(np.diag([1.2, -0.2]))
        with pytest.raises(StateError):
            DensityMatrix(np.eye(4) / 4, (2, 3))

    def test_json_roundtrip(self, rng):
        rho = random_density((2, 3), seed=5)
        back = DensityMatrix.from_json(rho.to_json())
        assert back.dims == (2, 3)
        assert np.array_equal(back.mat, rho.mat)
        u = haar_sample(3, 1)
        assert np.array_equal(UnitaryMatrix.from_json(u.to_json()).mat, u.mat)
        assert "dims" not in u.to_dict()

    def test_unitary_validation(self):
        with pytest.raises(StateError):
            UnitaryMatrix([[1, 1], [0, 1]])


class TestEigensystem:
    def test_identity_over_n(self):
        evals, u0 = hermitian_eigensystem(np.eye(4) / 4)
        assert np.allclose(evals, 0.25, atol=1e-15)

    def test_diagonal(self):
        evals, u0 = hermitian_eigensystem(np.diag([0.7, 0.3]))
        assert evals.tolist() == pytest.approx([0.7, 0.3], abs=1e-15)
        assert np.allclose(u0.mat, np.eye(2), atol=1e-15)
        evals, u0 = hermitian_eigensystem(np.diag([0.3, 0.7]))
        assert np.allclose(np.abs(u0.mat), [[0, 1], [1, 0]], atol=1e-15)

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_reconstruction(self, rng, method):
        for n in (1, 2, 4, 7, 12):
            h = random_hermitian(rng, n)
            evals, u0 = hermitian_eigensystem(h, method)
            assert np.all(np.diff(evals) <= 0)
            assert np.max(np.abs(u0.mat.conj().T @ u0.mat - np.eye(n))) < 1e-9
            assert np.max(np.abs(u0.mat @ np.diag(evals) @ u0.mat.conj().T - h)) < 1e-8

    def test_jacobi_matches_lapack(self, rng):
        for n in (2, 3, 6, 16):
            h = random_hermitian(rng, n)
            ev_j, vec_j = hermitian_eigensystem(h, "jacobi")
            ev_l, vec_l = hermitian_eigensystem(h, "lapack")
            assert np.allclose(ev_j, ev_l, atol=1e-11)
            # nondegenerate spectrum + phase convention fixes the vectors
            assert np.allclose(vec_j.mat, vec_l.mat, atol=1e-9)

    def test_phase_convention(self, rng):
        _, u0 = hermitian_eigensystem(random_hermitian(rng, 5))
        cols = u0.mat.T
        for c in cols:
            lead = c[np.argmax(np.abs(c))]
            assert abs(lead.imag) < 1e-15 and lead.real > 0

    def test_jacobi_degenerate(self):
        evals, vecs = jacobi_eigh(np.eye(3))
        assert np.allclose(evals, 1.0) and np.allclose(vecs, np.eye(3))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            hermitian_eigensystem(np.eye(2), "power")

    def test_degeneracy_flag(self):
        assert is_degenerate([0.5, 0.5])
        assert not is_degenerate([0.7, 0.3])

    def test_eigenvalues_of_random_states(self):
        for seed in range(100):
            lam = eigenvalue_vector(random_density((2, 2), seed=seed)).components
            assert lam.min() >= 0 and abs(lam.sum() - 1) < 1e-12


class TestPartialTrace:
    def test_product(self, rng):
        for _ in range(20):
            a = random_density(int(rng.integers(1, 4)), seed=int(rng.integers(1 << 30)))
            b = random_density(int(rng.integers(1, 4)), seed=int(rng.integers(1 << 30)))
            rho = product_state(a, b)
            assert np.max(np.abs(partial_trace(rho, 0).mat - a.mat)) <= 1e-12
            assert np.max(np.abs(partial_trace(rho, 1).mat - b.mat)) <= 1e-12

    def test_bell(self):
        for keep in (0, 1):
            assert np.max(np.abs(partial_trace(bell_state(), keep).mat - np.eye(2) / 2)) <= 1e-12

    def test_mixed_2x3(self):
        assert np.allclose(partial_trace(maximally_mixed((2, 3)), 0).mat, np.eye(2) / 2, atol=1e-15)

    def test_against_loops(self):
        for dims, keep in [((2, 3), (1,)), ((2, 2, 2), (0, 2)), ((3, 2, 2), (1,)), ((2, 3, 2), (0, 1))]:
            rho = random_density(dims, seed=sum(dims))
            pt = partial_trace(rho, keep)
            assert pt.dims == tuple(dims[i] for i in keep)
            assert np.allclose(pt.mat, brute_partial_trace(rho.mat, dims, keep), atol=1e-14)

    def test_errors(self):
        with pytest.raises(ValueError):
            partial_trace(maximally_mixed(4), 0)
        with pytest.raises(ValueError):
            partial_trace(bell_state(), 2)


class TestTomogram:
    def test_labels(self):
        assert spin_projections(3) == [1.0, 0.0, -1.0]
        t = tomogram(maximally_mixed((2, 2)), UnitaryMatrix.identity(4))
        assert t.labels == [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)]

    def test_maximally_mixed(self):
        for n in (1, 3, 5):
            t = tomogram(maximally_mixed(n), haar_sample(n, n))
            assert t.probs.allclose(np.full(n, 1 / n))

    def test_basis_state(self):
        t = tomogram(pure_state([1, 0, 0]), UnitaryMatrix.identity(3))
        assert t.probs.allclose([1, 0, 0], atol=0)

    def test_direct_definition(self, rng):
        rho = random_density(3, seed=2)
        u = haar_sample(3, 3)
        probs = tomogram(rho, u).probs.components
        for m in range(3):
            e = np.zeros(3)
            e[m] = 1
            assert probs[m] == pytest.approx((e @ u.mat.conj().T @ rho.mat @ u.mat @ e).real, abs=1e-15)

    def test_normalization(self, rng):
        for seed in range(50):
            n = 2 + seed % 5
            t = tomogram(random_density(n, seed=seed), haar_sample(n, seed + 1000))
            assert abs(t.probs.components.sum() - 1) <= 1e-10

    def test_vectorized_identity(self):
        for seed in range(100):
            n = 2 + seed % 5
            rho = random_density(n, rank=1 + seed % n, seed=seed)
            u = haar_sample(n, 10_000 + seed)
            assert vectorized_tomogram(rho, u).allclose(tomogram(rho, u).probs.components, atol=1e-10)

    def test_bell_marginals(self):
        t = tomogram(bell_state(), UnitaryMatrix.identity(4))
        for keep in (0, 1):
            assert marginal_tomogram(t, keep).probs.allclose([0.5, 0.5], atol=1e-15)

    def test_uniform_marginals(self):
        t = tomogram(maximally_mixed((2, 3)), haar_sample(6, 4))
        assert marginal_tomogram(t, 1).probs.allclose(np.full(3, 1 / 3))

    def test_marginal_matches_partial_trace(self):
        for seed in range(30):
            rho = random_density((2, 3), seed=seed)
            u1, u2 = haar_sample(2, seed), haar_sample(3, seed + 1)
            t = tomogram(rho, local_unitary(u1, u2))
            for keep, u in ((0, u1), (1, u2)):
                ref = tomogram(partial_trace(rho, keep), u).probs
                assert marginal_tomogram(t, keep).probs.allclose(ref.components, atol=1e-10)

    def test_product_marginal(self):
        a, b = random_density(2, seed=1), random_density(2, seed=2)
        u1, u2 = haar_sample(2, 3), haar_sample(2, 4)
        t = tomogram(product_state(a, b), local_unitary(u1, u2))
        assert marginal_tomogram(t, 0).probs.allclose(tomogram(a, u1).probs.components)

    def test_batch_matches_single(self):
        rho = random_density(4, seed=9)
        us = haar_batch(4, 5, 9)
        batch = tomogram_probs(rho, us)
        for k in range(5):
            assert np.allclose(batch[k], tomogram(rho, UnitaryMatrix(us[k])).probs.components, atol=1e-15)


class TestHaar:
    def test_dim_one(self):
        u = haar_sample(1, 0)
        assert u.mat.shape == (1, 1) and abs(abs(u.mat[0, 0]) - 1) < 1e-15

    def test_unitarity(self):
        for seed in range(100):
            n = 2 + seed % 5
            u = haar_sample(n, seed).mat
            assert np.max(np.abs(u.conj().T @ u - np.eye(n))) < 1e-9

    def test_seeded(self):
        assert np.array_equal(haar_sample(3, 11).mat, haar_sample(3, 11).mat)
        assert not np.array_equal(haar_sample(3, 11).mat, haar_sample(3, 12).mat)

    def test_first_moment(self):
        rho = random_density(3, seed=4)
        w = haar_batch(3, 20_000, 77)
        comp = tomogram_probs(rho, w)[:, 0]
        se = comp.std(ddof=1) / math.sqrt(comp.size)
        assert abs(comp.mean() - 1 / 3) <= 4 * se

    def test_second_moment(self):
        # E|u_00|^4 = 2 / (N (N + 1)) for Haar unitaries
        n = 3
        u = haar_batch(n, 20_000, 5)
        x = np.abs(u[:, 0, 0]) ** 4
        assert abs(x.mean() - 2 / (n * (n + 1))) <= 4 * x.std(ddof=1) / math.sqrt(x.size)


class TestRandomDensity:
    def test_rank_one_pure(self):
        for seed in range(10):
            assert abs(von_neumann_entropy(random_density((2, 2), rank=1, seed=seed))) <= 1e-9

    def test_reproducible(self):
        digest = lambda r: hashlib.sha256(r.mat.tobytes()).hexdigest()  # noqa: E731
        assert digest(random_density((2, 2), seed=42)) == digest(random_density((2, 2), seed=42))
        assert digest(random_density((2, 2), seed=42)) != digest(random_density((2, 2), seed=43))

    def test_rank(self):
        lam = eigenvalue_vector(random_density(5, rank=2, seed=3)).components
        assert np.sum(lam > 1e-12) == 2
        with pytest.raises(ValueError):
            random_density((2, 2), rank=5)


class TestQuantumEntropy:
    def test_von_neumann(self):
        assert von_neumann_entropy(bell_state()) == pytest.approx(0.0, abs=1e-12)
        assert von_neumann_entropy(maximally_mixed(5)) == pytest.approx(math.log(5), abs=1e-12)
        expected = -0.7 * math.log(0.7) - 0.3 * math.log(0.3)
        assert expected == pytest.approx(0.610864, abs=1e-6)
        assert von_neumann_entropy(DensityMatrix(np.diag([0.7, 0.3]))) == pytest.approx(expected, abs=1e-15)

    def test_q_entropies(self):
        assert quantum_q_entropy(bell_state(), 3.0, "renyi") == pytest.approx(0.0, abs=1e-12)
        assert quantum_q_entropy(bell_state(), 0.5, "tsallis") == pytest.approx(0.0, abs=1e-12)
        half = maximally_mixed(2)
        assert quantum_q_entropy(half, 2, "renyi") == pytest.approx(LN2, abs=1e-15)
        assert quantum_q_entropy(half, 2, "tsallis") == pytest.approx(0.5, abs=1e-15)
        rho = random_density(3, seed=1)
        for kind in ("renyi", "tsallis"):
            assert abs(quantum_q_entropy(rho, 1, kind) - von_neumann_entropy(rho)) <= 1e-10
        with pytest.raises(ValueError):
            quantum_q_entropy(rho, 2, "shannon")


class TestPermutationConjugate:
    def test_identity(self, rng):
        h = random_hermitian(rng, 3)
        assert np.array_equal(permutation_conjugate(h, Permutation.identity(3)), h)

    def test_swap_diag(self):
        out = permutation_conjugate(np.diag([0.2, 0.8]), Permutation.swap(2, 0, 1))
        assert np.array_equal(out, np.diag([0.8, 0.2]))

    def test_matches_matrix_product(self, rng):
        h = random_hermitian(rng, 5)
        perm = Permutation.random(5, rng)
        p = perm.matrix()
        assert np.allclose(permutation_conjugate(h, perm), p @ h @ p.T, atol=0)

    @settings(max_examples=100)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_invariants(self, n, seed):
        rng = np.random.default_rng(seed)
        h = random_hermitian(rng, n)
        out = permutation_conjugate(h, Permutation.random(n, rng))
        assert np.allclose(out, out.conj().T, atol=0)
        assert abs(np.trace(out) - np.trace(h)) <= 1e-12
        assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(h), atol=1e-9)
