import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian
from pptmix.linalg import (
    PAULI,
    Bipartition,
    PauliString,
    bipartitions,
    check_hermitian,
    complexify,
    from_pauli_expansion,
    hermitian_eigen,
    jacobi_eigh,
    kron,
    partial_trace,
    partial_transpose,
    pauli_expansion,
    pauli_string_matrix,
    realify,
    schmidt_coefficients,
)
from pptmix.states import ghz, linear_cluster, projector

I2, X, Y, Z = (PAULI[c] for c in "IXYZ")
PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)


def _hermitian(seed, d):
    return random_hermitian(np.random.default_rng(seed), d)


def _cut(n, mask):
    members = tuple(i for i in range(n) if mask >> i & 1)
    return Bipartition(n, members)


# -- bipartitions ----------------------------------------------------------------


def test_bipartition_counts():
    for n in range(2, 8):
        assert len(bipartitions(n)) == 2 ** (n - 1) - 1
        assert len(bipartitions(n, canonical_only=False)) == 2**n - 2
    assert len(bipartitions(7)) == 63


def test_bipartition_canonical_contains_zero():
    m = Bipartition(4, (1, 3))
    assert not m.is_canonical
    assert m.canonical().members == (0, 2)
    assert m.canonical().label() == "02|13"
    assert all(0 in b for b in bipartitions(5))


@pytest.mark.parametrize("members", [(), (0, 1, 2), (3,), (-1,)])
def test_bipartition_rejects_improper(members):
    with pytest.raises(ValueError):
        Bipartition(3, members)


# -- kron and Pauli strings ----------------------------------------------------------


def test_kron_identity_and_diagonal():
    np.testing.assert_array_equal(kron(I2, I2), np.eye(4))
    np.testing.assert_array_equal(kron(Z, Z), np.diag([1, -1, -1, 1]))


def test_pauli_xz_matches_hand_expansion():
    hand = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])
    np.testing.assert_array_equal(pauli_string_matrix("XZ"), hand)


def test_pauli_string_examples():
    np.testing.assert_array_equal(pauli_string_matrix("IIII"), np.eye(16))
    np.testing.assert_array_equal(pauli_string_matrix("ZZII"), kron(Z, Z, I2, I2))
    p = pauli_string_matrix("XYZX")
    assert np.trace(p @ p).real == pytest.approx(16)
    assert PauliString("xyzi").weight == 3
    with pytest.raises(ValueError):
        PauliString("XQ")


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_pauli_expansion_round_trip(n, seed):
    h = _hermitian(seed, 2**n)
    exp = pauli_expansion(h)
    assert all(abs(c.imag) < 1e-12 for c in exp.values())
    np.testing.assert_allclose(from_pauli_expansion(exp), h, atol=1e-12)


def test_pauli_expansion_single_term():
    exp = pauli_expansion(0.3 * pauli_string_matrix("XYZ"), tol=1e-14)
    assert exp.keys() == {"XYZ"}
    assert exp["XYZ"] == pytest.approx(0.3)


# -- partial transpose and trace ---------------------------------------------------


@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.data())
def test_partial_transpose_involution_and_hermiticity(n, seed, data):
    rho = _hermitian(seed, 2**n)
    m = _cut(n, data.draw(st.integers(1, 2**n - 2)))
    t = partial_transpose(rho, m)
    check_hermitian(t)
    np.testing.assert_allclose(partial_transpose(t, m), rho, atol=1e-14)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.data())
def test_partial_transpose_commutes_on_disjoint_sets(n, seed, data):
    rho = _hermitian(seed, 2**n)
    labels = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    a = [i for i in range(n) if labels[i] == 1]
    b = [i for i in range(n) if labels[i] == 2]
    ab = partial_transpose(partial_transpose(rho, a), b)
    ba = partial_transpose(partial_transpose(rho, b), a)
    np.testing.assert_allclose(ab, ba, atol=1e-14)
    np.testing.assert_allclose(ab, partial_transpose(rho, a + b), atol=1e-14)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.data())
def test_partial_transpose_complement_is_full_transpose(n, seed, data):
    rho = _hermitian(seed, 2**n)
    m = _cut(n, data.draw(st.integers(1, 2**n - 2)))
    np.testing.assert_allclose(partial_transpose(rho, m), partial_transpose(rho.T, m.complement), atol=1e-14)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.data())
def test_partial_transpose_preserves_trace_of_spectrum(n, seed, data):
    rho = _hermitian(seed, 2**n)
    m = _cut(n, data.draw(st.integers(1, 2**n - 2)))
    ev, _ = hermitian_eigen(rho)
    evt, _ = hermitian_eigen(partial_transpose(rho, m))
    assert ev.sum() == pytest.approx(np.trace(rho).real, abs=1e-10)
    assert evt.sum() == pytest.approx(np.trace(rho).real, abs=1e-10)


def test_partial_transpose_real_product_invariant(rng):
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(4, 4))
    prod = kron(a + a.T, b + b.T)
    np.testing.assert_array_equal(partial_transpose(prod, (0,)), prod)


def test_partial_transpose_bell_min_eig():
    t = partial_transpose(projector(PHI_PLUS), (0,))
    # brute-force 4x4 eigensolve against the closed form -1/2
    assert np.linalg.eigvalsh(t)[0] == pytest.approx(-0.5, abs=1e-14)


def test_partial_transpose_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(6), (0,))
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4), Bipartition(3, (0,)))


def test_partial_trace_examples(rng):
    a, b = _hermitian(1, 2), _hermitian(2, 4)
    np.testing.assert_allclose(partial_trace(kron(a, b), (0,)), a * np.trace(b), atol=1e-14)
    np.testing.assert_allclose(partial_trace(projector(ghz(3)), (0,)), np.eye(2) / 2, atol=1e-15)
    rho = _hermitian(3, 8)
    for keep in [(), (1,), (0, 2), (0, 1, 2)]:
        assert np.trace(partial_trace(rho, keep)) == pytest.approx(np.trace(rho))


def test_partial_trace_matches_index_sum():
    rho = _hermitian(4, 8).reshape([2] * 6)
    oracle = np.einsum("ijkljn->ikln", rho).reshape(4, 4)  # trace qubit 1
    np.testing.assert_allclose(partial_trace(rho.reshape(8, 8), (0, 2)), oracle, atol=1e-14)


# -- eigensolvers -------------------------------------------------------------------


def test_hermitian_eigen_examples():
    ev, v = hermitian_eigen(np.eye(8))
    np.testing.assert_allclose(ev, 1)
    ev, _ = hermitian_eigen(kron(Z, Z), method="jacobi")
    np.testing.assert_allclose(ev, [-1, -1, 1, 1], atol=1e-14)
    with pytest.raises(ValueError):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_eigen_reconstruction_and_unitarity(method, d, seed):
    h = _hermitian(seed, d)
    ev, v = hermitian_eigen(h, method=method)
    scale = 1e-10 * (1 + np.abs(h).max())
    assert np.all(np.diff(ev) >= -scale)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-10)
    np.testing.assert_allclose(h @ v, v * ev, atol=scale * d)
    np.testing.assert_allclose((v * ev) @ v.conj().T, h, atol=scale * d)


@given(st.integers(2, 32), st.integers(0, 2**32 - 1))
def test_jacobi_agrees_with_lapack(d, seed):
    h = _hermitian(seed, d)
    np.testing.assert_allclose(jacobi_eigh(h)[0], np.linalg.eigvalsh(h), atol=1e-10)


# -- realification ------------------------------------------------------------------


def test_realify_examples():
    np.testing.assert_array_equal(realify(np.eye(3)), np.eye(6))
    np.testing.assert_allclose(np.linalg.eigvalsh(realify(Y)), [-1, -1, 1, 1], atol=1e-15)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_realify_doubles_spectrum(d, seed):
    h = _hermitian(seed, d)
    r = realify(h)
    np.testing.assert_allclose(r, r.T)
    ev = jacobi_eigh(h)[0]  # complex Jacobi as the independent oracle
    np.testing.assert_allclose(np.linalg.eigvalsh(r), np.repeat(ev, 2), atol=1e-10)
    np.testing.assert_allclose(complexify(r), h, atol=1e-15)


# -- Schmidt coefficients -----------------------------------------------------------


def test_schmidt_examples():
    np.testing.assert_allclose(schmidt_coefficients(PHI_PLUS, (0,)), [2**-0.5] * 2)
    prod = np.zeros(8)
    prod[0] = 1
    for m in bipartitions(3):
        c = schmidt_coefficients(prod, m)
        assert c[0] == pytest.approx(1)
        np.testing.assert_allclose(c[1:], 0)


def test_schmidt_cluster4_against_svd():
    psi, _ = linear_cluster(4)
    t = psi.reshape(2, 2, 2, 2)
    # one path edge crosses 01|23, three cross 02|13
    adjacent = np.linalg.svd(t.reshape(4, 4), compute_uv=False)
    alternating = np.linalg.svd(t.transpose(0, 2, 1, 3).reshape(4, 4), compute_uv=False)
    np.testing.assert_allclose(schmidt_coefficients(psi, (0, 1)), adjacent, atol=1e-14)
    np.testing.assert_allclose(schmidt_coefficients(psi, (0, 2)), alternating, atol=1e-14)
    np.testing.assert_allclose(adjacent, [2**-0.5] * 2 + [0] * 2, atol=1e-14)
    np.testing.assert_allclose(alternating, [0.5] * 4, atol=1e-14)


def test_schmidt_rejects_unnormalized():
    with pytest.raises(ValueError):
        schmidt_coefficients(np.ones(4), (0,))


@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.data())
def test_schmidt_symmetric_under_complement(n, seed, data):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    m = _cut(n, data.draw(st.integers(1, 2**n - 2)))
    a = schmidt_coefficients(psi, m)
    b = schmidt_coefficients(psi, m.complement)
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert a.size == min(2 ** len(m.members), 2 ** (n - len(m.members)))
    assert np.sum(a**2) == pytest.approx(1)
    assert np.all(a >= 0) and np.all(np.diff(a) <= 1e-15)


def test_apply_local_matches_kron():
    from pptmix.linalg import apply_local

    rho = _hermitian(7, 4)
    u = [X, Y]
    full = kron(*u)
    np.testing.assert_allclose(apply_local(rho, u), full @ rho @ full.conj().T, atol=1e-14)


def test_bipartition_ordering_by_bitmask():
    labels = [m.label() for m in bipartitions(3, canonical_only=False)]
    assert labels == ["2|01", "1|02", "12|0", "0|12", "02|1", "01|2"]
    assert list(itertools.islice((m.label() for m in bipartitions(3)), 3)) == ["0|12", "02|1", "01|2"]
