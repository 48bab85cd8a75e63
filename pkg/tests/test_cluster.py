import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from pptmix.cluster import (
    BSet,
    build_cluster_witness,
    build_pplus,
    cluster_projector,
    construct_pm,
    default_bset,
    end_hadamards,
    noise_tolerance_exact,
    noise_tolerance_formula,
    straddling_count,
    verify_full_decomposability,
    witness_zero_crossing,
)
from pptmix.linalg import Bipartition, bipartitions, partial_transpose, pauli_expansion, pauli_string_matrix
from pptmix.states import GraphSpec, graph_basis_vector, linear_cluster, projector, stabilizer_generators


def _gens(n):
    return [g.matrix() for g in stabilizer_generators(GraphSpec.path(n))]


def _random_graph(n, seed):
    rng = np.random.default_rng(seed)
    return GraphSpec(n, frozenset(e for e in itertools.combinations(range(n), 2) if rng.random() < 0.5))


def _flip(a, qubits):
    b = list(a)
    for q in qubits:
        b[q] ^= 1
    return b


# -- B-sets ------------------------------------------------------------------------


@pytest.mark.parametrize("n,members", [(4, (0, 3)), (5, (0, 3)), (7, (0, 3, 6)), (8, (0, 3, 6)), (10, (0, 3, 6, 9))])
def test_default_bset(n, members):
    assert default_bset(n).members == members


@pytest.mark.parametrize("n", [2, 3])
def test_default_bset_rejects_small_n(n):
    with pytest.raises(ValueError):
        default_bset(n)


@pytest.mark.parametrize("members", [(0, 2), (0,), (1, 1), (0, 7)])
def test_bset_invariants(members):
    with pytest.raises(ValueError):
        BSet(6, members)


def test_bset_windows():
    b = BSet(7, (0, 3, 6))
    assert [b.window(i) for i in range(3)] == [(0, 1), (2, 3, 4), (5, 6)]


# -- P_+ and the witness ----------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_pplus_projector_properties(n):
    b = default_bset(n)
    pp = build_pplus(n, b)
    np.testing.assert_allclose(pp @ pp, pp, atol=1e-12)
    m = b.m
    assert round(np.trace(pp).real) == 2 ** (n - m) * (2**m - m - 1)
    psi, _ = linear_cluster(n)
    np.testing.assert_allclose(pp @ psi, 0, atol=1e-12)
    for g in _gens(n):
        assert np.abs(pp @ g - g @ pp).max() <= 1e-12


def test_pplus_n4_closed_form():
    g = _gens(4)
    np.testing.assert_allclose(build_pplus(4), (np.eye(16) - g[0]) @ (np.eye(16) - g[3]) / 4, atol=1e-14)


def test_witness_n4_matches_closed_form():
    g = _gens(4)
    e = np.eye(16)
    expected = 0.5 * e - cluster_projector(4) - (e - g[0]) @ (e - g[3]) / 8
    np.testing.assert_allclose(build_cluster_witness(4), expected, atol=1e-12)


def test_witness_n4_in_zz_frame():
    h = end_hadamards(4)
    w = h @ build_cluster_witness(4) @ h.conj().T
    e = np.eye(16)
    g1, g4 = pauli_string_matrix("ZZII"), pauli_string_matrix("IIZZ")
    cl = h @ cluster_projector(4) @ h.conj().T
    np.testing.assert_allclose(w, 0.5 * e - cl - (e - g1) @ (e - g4) / 8, atol=1e-12)
    # the P_+ cross term alone gives -1/8; the cluster projector adds another -1/16
    assert pauli_expansion(w)["ZZZZ"].real == pytest.approx(-3 / 16)


def test_witness_n7_matches_four_term_sum():
    g = _gens(7)
    e = np.eye(2**7)
    terms = [(-1, -1, -1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    pp = sum((e + s1 * g[0]) @ (e + s4 * g[3]) @ (e + s7 * g[6]) for s1, s4, s7 in terms) / 16
    expected = 0.5 * e - cluster_projector(7) - pp
    np.testing.assert_allclose(build_cluster_witness(7), expected, atol=1e-12)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_witness_cluster_expectation(n):
    psi, _ = linear_cluster(n)
    assert np.vdot(psi, build_cluster_witness(n) @ psi).real == pytest.approx(-0.5)


# -- tolerance formula ------------------------------------------------------------------


def test_noise_tolerance_values():
    assert noise_tolerance_exact(4) == Fraction(8, 13)
    assert noise_tolerance_exact(7) == Fraction(64, 95)
    values = {n: noise_tolerance_formula(n) for n in range(4, 41)}
    assert all(0 < v < 1 for v in values.values())
    # rises whenever k = floor((n + 2) / 3) steps up, dips slightly inside each plateau
    steps = [values[n] for n in range(4, 41, 3)]
    assert all(a < b for a, b in zip(steps, steps[1:]))
    assert values[5] < values[4] and values[6] < values[5]
    assert 1 - values[40] < 1e-3
    with pytest.raises(ValueError):
        noise_tolerance_exact(3)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_zero_crossing_matches_formula(n):
    psi, _ = linear_cluster(n)
    assert witness_zero_crossing(build_cluster_witness(n), psi) == pytest.approx(noise_tolerance_formula(n), abs=1e-10)


# -- P_M construction --------------------------------------------------------------------


def test_eight_qubit_worked_example():
    con = construct_pm(8, BSet(8, (0, 3, 6)), Bipartition(8, (1, 2, 4)))
    assert con.r == 2 and con.t == 1
    assert con.labels == [(0, 1, 0, 0, 0, 0, 0, 0)]
    target = graph_basis_vector(GraphSpec.path(8), [0, 1, 0, 0, 0, 0, 0, 0])
    np.testing.assert_allclose(con.p_m, projector(target), atol=1e-12)


def test_interior_bset_gives_zero_pm():
    # every closed neighbourhood lies on one side
    con = construct_pm(7, default_bset(7), Bipartition(7, (0, 1, 2, 3, 4)))
    assert con.r == 0
    assert not con.p_m.any()


def test_r_matches_brute_force_count_n6():
    n, b = 6, default_bset(6)
    path = GraphSpec.path(n)
    for m in bipartitions(n, canonical_only=False):
        inside = set(m.members)
        brute = sum(
            not (path.closed_neighborhood(beta) <= inside or path.closed_neighborhood(beta).isdisjoint(inside))
            for beta in b.members
        )
        con = construct_pm(n, b, m)
        assert con.r == brute == straddling_count(n, b, m)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_pm_labels_have_zero_bset_bits(n):
    b = default_bset(n)
    for m in bipartitions(n):
        con = construct_pm(n, b, m)
        assert all(all(lab[q] == 0 for q in b.members) for lab in con.labels)
        assert np.linalg.eigvalsh(con.p_m)[0] >= -1e-12
        if con.r <= 1:
            assert not con.labels


@pytest.mark.parametrize("n", [4, 5, 6])
def test_full_decomposability(n):
    report = verify_full_decomposability(build_cluster_witness(n), n)
    assert report.passed
    assert report.summary() == f"{2 ** (n - 1) - 1}/{2 ** (n - 1) - 1} bipartitions PSD"
    assert report.worst_q >= -1e-9
    for c in report.checks:
        assert c.residual <= 1e-12


def test_perturbed_witness_fails():
    n = 4
    w = build_cluster_witness(n) - 0.1 * build_pplus(n)
    report = verify_full_decomposability(w, n)
    assert not report.passed
    assert report.failures()


def test_parallel_verification_matches():
    w = build_cluster_witness(5)
    a = verify_full_decomposability(w, 5)
    b = verify_full_decomposability(w, 5, jobs=2)
    assert [c.min_eig_q for c in a.checks] == [c.min_eig_q for c in b.checks]


# -- graph-basis lemmas -------------------------------------------------------------------


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_transpose_kills_flips_on_one_sided_qubits(n, seed, data):
    g = _random_graph(n, seed)
    m = data.draw(st.integers(1, 2**n - 2))
    inside = {i for i in range(n) if m >> i & 1}
    one_sided = [k for k in range(n) if g.closed_neighborhood(k) <= inside or g.closed_neighborhood(k).isdisjoint(inside)]
    assume(one_sided)
    a = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    k = data.draw(st.sampled_from(one_sided))
    extra = data.draw(st.lists(st.integers(0, n - 1), max_size=n))
    b = _flip(_flip(a, [k]), [q for q in extra if q != k])
    va, vb = graph_basis_vector(g, a), graph_basis_vector(g, b)
    t = partial_transpose(np.outer(va, va.conj()), sorted(inside))
    assert abs(np.vdot(vb, t @ vb)) <= 1e-10


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_transposed_diagonal_bounded_by_schmidt(n, seed, data):
    from pptmix.linalg import schmidt_coefficients

    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    mask = data.draw(st.integers(1, 2**n - 2))
    m = Bipartition(n, tuple(i for i in range(n) if mask >> i & 1))
    lam = schmidt_coefficients(psi, m)
    t = partial_transpose(np.outer(psi, psi.conj()), m)
    u = unitary_group.rvs(2**n, random_state=rng)
    diag = np.einsum("ij,ik,kj->j", u.conj(), t, u).real
    assert diag.max() <= lam[0] ** 2 + 1e-10
    assert np.linalg.eigvalsh(t)[-1] == pytest.approx(lam[0] ** 2, abs=1e-10)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_paired_projectors_are_transpose_invariant(n, seed, data):
    g = _random_graph(n, seed)
    a = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    k = data.draw(st.integers(0, n - 1))
    for flips in ([k], sorted(g.neighbors(k))):
        va, vb = graph_basis_vector(g, a), graph_basis_vector(g, _flip(a, flips))
        s = np.outer(va, va.conj())
        s = s + np.outer(vb, vb.conj()) if flips else 2 * s
        np.testing.assert_allclose(partial_transpose(s, [k]), s, atol=1e-12)
