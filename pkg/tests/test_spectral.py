import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sriplab.dictionary import (AtomId, build_heisenberg, build_random_onb_union,
                                resolution_apply)
from sriplab.spectral import (BudgetExceededError, EigenConvergenceError, NotHermitianError,
                              gram, hermitian_eigenvalues, rip_deviation, rip_exact_check)
from sriplab.stats import sample_support

import oracles


def test_gram_single_basis_is_identity():
    d = build_heisenberg(7)
    G = gram(d, [(2, i) for i in range(7)])
    np.testing.assert_allclose(G, np.eye(7), atol=1e-10)


def test_gram_delta_chirp_pair():
    d = build_heisenberg(5)
    G = gram(d, [(0, 0), (2, 0)])
    ref = oracles.inner(oracles.delta_atom(5, 0), oracles.chirp_atom(5, 1, 0))
    assert abs(G[0, 1]) == pytest.approx(5 ** -0.5, abs=1e-10)
    assert G[0, 1] == pytest.approx(ref, abs=1e-12)


def test_gram_matches_resolution_oracle():
    d = build_heisenberg(11)
    s = sample_support(d, 6, seed=12)
    cols = np.column_stack([resolution_apply(d, {a: 1.0}) for a in s])
    # G[i, j] = <phi_i, phi_j> = (Theta_S^* Theta_S)[j, i]
    ref = (cols.conj().T @ cols).T
    np.testing.assert_allclose(gram(d, s), ref, atol=1e-10)
    G = gram(d, s)
    np.testing.assert_allclose(G, G.conj().T, atol=1e-12)
    np.testing.assert_allclose(np.diag(G), 1.0, atol=1e-10)


def test_gram_rejects_duplicates():
    d = build_heisenberg(5)
    with pytest.raises(ValueError, match="duplicate"):
        gram(d, [(1, 1), (2, 2), (1, 1)])


def test_eigen_identity():
    res = hermitian_eigenvalues(np.eye(4))
    np.testing.assert_allclose(res.eigenvalues, [1, 1, 1, 1])
    assert res.residual <= 1e-15


@pytest.mark.parametrize("c", [0.3, 0.5 - 0.2j, 1j, 0.0])
def test_eigen_two_by_two(c):
    res = hermitian_eigenvalues([[1, c], [np.conj(c), 1]])
    np.testing.assert_allclose(res.eigenvalues, [1 - abs(c), 1 + abs(c)], atol=1e-14)


def test_eigen_random_cubic_vs_charpoly():
    rng = np.random.default_rng(2024)
    M = oracles.random_hermitian(rng, 3)
    ref = oracles.eigenvalues_by_charpoly(M)
    assert len(ref) == 3
    np.testing.assert_allclose(hermitian_eigenvalues(M).eigenvalues, ref, atol=1e-8)


def test_eigen_sorted_and_residual():
    rng = np.random.default_rng(1)
    M = oracles.random_hermitian(rng, 25)
    res = hermitian_eigenvalues(M)
    assert np.all(np.diff(res.eigenvalues) >= 0)
    assert res.residual <= 1e-8 * np.linalg.norm(M)
    assert res.eigenvalues.sum() == pytest.approx(np.trace(M).real, abs=1e-8 * 25)


def test_eigen_degenerate_spectrum():
    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    lam = np.array([-1.0, -1.0, 2.0, 2.0, 2.0, 5.0])
    M = Q @ np.diag(lam) @ Q.conj().T
    np.testing.assert_allclose(hermitian_eigenvalues(M).eigenvalues, lam, atol=1e-10)


def test_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigenvalues([[1.0, 2.0], [0.0, 1.0]])


def test_eigen_nonconvergence_reports_mass():
    rng = np.random.default_rng(8)
    M = oracles.random_hermitian(rng, 10)
    with pytest.raises(EigenConvergenceError) as info:
        hermitian_eigenvalues(M, max_sweeps=1)
    assert info.value.off_mass > 0


def test_eigen_zero_matrix():
    np.testing.assert_array_equal(hermitian_eigenvalues(np.zeros((3, 3))).eigenvalues, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_eigen_trace_frobenius(n, seed):
    M = oracles.random_hermitian(np.random.default_rng(seed), n)
    lam = hermitian_eigenvalues(M).eigenvalues
    assert lam.sum() == pytest.approx(np.trace(M).real, abs=1e-8 * n)
    assert np.sum(lam ** 2) == pytest.approx(np.sum(np.abs(M) ** 2), abs=1e-8 * max(1, n * n))


def test_rip_deviation_trivial_cases():
    d = build_heisenberg(5)
    assert rip_deviation(d, [(3, i) for i in range(5)]) <= 1e-9
    assert rip_deviation(d, [(2, 4)]) <= 1e-10


def test_rip_deviation_pair():
    d = build_heisenberg(5)
    assert rip_deviation(d, [(0, 0), (2, 0)]) == pytest.approx(5 ** -0.5, abs=1e-9)


def _random_support(d, rng, n):
    flat = rng.choice(d.n_atoms, size=n, replace=False)
    return [d.atom_id(k) for k in flat]


def test_rip_deviation_pair_bound_and_monotone():
    d = build_random_onb_union(7, 4, seed=3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = _random_support(d, rng, 8)
        G = gram(d, s)
        dev = rip_deviation(d, s)
        off = np.abs(G - np.diag(np.diag(G)))
        assert dev >= off.max() - 1e-9
        sub = [s[k] for k in sorted(rng.choice(8, size=5, replace=False))]
        assert rip_deviation(d, sub) <= dev + 1e-9


def test_rip_exact_heisenberg_p5_pairs():
    d = build_heisenberg(5)
    rep = rip_exact_check(d, 2)
    assert rep.n_supports == 30 + 435
    assert rep.delta == pytest.approx(5 ** -0.5, abs=1e-9)
    a, b = rep.argmax_support
    assert a.basis != b.basis
    assert rep.upper == pytest.approx(5 ** -0.5, abs=1e-9)
    assert rep.lower == pytest.approx(5 ** -0.5, abs=1e-9)


@pytest.mark.parametrize("p", [5, 7, 11])
def test_rip_exact_pairs_equal_worst_pair(p):
    assert rip_exact_check(build_heisenberg(p), 2).delta == pytest.approx(p ** -0.5, abs=1e-9)


def test_rip_exact_single_basis_zero():
    d = build_random_onb_union(5, 1, seed=2)
    assert rip_exact_check(d, 4).delta <= 1e-9


def test_rip_exact_monotone_and_bruteforce_p5():
    d = build_heisenberg(5)
    r2 = rip_exact_check(d, 2)
    r3 = rip_exact_check(d, 3)
    assert r3.delta >= r2.delta - 1e-12
    # brute force with numpy's solver as an independent route
    import itertools
    A = d.matrix()
    best = 0.0
    for combo in itertools.combinations(range(30), 3):
        sub = A[:, combo]
        G = sub.T @ sub.conj()
        best = max(best, np.max(np.abs(np.linalg.eigvalsh(G) - 1)))
    assert r3.delta == pytest.approx(best, abs=1e-9)
    assert len(r3.argmax_support) <= 3


def test_rip_exact_budget():
    with pytest.raises(BudgetExceededError, match="budget"):
        rip_exact_check(build_heisenberg(11), 3, budget=1000)
    with pytest.raises(ValueError):
        rip_exact_check(build_heisenberg(5), 1)
