import numpy as np
import pytest

from sriplab.dictionary import AtomId, build_heisenberg, build_random_onb_union
from sriplab.sparse import omp, residual_of
from sriplab.stats import sample_support


@pytest.fixture(scope="module")
def h101():
    return build_heisenberg(101)


def test_single_atom(h101):
    y = h101.atom((37, 5))
    res = omp(h101, y, k=1)
    assert res.support_found == [AtomId(37, 5)]
    assert res.coefficients[0] == pytest.approx(1.0, abs=1e-9)
    assert res.residual_norm <= 1e-9


def test_two_sparse_cross_basis(h101):
    a, b = AtomId(3, 10), AtomId(58, 77)
    y = 2.0 * h101.atom(a) + 0.5 * h101.atom(b)
    res = omp(h101, y, k=2)
    assert set(res.support_found) == {a, b}
    got = res.as_mapping()
    assert got[a] == pytest.approx(2.0, abs=1e-6)
    assert got[b] == pytest.approx(0.5, abs=1e-6)


def test_zero_signal(h101):
    res = omp(h101, np.zeros(101), k=3)
    assert res.support_found == [] and res.iterations == 0
    assert res.residual_norm == 0.0


def test_residual_monotone_and_recomputed(h101):
    rng = np.random.default_rng(0)
    y = rng.standard_normal(101) + 1j * rng.standard_normal(101)
    res = omp(h101, y, k=12, tol=0.0)
    hist = res.residual_history
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
    assert len(set(res.support_found)) == len(res.support_found) == 12
    assert residual_of(h101, y, res) == pytest.approx(res.residual_norm, abs=1e-10)


def test_tie_break_smallest_id():
    d = build_heisenberg(5)
    # delta_1 + delta_3: both delta atoms correlate at 1, every chirp at most 2/sqrt(5)
    y = d.atom((0, 3)) + d.atom((0, 1))
    assert omp(d, y, k=1).support_found == [AtomId(0, 1)]
    assert omp(d, y, k=2).support_found == [AtomId(0, 1), AtomId(0, 3)]


def test_errors(h101):
    with pytest.raises(ValueError):
        omp(h101, np.ones(101), k=102)
    with pytest.raises(ValueError):
        omp(h101, np.ones(5), k=1)
    with pytest.raises(ValueError):
        omp(h101, np.ones(101), k=0)


def test_dense_dictionary_path():
    d = build_random_onb_union(11, 3, seed=4)
    y = 1.5 * d.atom((1, 2)) - 0.7j * d.atom((2, 9))
    res = omp(d, y, k=2)
    assert set(res.support_found) == {AtomId(1, 2), AtomId(2, 9)}


def test_recovery_rate_three_sparse(h101):
    ok = 0
    for seed in range(100):
        s = sample_support(h101, 3, seed)
        y = h101.atoms(s) @ np.ones(3)
        res = omp(h101, y, k=3)
        ok += set(res.support_found) == set(s)
    assert ok >= 99
