"""Selector search and certification."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framekit import (BudgetExceeded, CellPartition, CertificateFailure, InvalidInput,
                      find_selector, parseval_transform, verify_selector_bound)
from framekit.generators import orthonormal_basis, random_system
from framekit.selector import SelectorResult, theorem_bound


def _oracle_optimum(P, cells):
    # independent oracle: every selector, largest eigenvalue of its frame operator
    best = None
    for sel in itertools.product(*cells):
        V = P.vectors[list(sel)]
        S = V.T @ V.conj()
        val = np.linalg.eigvalsh(S)[-1]
        if best is None or val < best[0] - 1e-12:
            best = (val, sel)
    return best


def _parseval(seed, dim=4, n=8):
    return parseval_transform(random_system(dim, n, np.random.default_rng(seed)))


CELLS = [[0, 1], [2, 3], [4, 5], [6, 7]]


def test_theorem_bound_formula():
    assert theorem_bound(4, 0.25) == pytest.approx((0.5 + 0.5) ** 2)
    assert theorem_bound(1, 0.0) == pytest.approx(1.0)


def test_exhaustive_matches_oracle():
    P = _parseval(3)
    res = find_selector(P, CELLS, "exhaustive")
    val, sel = _oracle_optimum(P, CELLS)
    assert res.achieved_bessel == pytest.approx(val, abs=1e-10)
    assert res.selected == sel
    assert res.search_stats["candidates_examined"] == 16


def test_greedy_and_random_not_better_than_exhaustive():
    P = _parseval(5)
    ex = find_selector(P, CELLS, "exhaustive")
    for strategy in ("greedy", "random"):
        res = find_selector(P, CELLS, strategy, seed=11)
        assert res.achieved_bessel >= ex.achieved_bessel - 1e-10
        verify_selector_bound(P, res)


def test_random_is_seeded():
    P = _parseval(9)
    a = find_selector(P, CELLS, "random", restarts=5, seed=4)
    b = find_selector(P, CELLS, "random", restarts=5, seed=4)
    assert a.to_dict() == b.to_dict()


def test_ties_go_to_lowest_index():
    # doubled orthonormal basis: every selector is orthonormal with bound 1/2
    F = orthonormal_basis(4, copies=2)
    P = parseval_transform(F)
    cells = [[0, 4], [1, 5], [2, 6], [3, 7]]
    assert find_selector(P, cells, "exhaustive").selected == (0, 1, 2, 3)
    assert find_selector(P, cells, "greedy").selected == (0, 1, 2, 3)


def test_budget_exceeded():
    P = _parseval(1)
    with pytest.raises(BudgetExceeded):
        find_selector(P, CELLS, "exhaustive", budget=15)


def test_rejects_non_bessel_and_bad_partitions():
    F = random_system(4, 8, np.random.default_rng(0))
    with pytest.raises(InvalidInput):
        find_selector(F.with_vectors(10 * F.vectors), CELLS)
    with pytest.raises(InvalidInput):
        CellPartition([[0, 1], [1, 2]])
    with pytest.raises(InvalidInput):
        CellPartition([[0], []])
    with pytest.raises(InvalidInput):
        find_selector(_parseval(0), [[0, 99]])
    with pytest.raises(InvalidInput):
        find_selector(_parseval(0), CELLS, "annealing")


def test_certificate_failures():
    P = _parseval(2)
    res = find_selector(P, CELLS, "greedy")
    forged = SelectorResult(res.selected, res.achieved_bessel / 2, res.theorem_bound, True,
                            res.strategy, res.alpha, res.cells)
    with pytest.raises(CertificateFailure):
        verify_selector_bound(P, forged)
    two_in_one = SelectorResult((0, 1, 4, 6), res.achieved_bessel, res.theorem_bound, True,
                                res.strategy, res.alpha, res.cells)
    with pytest.raises(CertificateFailure):
        verify_selector_bound(P, two_in_one)


def test_thread_count_does_not_change_result(monkeypatch):
    P = parseval_transform(random_system(6, 24, np.random.default_rng(8)))
    cells = [list(range(k, k + 4)) for k in range(0, 24, 4)]
    monkeypatch.setenv("FRAMEKIT_THREADS", "1")
    a = find_selector(P, cells, "exhaustive")
    monkeypatch.setenv("FRAMEKIT_THREADS", "4")
    b = find_selector(P, cells, "exhaustive")
    assert a.to_dict() == b.to_dict()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 3))
def test_exhaustive_meets_theorem_bound(seed, r):
    dim, n = 3, 3 * r
    P = parseval_transform(random_system(dim, n, np.random.default_rng(seed)))
    cells = [list(range(k, k + r)) for k in range(0, n, r)]
    res = find_selector(P, cells, "exhaustive")
    assert res.achieved_bessel <= res.theorem_bound + 1e-10
    assert verify_selector_bound(P, res)["certified"]
    val, _ = _oracle_optimum(P, cells)
    assert res.achieved_bessel == pytest.approx(val, abs=1e-10)
