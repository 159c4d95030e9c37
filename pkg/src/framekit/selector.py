"""Search for one-per-cell selectors with a small Bessel bound.

Given a Bessel system with bound 1 whose vectors satisfy ``||g_i||^2 <= alpha``
and disjoint cells ``J_k`` of size at least ``r``, a selector ``J`` (exactly one
index per cell) exists whose Bessel bound is at most
``(1/sqrt(r) + sqrt(alpha))^2``. This module searches for such selectors and
certifies what it finds:

* ``exhaustive`` enumerates every selector (the ground-truth optimum);
* ``greedy`` fills cells in decreasing max-norm order, each time taking the
  candidate that keeps the largest eigenvalue smallest;
* ``random`` draws seeded uniform selectors and keeps the best.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream
from .core import FrameSystem, _eigvalsh, bessel_bound, frame_operator
from .exceptions import BudgetExceeded, CertificateFailure, InvalidInput

DEFAULT_BUDGET = 10 ** 6
BESSEL_TOL = 1e-8
CERT_TOL = 1e-10
STRATEGIES = ("exhaustive", "greedy", "random")
_CHUNK = 4096


def _threads():
    try:
        return max(1, int(os.environ.get("FRAMEKIT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CellPartition:
    """Disjoint cells of positions into a frame system."""

    cells: tuple

    def __post_init__(self):
        cells = tuple(tuple(int(i) for i in c) for c in self.cells)
        if not cells:
            raise InvalidInput("a partition needs at least one cell")
        if any(len(c) == 0 for c in cells):
            raise InvalidInput("empty cell in partition")
        flat = [i for c in cells for i in c]
        if len(set(flat)) != len(flat):
            raise InvalidInput("cells must be pairwise disjoint and duplicate-free")
        object.__setattr__(self, "cells", cells)

    @property
    def r_min(self):
        return min(len(c) for c in self.cells)

    @property
    def r_max(self):
        return max(len(c) for c in self.cells)

    @property
    def union(self):
        return sorted(i for c in self.cells for i in c)

    def __len__(self):
        return len(self.cells)

    def to_dict(self):
        return {"cells": [list(c) for c in self.cells], "r_min": self.r_min, "r_max": self.r_max}


@dataclass(frozen=True)
class SelectorResult:
    selected: tuple
    achieved_bessel: float
    theorem_bound: float
    certified: bool
    strategy: str
    alpha: float
    cells: tuple
    search_stats: dict = field(default_factory=dict)

    @property
    def r_min(self):
        return min(len(c) for c in self.cells)

    def to_dict(self):
        return {
            "selected": list(self.selected),
            "achieved_bessel": self.achieved_bessel,
            "theorem_bound": self.theorem_bound,
            "certified": self.certified,
            "strategy": self.strategy,
            "alpha": self.alpha,
            "r_min": self.r_min,
            "cells": [list(c) for c in self.cells],
            "search_stats": dict(self.search_stats),
        }


def theorem_bound(r, alpha):
    """``(1/sqrt(r) + sqrt(alpha))^2``."""
    return (1.0 / math.sqrt(r) + math.sqrt(alpha)) ** 2


def alpha_norm(F, subset=None):
    """Largest squared norm over ``subset`` (all vectors by default)."""
    norms = F.norms_squared
    if subset is not None:
        subset = list(subset)
        if not subset:
            return 0.0
        norms = norms[subset]
    return float(norms.max())


def _lmax_batch(gram, selectors):
    """Largest eigenvalue of ``gram[J, J]`` for each row ``J`` of ``selectors``."""
    sub = gram[selectors[:, :, None], selectors[:, None, :]]
    return _eigvalsh(sub)[:, -1]


def _best(values, selectors):
    """Smallest value, ties broken by the lexicographically smallest selector."""
    best = values.min()
    idx = np.flatnonzero(values == best)
    if idx.size > 1:
        rows = [tuple(selectors[i]) for i in idx]
        i = idx[rows.index(min(rows))]
    else:
        i = idx[0]
    return float(best), tuple(int(s) for s in selectors[i])


def _evaluate(gram, selectors):
    """Evaluate selectors in fixed chunks; result is independent of thread count."""
    chunks = [selectors[i:i + _CHUNK] for i in range(0, selectors.shape[0], _CHUNK)]
    workers = _threads()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _lmax_batch(gram, c), chunks))
    else:
        parts = [_lmax_batch(gram, c) for c in chunks]
    return np.concatenate(parts)


def _exhaustive(gram, cells, budget):
    total = math.prod(len(c) for c in cells)
    if total > budget:
        raise BudgetExceeded(f"{total} selectors exceed the budget of {budget}")
    best_val, best_sel = np.inf, None
    product = itertools.product(*cells)
    examined = 0
    while True:
        block = list(itertools.islice(product, _CHUNK * 16))
        if not block:
            break
        sels = np.asarray(block, dtype=np.int64)
        vals = _evaluate(gram, sels)
        examined += sels.shape[0]
        val, sel = _best(vals, sels)
        if val < best_val or (val == best_val and sel < best_sel):
            best_val, best_sel = val, sel
    return best_val, best_sel, {"candidates_examined": examined, "restarts": 0}


def _greedy(F, cells):
    norms = F.norms_squared
    order = sorted(range(len(cells)), key=lambda k: (-max(norms[i] for i in cells[k]), k))
    d = F.ambient_dim
    S = np.zeros((d, d), dtype=complex)
    chosen = [None] * len(cells)
    examined = 0
    for k in order:
        best_val, best_idx, best_S = np.inf, None, None
        for i in sorted(cells[k]):
            g = F.vectors[i]
            cand = S + np.outer(g, g.conj())
            val = float(_eigvalsh((cand + cand.conj().T) / 2)[-1])
            examined += 1
            if val < best_val:
                best_val, best_idx, best_S = val, i, cand
        chosen[k] = best_idx
        S = best_S
    achieved = float(_eigvalsh((S + S.conj().T) / 2)[-1])
    return achieved, tuple(chosen), {"candidates_examined": examined, "restarts": 0,
                                     "cell_order": order}


def _random(gram, cells, restarts, seed):
    rng = stream(seed, "selector")
    picks = np.stack([rng.integers(0, len(c), size=restarts) for c in cells], axis=1)
    table = [np.asarray(c, dtype=np.int64) for c in cells]
    sels = np.stack([table[k][picks[:, k]] for k in range(len(cells))], axis=1)
    vals = _evaluate(gram, sels)
    val, sel = _best(vals, sels)
    return val, sel, {"candidates_examined": int(sels.shape[0]), "restarts": int(restarts)}


def find_selector(F_parseval, partition, strategy="greedy", budget=DEFAULT_BUDGET,
                  restarts=64, seed=0):
    """Choose one index per cell minimizing the selected subsystem's Bessel bound.

    Parameters
    ----------
    F_parseval : FrameSystem
        A system whose restriction to the union of the cells has Bessel
        bound at most 1 (for instance a Parseval frame).
    partition : CellPartition or sequence of index lists
    strategy : {"exhaustive", "greedy", "random"}
    budget : int
        Maximum number of selectors ``exhaustive`` may enumerate.
    restarts, seed : int
        Used by ``random`` only.

    Returns
    -------
    SelectorResult
    """
    if not isinstance(partition, CellPartition):
        partition = CellPartition(partition)
    if strategy not in STRATEGIES:
        raise InvalidInput(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    cells = partition.cells
    n = len(F_parseval)
    union = partition.union
    if union[-1] >= n or union[0] < 0:
        raise InvalidInput("partition refers to indices outside the system")
    bessel = bessel_bound(F_parseval.subset(union))
    if bessel > 1 + BESSEL_TOL:
        raise InvalidInput(f"Bessel bound on the cells is {bessel:.6g} > 1")
    alpha = alpha_norm(F_parseval, union)
    bound = theorem_bound(partition.r_min, alpha)

    if strategy == "greedy":
        achieved, selected, stats = _greedy(F_parseval, cells)
    else:
        V = F_parseval.vectors
        gram = V.conj() @ V.T
        if strategy == "exhaustive":
            achieved, selected, stats = _exhaustive(gram, cells, budget)
        else:
            if restarts < 1:
                raise InvalidInput("restarts must be >= 1")
            achieved, selected, stats = _random(gram, cells, restarts, seed)
    return SelectorResult(selected, achieved, bound, achieved <= bound + CERT_TOL,
                          strategy, alpha, cells, stats)


def verify_selector_bound(F_parseval, result, tol=1e-8):
    """Independently re-check a selector: one pick per cell and its Bessel bound.

    The Bessel bound is recomputed from the frame operator of the selected
    vectors (the searches work on Gram submatrices).

    Raises
    ------
    CertificateFailure
        If a cell does not hold exactly one selected index, or the recomputed
        bound disagrees with the reported one by more than ``tol``.
    """
    selected = list(result.selected)
    if len(set(selected)) != len(selected):
        raise CertificateFailure("selector repeats an index")
    chosen = set(selected)
    for k, cell in enumerate(result.cells):
        hits = len(chosen.intersection(cell))
        if hits != 1:
            raise CertificateFailure(f"cell {k} holds {hits} selected indices, expected 1")
    if len(selected) != len(result.cells):
        raise CertificateFailure("selector has entries outside the partition")
    sub = FrameSystem(F_parseval.vectors[selected])
    achieved = float(frame_operator(sub).eigvalsh()[-1])
    if abs(achieved - result.achieved_bessel) > tol * max(1.0, abs(achieved)):
        raise CertificateFailure(
            f"recomputed Bessel bound {achieved!r} differs from reported {result.achieved_bessel!r}")
    union = sorted(i for c in result.cells for i in c)
    bound = theorem_bound(min(len(c) for c in result.cells), alpha_norm(F_parseval, union))
    return {"achieved": achieved, "theorem_bound": bound,
            "certified": achieved <= bound + CERT_TOL}
