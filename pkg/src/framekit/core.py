"""Frame operators, frame bounds, canonical duals and Parseval transforms.

Everything is computed on the span of the system: bounds are the extreme
nonzero eigenvalues of the frame operator ``S = sum_l g_l g_l^*`` and inverses
are pseudo-inverses on the range of ``S``. Eigenvalues below
``max_eig * TOL_RANK`` count as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_indices, check_points, check_vectors
from .exceptions import InvalidInput, NumericalFailure
from .geometry import PointGeometry

TOL_HERM = 1e-10
TOL_RANK = 1e-10
TOL_PSD = 1e-10


@dataclass(frozen=True, eq=False)
class FrameSystem:
    """An indexed family of complex vectors, each tagged with an index point.

    Parameters
    ----------
    vectors : array_like, shape (n_vectors, ambient_dim)
        Row ``l`` is the vector ``g_l``. Real input is embedded.
    index_points : array_like, shape (n_vectors, point_dim), optional
        Defaults to ``0, 1, ..., n-1`` on the line ``[0, n)``.
    geometry : PointGeometry, optional
        The geometry the index points live in.
    labels : sequence, optional
        Opaque per-vector identifiers.
    meta : dict, optional
        Free-form provenance (generator parameters, diagnostics).
    """

    vectors: np.ndarray
    index_points: Optional[np.ndarray] = None
    geometry: Optional[PointGeometry] = None
    labels: Optional[tuple] = None
    meta: Optional[dict] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        V = check_vectors(self.vectors)
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)
        n = V.shape[0]
        geometry = self.geometry
        points = self.index_points
        if points is None:
            points = np.arange(n, dtype=float)[:, np.newaxis]
            if geometry is None:
                geometry = PointGeometry.line(0.0, float(max(n, 1)))
        P = check_points(points, n)
        P.setflags(write=False)
        if geometry is not None and not np.all(geometry.contains(P)):
            raise InvalidInput("index_points must lie inside the geometry's domain")
        object.__setattr__(self, "index_points", P)
        object.__setattr__(self, "geometry", geometry)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != n:
                raise InvalidInput("labels must have one entry per vector")
            object.__setattr__(self, "labels", labels)

    @property
    def ambient_dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def norms_squared(self):
        return np.sum(np.abs(self.vectors) ** 2, axis=1)

    def subset(self, indices):
        """The subsystem at the given positions, order preserved."""
        idx = check_indices(indices, len(self))
        if idx.size == 0:
            raise InvalidInput("subset must be nonempty")
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return FrameSystem(self.vectors[idx], self.index_points[idx], self.geometry, labels,
                           self.meta)

    def with_vectors(self, vectors):
        """Same index points, geometry and labels with new vectors."""
        return FrameSystem(vectors, self.index_points, self.geometry, self.labels, self.meta)

    def _spectral(self):
        """Eigen-split of the frame operator restricted to its range.

        Returns ``(eigvals, U, W)`` with ``S = U diag(eigvals) U^*`` and the
        synthesis matrix ``G = U diag(sqrt(eigvals)) W^*``. The decomposition is
        taken on the smaller of the frame operator and the Gram matrix.
        """
        if "spectral" not in self._cache:
            self._cache["spectral"] = _spectral_split(self.vectors)
        return self._cache["spectral"]


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray
    certified_hermitian: bool = True

    def eigvalsh(self):
        return _eigvalsh(self.matrix)


@dataclass(frozen=True)
class FrameBounds:
    """Lower and upper frame bounds of a system on its span."""

    lower: float
    upper: float
    rank: int
    on_span: bool = True

    @property
    def condition(self):
        return self.upper / self.lower if self.lower > 0 else np.inf

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "rank": self.rank,
                "on_span": self.on_span}


def _eigh(M):
    try:
        return np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed for a {M.shape} matrix: {exc}") from exc


def _eigvalsh(M):
    try:
        return np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue computation failed for a {M.shape} matrix: {exc}") from exc


def _symmetrize(M):
    return (M + M.conj().T) / 2


def _spectral_split(V):
    n, d = V.shape
    G = V.T  # synthesis matrix, columns are the vectors
    if d <= n:
        evals, U = _eigh(_symmetrize(G @ G.conj().T))
        keep = _range_mask(evals)
        evals, U = evals[keep], U[:, keep]
        W = (G.conj().T @ U) / np.sqrt(evals)
    else:
        evals, W = _eigh(_symmetrize(G.conj().T @ G))
        keep = _range_mask(evals)
        evals, W = evals[keep], W[:, keep]
        U = (G @ W) / np.sqrt(evals)
    return evals, U, W


def _range_mask(evals):
    top = evals.max() if evals.size else 0.0
    if not np.isfinite(top):
        raise NumericalFailure("non-finite eigenvalue in frame operator")
    if top <= 0:
        return np.zeros(evals.shape, dtype=bool)
    if evals.min() < -TOL_PSD * max(top, 1.0):
        raise NumericalFailure(f"frame operator not positive semidefinite (min eig {evals.min():.3e})")
    return evals > top * TOL_RANK


def _as_system(F):
    return F if isinstance(F, FrameSystem) else FrameSystem(F)


def frame_operator(F):
    """``S = sum_l g_l g_l^*`` as a symmetrized :class:`HermitianOperator`."""
    F = _as_system(F)
    G = F.vectors.T
    S = _symmetrize(G @ G.conj().T)
    return HermitianOperator(S, True)


def frame_bounds(F):
    """Frame bounds ``(A, B)`` of ``F`` on its span, with the rank of ``S``."""
    F = _as_system(F)
    evals, _, _ = F._spectral()
    if evals.size == 0:
        return FrameBounds(0.0, 0.0, 0, True)
    return FrameBounds(float(evals.min()), float(evals.max()), int(evals.size), True)


def bessel_bound(F):
    """Largest eigenvalue of the frame operator (0 for an all-zero system)."""
    return frame_bounds(F).upper


def _require_frame(F):
    evals, U, W = F._spectral()
    if evals.size == 0:
        raise InvalidInput("system spans the zero space; it is not a frame for any span")
    return evals, U, W


def canonical_dual(F):
    """The canonical dual ``h_l = S^+ g_l``, same index points and geometry."""
    F = _as_system(F)
    evals, U, W = _require_frame(F)
    H = (U / np.sqrt(evals)) @ W.conj().T
    return F.with_vectors(H.T)


def parseval_transform(F):
    """The Parseval system ``S^{-1/2} g_l`` (inverse square root on the range)."""
    F = _as_system(F)
    _, U, W = _require_frame(F)
    return F.with_vectors((U @ W.conj().T).T)


def diagonal_coefficients(F):
    """``d_l = <g_l, S^+ g_l>``, which equals ``||S^{-1/2} g_l||^2``.

    The values lie in ``[0, 1]`` and sum to ``rank(S)``.
    """
    F = _as_system(F)
    _, _, W = _require_frame(F)
    return np.sum(np.abs(W) ** 2, axis=1)
