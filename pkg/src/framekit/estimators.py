"""scikit-learn style wrappers around the functional API.

Arrays follow the scikit-learn row convention: ``X`` has shape
``(n_vectors, ambient_dim)`` and row ``l`` is the vector ``g_l``. A
:class:`~framekit.core.FrameSystem` is accepted wherever ``X`` is.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_vectors
from .core import FrameSystem, canonical_dual, diagonal_coefficients, frame_bounds
from .exceptions import InvalidInput
from .geometry import WindowFamily, beurling_density
from .thinning import ThinningConfig, thin_to_density


def _system(X, index_points=None, geometry=None):
    if isinstance(X, FrameSystem):
        return X
    return FrameSystem(check_vectors(X), index_points, geometry)


class FrameAnalyzer(BaseEstimator):
    """Frame bounds, canonical dual and diagonal coefficients of a system.

    Attributes
    ----------
    bounds_ : FrameBounds
    dual_ : ndarray of shape (n_vectors, ambient_dim)
    diagonal_ : ndarray of shape (n_vectors,)
    rank_ : int
    """

    def fit(self, X, y=None):
        F = _system(X)
        self.bounds_ = frame_bounds(F)
        self.rank_ = self.bounds_.rank
        self.dual_ = canonical_dual(F).vectors.copy()
        self.diagonal_ = diagonal_coefficients(F)
        self.n_features_in_ = F.ambient_dim
        return self


class ParsevalTransformer(TransformerMixin, BaseEstimator):
    """Learn ``S^{-1/2}`` on the span of the fitted system and apply it to vectors."""

    def fit(self, X, y=None):
        F = _system(X)
        evals, U, _ = F._spectral()
        if evals.size == 0:
            raise InvalidInput("system spans the zero space")
        self.inv_sqrt_ = (U / np.sqrt(evals)) @ U.conj().T
        self.bounds_ = frame_bounds(F)
        self.n_features_in_ = F.ambient_dim
        return self

    def transform(self, X):
        check_is_fitted(self, "inv_sqrt_")
        if isinstance(X, FrameSystem):
            return X.with_vectors((self.inv_sqrt_ @ X.vectors.T).T)
        V = check_vectors(X)
        if V.shape[1] != self.n_features_in_:
            raise InvalidInput(f"X has {V.shape[1]} features, expected {self.n_features_in_}")
        return (self.inv_sqrt_ @ V.T).T


class FrameThinner(TransformerMixin, BaseEstimator):
    """Select a subframe of lower density by repeated selector removal.

    Parameters
    ----------
    epsilon : float in (0, 1]
        Target headline density ``1 + epsilon``.
    r : int, optional
        Cell size; ``None`` uses the worst-case value from ``choose_alpha_r``.
    R : float, optional
        Packing radius; ``None`` selects it automatically.
    strategy : {"greedy", "exhaustive", "random"}
    max_iterations : int
    density_radius : float, optional
    seed : int
    """

    def __init__(self, epsilon=1.0, r=None, R=None, strategy="greedy", max_iterations=50,
                 density_radius=None, seed=0):
        self.epsilon = epsilon
        self.r = r
        self.R = R
        self.strategy = strategy
        self.max_iterations = max_iterations
        self.density_radius = density_radius
        self.seed = seed

    def _config(self):
        return ThinningConfig(epsilon=self.epsilon, r_override=self.r, R_override=self.R,
                              selector_strategy=self.strategy,
                              max_iterations=self.max_iterations,
                              density_radius=self.density_radius, seed=self.seed)

    def fit(self, X, y=None, index_points=None, geometry=None):
        F = _system(X, index_points, geometry)
        out = thin_to_density(F, config=self._config())
        self.support_ = np.asarray(out["Gamma"])
        self.trace_ = out["trace"]
        self.bounds_ = frame_bounds(F.subset(self.support_))
        self.n_vectors_in_ = len(F)
        self.n_features_in_ = F.ambient_dim
        return self

    def get_support(self, indices=False):
        check_is_fitted(self, "support_")
        if indices:
            return self.support_.copy()
        mask = np.zeros(self.n_vectors_in_, dtype=bool)
        mask[self.support_] = True
        return mask

    def transform(self, X):
        check_is_fitted(self, "support_")
        if isinstance(X, FrameSystem):
            return X.subset(self.support_)
        V = check_vectors(X)
        if V.shape[0] != self.n_vectors_in_:
            raise InvalidInput("transform expects the system the thinner was fitted on")
        return V[self.support_]


class BeurlingDensityEstimator(BaseEstimator):
    """Windowed lower/upper Beurling densities of a point set.

    Parameters
    ----------
    geometry : PointGeometry
    radii : sequence of float, optional
    spacing : float, optional
        Window center spacing; half the smallest radius by default.
    """

    def __init__(self, geometry=None, radii=None, spacing=None):
        self.geometry = geometry
        self.radii = radii
        self.spacing = spacing

    def fit(self, X, y=None):
        if self.geometry is None:
            raise InvalidInput("geometry is required")
        windows = WindowFamily.grid(self.geometry, self.radii, self.spacing)
        self.report_ = beurling_density(X, self.geometry, windows)
        head = self.report_.headline
        self.D_minus_, self.D_plus_ = head["D_minus"], head["D_plus"]
        self.D0_minus_, self.D0_plus_ = head["D0_minus"], head["D0_plus"]
        return self
