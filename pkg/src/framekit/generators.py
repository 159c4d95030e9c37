"""Finite models of concrete frame families.

* exponentials ``e^{2 pi i lambda t}`` sampled on a grid of a finite union of
  intervals, with ``sqrt(h)`` weights so the discrete inner product is a
  quadrature of the L^2 inner product;
* time-domain kernels of the Paley-Wiener space, the Fourier-dual picture;
* cyclic Gabor systems ``pi(a, b) g`` over Z_N x Z_N;
* a few small reference systems (orthonormal bases, the Mercedes frame,
  random systems) used throughout the tests and the CLI.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._validation import check_points, check_positive
from .core import FrameSystem
from .exceptions import InvalidInput
from .geometry import PointGeometry

TAIL_WARN_THRESHOLD = 1e-3


class TruncationWarning(UserWarning):
    """A time-domain kernel system lost noticeable energy to truncation."""


@dataclass(frozen=True)
class SpectrumSpec:
    """A finite union of disjoint intervals ``[a_i, b_i)`` and a grid step ``h``."""

    intervals: tuple
    grid_step: float

    def __post_init__(self):
        ivs = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        if not ivs:
            raise InvalidInput("at least one interval is required")
        for a, b in ivs:
            if not (np.isfinite(a) and np.isfinite(b) and b > a):
                raise InvalidInput(f"invalid interval [{a}, {b})")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if a1 < b0:
                raise InvalidInput("intervals must be disjoint")
        h = check_positive(self.grid_step, "grid_step")
        for a, b in ivs:
            k = (b - a) / h
            if abs(k - round(k)) > 1e-12 * max(1.0, k):
                raise InvalidInput(f"grid_step {h} does not divide interval length {b - a}")
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "grid_step", h)

    @property
    def measure(self):
        return float(sum(b - a for a, b in self.intervals))

    def grid(self):
        h = self.grid_step
        return np.concatenate([a + h * np.arange(int(round((b - a) / h)))
                               for a, b in self.intervals])

    def to_dict(self):
        return {"intervals": [list(iv) for iv in self.intervals], "grid_step": self.grid_step}


def _lambda_geometry(lam, geometry, kernel_value):
    if geometry is not None:
        return geometry
    if lam.size > 1:
        gap = float(np.median(np.diff(np.sort(lam))))
        gap = gap if gap > 0 else 1.0
    else:
        gap = 1.0
    return PointGeometry.line(float(lam.min()), float(lam.max()) + gap,
                              kernel_diagonal=kernel_value)


def exponential_system(spec, frequencies, geometry=None):
    """Exponentials ``sqrt(h) e^{2 pi i lambda t_j}`` on the grid of ``spec``.

    Index points are the frequencies on a line geometry whose kernel diagonal
    is the constant ``|Omega|``. The default line runs from the smallest
    frequency to the largest plus one typical gap.

    Raises
    ------
    InvalidInput
        If ``h * max|lambda| >= 1/2`` (the grid would alias).
    """
    lam = np.asarray(frequencies, dtype=float).ravel()
    if lam.size == 0 or not np.all(np.isfinite(lam)):
        raise InvalidInput("frequencies must be a nonempty finite list")
    h = spec.grid_step
    if h * np.abs(lam).max() >= 0.5:
        raise InvalidInput(
            f"grid step {h} too coarse for max|lambda| = {np.abs(lam).max()} (needs h*max|lambda| < 1/2)")
    t = spec.grid()
    V = np.sqrt(h) * np.exp(2j * np.pi * np.outer(lam, t))
    geo = _lambda_geometry(lam, geometry, spec.measure)
    meta = {"generator": "exponential", "spectrum": spec.to_dict()}
    return FrameSystem(V, lam[:, np.newaxis], geo, None, meta=meta)


def pw_kernel(spec, x, y):
    """Reproducing kernel ``k_x(y) = int_Omega e^{-2 pi i xi (y - x)} d xi``."""
    u = np.asarray(y, dtype=float) - x
    out = np.zeros(u.shape, dtype=complex)
    small = np.abs(u) < 1e-300
    for a, b in spec.intervals:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (np.exp(-2j * np.pi * b * u) - np.exp(-2j * np.pi * a * u)) / (-2j * np.pi * u)
        out += np.where(small, b - a, val)
    return out


def pw_kernel_system(spec, frequencies, extent, step, center=0.0, geometry=None):
    """Kernels ``sqrt(tau) k_lambda(y_j)`` on the time grid ``center + [-T/2, T/2)``.

    The energy lost to truncation, ``1 - ||v_lambda||^2 / |Omega|``, is stored
    in ``meta["tail_energy"]`` (per vector) and ``meta["max_tail_energy"]``;
    a :class:`TruncationWarning` is issued when the maximum exceeds 1e-3.
    ``meta["total_tail_energy"]`` is the summed lost energy ``|Omega| sum tail``,
    the trace of the discarded part of the Gram matrix and hence a bound on
    how far the frame bounds can move under truncation.
    """
    lam = np.asarray(frequencies, dtype=float).ravel()
    if lam.size == 0 or not np.all(np.isfinite(lam)):
        raise InvalidInput("frequencies must be a nonempty finite list")
    T = check_positive(extent, "extent")
    tau = check_positive(step, "step")
    y = center - T / 2 + tau * np.arange(int(round(T / tau)))
    V = np.sqrt(tau) * np.stack([pw_kernel(spec, x, y) for x in lam])
    tail = 1.0 - np.sum(np.abs(V) ** 2, axis=1) / spec.measure
    max_tail = float(np.abs(tail).max())
    meta = {
        "generator": "pw_kernel",
        "spectrum": spec.to_dict(),
        "extent": T,
        "step": tau,
        "center": float(center),
        "tail_energy": tail.tolist(),
        "max_tail_energy": max_tail,
        "total_tail_energy": float(np.abs(tail).sum() * spec.measure),
        "truncation_warning": max_tail > TAIL_WARN_THRESHOLD,
    }
    if max_tail > TAIL_WARN_THRESHOLD:
        warnings.warn(f"time extent {T} loses {max_tail:.2e} of the kernel energy",
                      TruncationWarning, stacklevel=2)
    geo = _lambda_geometry(lam, geometry, spec.measure)
    return FrameSystem(V, lam[:, np.newaxis], geo, None, meta=meta)


def gaussian_window(N, width=1.0):
    """Unit-norm periodized Gaussian ``sum_k exp(-pi (t - kN)^2 / (width N))``."""
    t = np.arange(N)
    g = sum(np.exp(-np.pi * (t - k * N) ** 2 / (width * N)) for k in range(-4, 5))
    return (g / np.linalg.norm(g)).astype(complex)


def full_index(N):
    a, b = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=1)


def lattice_index(N, a, b):
    """The subgroup ``a Z_N x b Z_N``; ``a`` and ``b`` must divide ``N``."""
    if N % a or N % b:
        raise InvalidInput(f"lattice steps ({a}, {b}) must divide N = {N}")
    x, y = np.meshgrid(np.arange(0, N, a), np.arange(0, N, b), indexing="ij")
    return np.stack([x.ravel(), y.ravel()], axis=1)


@dataclass(frozen=True, eq=False)
class GaborSpec:
    """Modulus ``N``, a window (unit-normalized) and an index subset of Z_N^2."""

    N: int
    window: Optional[np.ndarray] = None
    index_set: Optional[np.ndarray] = None

    def __post_init__(self):
        N = int(self.N)
        if N != self.N or N < 2:
            raise InvalidInput("N must be an integer >= 2")
        g = gaussian_window(N) if self.window is None else np.asarray(self.window, dtype=complex)
        if g.shape != (N,) or not np.all(np.isfinite(g)):
            raise InvalidInput(f"window must be a finite vector of length {N}")
        norm = np.linalg.norm(g)
        if norm == 0:
            raise InvalidInput("window must be nonzero")
        g = g / norm
        idx = full_index(N) if self.index_set is None else np.asarray(self.index_set)
        idx = np.atleast_2d(idx)
        if idx.shape[1] != 2 or idx.shape[0] == 0:
            raise InvalidInput("index_set must be a nonempty list of (a, b) pairs")
        if not np.all(idx == np.round(idx)):
            raise InvalidInput("index_set entries must be integers")
        idx = np.mod(idx.astype(np.int64), N)
        if np.unique(idx, axis=0).shape[0] != idx.shape[0]:
            raise InvalidInput("index_set must be duplicate-free")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "window", g)
        object.__setattr__(self, "index_set", idx)


def time_frequency_shift(g, a, b):
    """``(pi(a, b) g)[t] = e^{2 pi i b t / N} g[(t - a) mod N]``."""
    N = g.shape[0]
    t = np.arange(N)
    return np.exp(2j * np.pi * b * t / N) * np.roll(g, a)


def gabor_system(spec):
    """The Gabor system ``{pi(a, b) g : (a, b) in index_set}`` on the torus Z_N^2."""
    N, g = spec.N, spec.window
    t = np.arange(N)
    a, b = spec.index_set[:, 0], spec.index_set[:, 1]
    shifted = np.stack([np.roll(g, int(ai)) for ai in a])
    V = np.exp(2j * np.pi * np.outer(b, t) / N) * shifted
    geo = PointGeometry.torus(N, rank=2, kernel_diagonal=1.0)
    meta = {"generator": "gabor", "N": N}
    return FrameSystem(V, spec.index_set.astype(float), geo, None, meta=meta)


def orthonormal_basis(d, copies=1):
    """``copies`` stacked copies of the standard basis of C^d.

    Vector ``e_i`` sits at index point ``i`` of Z_d with unit mass per element,
    so the window measure equals the number of basis points it covers.
    """
    if d < 2:
        raise InvalidInput("d must be >= 2")
    V = np.tile(np.eye(d), (copies, 1))
    pts = np.tile(np.arange(d), copies)
    geo = PointGeometry.torus(d, rank=1, point_measure=1.0, kernel_diagonal=1.0)
    return FrameSystem(V, pts[:, np.newaxis].astype(float), geo, None,
                       meta={"generator": "onb", "d": d, "copies": copies})


def mercedes_frame():
    """Three unit vectors at 120 degrees, at 0, 2/3, 4/3 on a circle of length 2."""
    angles = 2 * np.pi * np.arange(3) / 3
    V = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    geo = PointGeometry.line(0.0, 2.0, periodic=True, kernel_diagonal=1.0)
    pts = (2.0 / 3.0) * np.arange(3)
    return FrameSystem(V, pts[:, np.newaxis], geo, None, meta={"generator": "mercedes"})


def random_system(dim, n_vectors, rng, complex_valued=True):
    """Gaussian random vectors, indexed by ``0..n-1`` on a line."""
    V = rng.standard_normal((n_vectors, dim))
    if complex_valued:
        V = V + 1j * rng.standard_normal((n_vectors, dim))
    return FrameSystem(V, meta={"generator": "random", "dim": dim, "n_vectors": n_vectors})


def localization_profile(F, probes, radii):
    """Tail energies ``sum_{d(lambda, x) >= r} |<g_lambda, k_x>|^2``.

    Parameters
    ----------
    F : FrameSystem
    probes : FrameSystem
        Probe vectors ``k_x`` tagged with their points ``x``; must share the
        ambient space and geometry of ``F``.
    radii : sequence of float

    Returns
    -------
    dict
        ``tail`` has shape (n_probes, n_radii) and is nonincreasing along radii.
    """
    if probes.ambient_dim != F.ambient_dim:
        raise InvalidInput("probe vectors live in a different ambient space")
    if F.geometry is None or not F.geometry.same_as(probes.geometry):
        raise InvalidInput("probe geometry does not match the frame geometry")
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0 or np.any(radii <= 0):
        raise InvalidInput("radii must be positive")
    coeffs = np.abs(F.vectors.conj() @ probes.vectors.T) ** 2  # (n_frame, n_probes)
    dist = F.geometry.pairwise_distance(F.index_points, probes.index_points)
    tail = np.empty((len(probes), radii.size))
    for j, r in enumerate(radii):
        tail[:, j] = np.sum(np.where(dist >= r, coeffs, 0.0), axis=0)
    return {
        "probes": probes.index_points.tolist(),
        "radii": radii.tolist(),
        "tail": tail,
        "total": coeffs.sum(axis=0),
    }


def gabor_probes(N, points: Sequence, window=None):
    """Probe vectors ``pi(x) phi`` for the given points, Gaussian ``phi`` by default."""
    pts = check_points(points)
    return gabor_system(GaborSpec(N, window, pts.astype(np.int64)))
