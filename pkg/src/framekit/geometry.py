"""Index geometries, window families and Beurling-density estimators.

Two geometries are supported:

* ``box``: an axis-aligned box ``[origin, origin + side_lengths)`` in R^d with the
  Euclidean metric, optionally periodic (a flat torus). The measure is Lebesgue
  measure scaled by ``point_measure``.
* ``torus``: the finite group Z_N^rank with the wrap-around sup-metric. Every
  group element carries mass ``point_measure`` (default ``1/N``).

Balls are open, ``B_r(x) = {y : d(y, x) < r}``. Densities are reported at finite
radii over a finite grid of window centers; the limits ``r -> infinity`` are not
claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from ._validation import check_points, check_positive
from .exceptions import InvalidInput

KernelDiagonal = Union[None, float, np.ndarray, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class PointGeometry:
    """A finite-scale metric measure space for index points.

    Use :meth:`box`, :meth:`line` or :meth:`torus` rather than the raw
    constructor.
    """

    kind: str
    side_lengths: tuple
    origin: tuple
    periodic: bool
    point_measure: float
    kernel_diagonal: KernelDiagonal = None
    quad_resolution: int = 256
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("box", "torus"):
            raise InvalidInput(f"unknown geometry kind {self.kind!r}")
        if len(self.side_lengths) < 1 or len(self.origin) != len(self.side_lengths):
            raise InvalidInput("side_lengths and origin must have the same positive length")
        if any(not np.isfinite(s) or s <= 0 for s in self.side_lengths):
            raise InvalidInput("side_lengths must be positive")
        if self.kind == "torus":
            n = self.side_lengths[0]
            if any(s != n for s in self.side_lengths) or int(n) != n or n < 2:
                raise InvalidInput("torus modulus N must be an integer >= 2")
        check_positive(self.point_measure, "point_measure")
        kd = self.kernel_diagonal
        if isinstance(kd, np.ndarray) and self.kind != "torus":
            raise InvalidInput("array kernel_diagonal is only supported on the torus")
        if isinstance(kd, np.ndarray):
            expected = (self.modulus,) * self.dim
            if kd.shape != expected:
                raise InvalidInput(f"kernel_diagonal must have shape {expected}")
        bounds = self.kernel_bounds()
        if bounds is not None and not (0 < bounds[0] <= bounds[1] < np.inf):
            raise InvalidInput("kernel_diagonal must be bounded: 0 < C1 <= k(y,y) <= C2")

    # -- constructors -------------------------------------------------

    @classmethod
    def box(cls, side_lengths, origin=None, periodic=False, point_measure=1.0,
            kernel_diagonal=None, quad_resolution=256):
        sides = tuple(float(s) for s in np.atleast_1d(side_lengths))
        if origin is None:
            origin = (0.0,) * len(sides)
        origin = tuple(float(o) for o in np.atleast_1d(origin))
        return cls("box", sides, origin, bool(periodic), float(point_measure),
                   kernel_diagonal, int(quad_resolution))

    @classmethod
    def line(cls, start, stop, periodic=False, point_measure=1.0, kernel_diagonal=None):
        """The interval ``[start, stop)`` as a one-dimensional box."""
        if not stop > start:
            raise InvalidInput("line requires stop > start")
        return cls.box([stop - start], origin=[start], periodic=periodic,
                       point_measure=point_measure, kernel_diagonal=kernel_diagonal)

    @classmethod
    def torus(cls, N, rank=2, point_measure=None, kernel_diagonal=None):
        """The cyclic group Z_N^rank with mass ``1/N`` per element by default."""
        if int(N) != N or N < 2:
            raise InvalidInput(f"N must be an integer >= 2, got {N!r}")
        if int(rank) != rank or rank < 1:
            raise InvalidInput("rank must be a positive integer")
        if point_measure is None:
            point_measure = 1.0 / N
        return cls("torus", (float(N),) * int(rank), (0.0,) * int(rank), True,
                   float(point_measure), kernel_diagonal)

    # -- basic properties ---------------------------------------------

    @property
    def dim(self):
        return len(self.side_lengths)

    @property
    def modulus(self):
        if self.kind != "torus":
            raise InvalidInput("modulus is only defined for torus geometries")
        return int(self.side_lengths[0])

    @property
    def diameter(self):
        """Largest distance between two points of the domain."""
        sides = np.asarray(self.side_lengths)
        if self.kind == "torus":
            return float(self.modulus // 2)
        if self.periodic:
            return float(np.linalg.norm(sides / 2))
        return float(np.linalg.norm(sides))

    @property
    def full_radius(self):
        """Smallest convenient radius whose ball is the whole domain."""
        return self.diameter + (1.0 if self.kind == "torus" else 1e-9 * max(1.0, self.diameter))

    def total_measure(self):
        if self.kind == "torus":
            return self.modulus ** self.dim * self.point_measure
        return float(np.prod(self.side_lengths)) * self.point_measure

    def kernel_bounds(self):
        """``(C1, C2)`` bounds of the kernel diagonal, or ``None`` if absent."""
        kd = self.kernel_diagonal
        if kd is None:
            return None
        if np.isscalar(kd):
            return (float(kd), float(kd))
        if isinstance(kd, np.ndarray):
            return (float(kd.min()), float(kd.max()))
        nodes, _ = self._nodes()
        vals = np.asarray(kd(nodes), dtype=float)
        return (float(vals.min()), float(vals.max()))

    def contains(self, points):
        P = check_points(points)
        if P.shape[1] != self.dim:
            return np.zeros(P.shape[0], dtype=bool)
        lo = np.asarray(self.origin)
        hi = lo + np.asarray(self.side_lengths)
        inside = np.all((P >= lo) & (P < hi), axis=1)
        if self.kind == "torus":
            inside &= np.all(P == np.round(P), axis=1)
        return inside

    # -- metric -------------------------------------------------------

    def distance(self, points, x):
        """Distances from each row of ``points`` to the single point ``x``."""
        P = check_points(points)
        x = np.asarray(x, dtype=float).reshape(-1)
        if P.shape[1] != self.dim or x.size != self.dim:
            raise InvalidInput("point dimension does not match the geometry")
        return self.pairwise_distance(P, x[np.newaxis, :])[:, 0]

    def pairwise_distance(self, P, Q):
        """Distance matrix of shape ``(len(P), len(Q))``."""
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        delta = np.abs(P[:, np.newaxis, :] - Q[np.newaxis, :, :])
        if self.periodic:
            sides = np.asarray(self.side_lengths)
            delta = np.mod(delta, sides)
            delta = np.minimum(delta, sides - delta)
        if self.kind == "torus":
            return delta.max(axis=2)
        return np.sqrt((delta ** 2).sum(axis=2))

    # -- measure ------------------------------------------------------

    def _elements(self):
        """All group elements of the torus, shape ``(N**rank, rank)``."""
        if "elements" not in self._cache:
            grids = np.meshgrid(*[np.arange(self.modulus)] * self.dim, indexing="ij")
            self._cache["elements"] = np.stack([g.ravel() for g in grids], axis=1).astype(float)
        return self._cache["elements"]

    def _nodes(self):
        """Quadrature nodes and weights (already scaled by point_measure)."""
        if "nodes" in self._cache:
            return self._cache["nodes"]
        if self.kind == "torus":
            nodes = self._elements()
            weights = np.full(nodes.shape[0], self.point_measure)
        else:
            res = self.quad_resolution if self.dim > 1 else max(self.quad_resolution, 4096)
            axes = []
            cell = 1.0
            for o, s in zip(self.origin, self.side_lengths):
                h = s / res
                axes.append(o + h * (np.arange(res) + 0.5))
                cell *= h
            grids = np.meshgrid(*axes, indexing="ij")
            nodes = np.stack([g.ravel() for g in grids], axis=1)
            weights = np.full(nodes.shape[0], cell * self.point_measure)
        self._cache["nodes"] = (nodes, weights)
        return self._cache["nodes"]

    def _kernel_values(self, nodes):
        kd = self.kernel_diagonal
        if kd is None:
            return np.ones(nodes.shape[0])
        if np.isscalar(kd):
            return np.full(nodes.shape[0], float(kd))
        if isinstance(kd, np.ndarray):
            idx = tuple(nodes.astype(int).T)
            return kd[idx]
        return np.asarray(kd(nodes), dtype=float)

    def ball_measure(self, x, r, weighted=False):
        """``mu(B_r(x))``, or ``int_{B_r(x)} k(y,y) dmu(y)`` if ``weighted``."""
        x = np.asarray(x, dtype=float).reshape(-1)
        exact = self._exact_ball_measure(x, r)
        if exact is not None:
            if not weighted or self.kernel_diagonal is None:
                return exact
            if np.isscalar(self.kernel_diagonal):
                return exact * float(self.kernel_diagonal)
        nodes, weights = self._nodes()
        mask = self.pairwise_distance(nodes, x[np.newaxis, :])[:, 0] < r
        w = weights[mask]
        if weighted:
            w = w * self._kernel_values(nodes[mask])
        return float(w.sum())

    def _exact_ball_measure(self, x, r):
        if self.kind == "torus":
            n = self.modulus
            t = np.arange(n)
            circ = np.minimum(t, n - t)
            per_axis = int(np.count_nonzero(circ < r))
            return float(per_axis ** self.dim) * self.point_measure
        if self.dim == 1:
            o, s = self.origin[0], self.side_lengths[0]
            if self.periodic:
                return min(2.0 * r, s) * self.point_measure
            lo = max(x[0] - r, o)
            hi = min(x[0] + r, o + s)
            return max(hi - lo, 0.0) * self.point_measure
        if self.periodic and 2 * r <= min(self.side_lengths):
            d = self.dim
            vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r ** d
            return vol * self.point_measure
        return None

    # -- windows ------------------------------------------------------

    def grid_centers(self, spacing):
        """Regular grid of window centers with the given spacing."""
        spacing = check_positive(spacing, "spacing")
        if self.kind == "torus":
            step = max(1, int(math.floor(spacing)))
            axes = [np.arange(0, self.modulus, step, dtype=float)] * self.dim
        else:
            axes = [o + spacing * np.arange(int(math.ceil(s / spacing - 1e-12)))
                    for o, s in zip(self.origin, self.side_lengths)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def default_radii(self):
        """A short increasing radius sweep ending at a domain-covering radius."""
        if self.kind == "torus":
            n = self.modulus
            radii = sorted({max(1.0, n / 4), float(n // 2), self.full_radius})
            return tuple(radii)
        top = self.diameter / 2 if not self.periodic else self.full_radius
        return tuple(top * f for f in (0.25, 0.5, 1.0))

    # -- serialization ------------------------------------------------

    def to_dict(self):
        kd = self.kernel_diagonal
        if callable(kd) and not isinstance(kd, np.ndarray):
            raise InvalidInput("callable kernel_diagonal cannot be serialized")
        if isinstance(kd, np.ndarray):
            kd = kd.tolist()
        elif kd is not None:
            kd = float(kd)
        return {
            "kind": self.kind,
            "side_lengths": list(self.side_lengths),
            "origin": list(self.origin),
            "periodic": self.periodic,
            "point_measure": self.point_measure,
            "kernel_diagonal": kd,
        }

    @classmethod
    def from_dict(cls, d):
        kd = d.get("kernel_diagonal")
        if isinstance(kd, list):
            kd = np.asarray(kd, dtype=float)
        return cls(d["kind"], tuple(float(s) for s in d["side_lengths"]),
                   tuple(float(o) for o in d["origin"]), bool(d["periodic"]),
                   float(d["point_measure"]), kd)

    def same_as(self, other):
        """Structural equality used to reject mismatched geometries."""
        if not isinstance(other, PointGeometry):
            return False
        a, b = self.kernel_diagonal, other.kernel_diagonal
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            kd_equal = isinstance(a, np.ndarray) and isinstance(b, np.ndarray) and np.array_equal(a, b)
        else:
            kd_equal = a is b or a == b
        return (self.kind == other.kind and self.side_lengths == other.side_lengths
                and self.origin == other.origin and self.periodic == other.periodic
                and self.point_measure == other.point_measure and kd_equal)


@dataclass(frozen=True, eq=False)
class WindowFamily:
    """Balls ``B_r(x)`` for every center ``x`` and radius ``r``."""

    centers: np.ndarray
    radii: tuple
    spacing: Optional[float] = None

    def __post_init__(self):
        C = check_points(self.centers, name="centers")
        object.__setattr__(self, "centers", C)
        radii = tuple(float(r) for r in np.atleast_1d(self.radii))
        if len(radii) == 0 or any(r <= 0 or not np.isfinite(r) for r in radii):
            raise InvalidInput("radii must be positive and finite")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise InvalidInput("radii must be strictly increasing")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def grid(cls, geometry, radii=None, spacing=None):
        """Centers on a regular grid; spacing defaults to half the smallest radius."""
        if radii is None:
            radii = geometry.default_radii()
        radii = tuple(float(r) for r in np.atleast_1d(radii))
        if spacing is None:
            spacing = min(radii) / 2
        return cls(geometry.grid_centers(spacing), radii, float(spacing))

    @property
    def headline_radius(self):
        return self.radii[-1]


@dataclass(frozen=True, eq=False)
class DensityReport:
    """Windowed counts and measures; all per-window arrays are (centers, radii)."""

    radii: np.ndarray
    centers: np.ndarray
    counts: np.ndarray
    measures: np.ndarray
    weighted_measures: np.ndarray
    spacing: Optional[float] = None

    @property
    def ratio(self):
        return self.counts / self.measures

    @property
    def weighted_ratio(self):
        return self.counts / self.weighted_measures

    def per_radius(self):
        rows = []
        for j, r in enumerate(self.radii):
            rows.append({
                "r": float(r),
                "D_min": float(self.ratio[:, j].min()),
                "D_max": float(self.ratio[:, j].max()),
                "D0_min": float(self.weighted_ratio[:, j].min()),
                "D0_max": float(self.weighted_ratio[:, j].max()),
            })
        return rows

    @property
    def headline(self):
        last = self.per_radius()[-1]
        return {
            "r": last["r"],
            "D_minus": last["D_min"],
            "D_plus": last["D_max"],
            "D0_minus": last["D0_min"],
            "D0_plus": last["D0_max"],
        }

    @property
    def D_minus(self):
        return self.headline["D_minus"]

    @property
    def D_plus(self):
        return self.headline["D_plus"]

    @property
    def D0_minus(self):
        return self.headline["D0_minus"]

    @property
    def D0_plus(self):
        return self.headline["D0_plus"]

    @property
    def stabilization(self):
        """Largest relative change of the headline values over the last two radii."""
        rows = self.per_radius()
        if len(rows) < 2:
            return None
        prev, last = rows[-2], rows[-1]
        changes = []
        for key in ("D_min", "D_max", "D0_min", "D0_max"):
            denom = max(abs(last[key]), 1e-300)
            changes.append(abs(last[key] - prev[key]) / denom)
        return float(max(changes))

    def rows(self):
        """Tidy rows in center-major, radius-minor order."""
        out = []
        ratio, wratio = self.ratio, self.weighted_ratio
        for i in range(self.centers.shape[0]):
            for j, r in enumerate(self.radii):
                out.append({
                    "r": float(r),
                    "center_index": i,
                    "count": int(self.counts[i, j]),
                    "measure": float(self.measures[i, j]),
                    "ratio": float(ratio[i, j]),
                    "weighted_ratio": float(wratio[i, j]),
                })
        return out

    def to_dict(self):
        return {
            "radii": [float(r) for r in self.radii],
            "centers": self.centers.tolist(),
            "center_spacing": self.spacing,
            "per_radius": self.per_radius(),
            "headline": self.headline,
            "stabilization": self.stabilization,
            "windows": self.rows(),
        }


def _as_points(points, geometry):
    P = check_points(points, name="points")
    if P.shape[0] and P.shape[1] != geometry.dim:
        raise InvalidInput(f"points have dimension {P.shape[1]}, geometry has {geometry.dim}")
    return P


def ball_indices(points, x, r, geometry):
    """Positions of the points lying in the open ball ``B_r(x)``."""
    check_positive(r, "r")
    P = _as_points(points, geometry)
    if P.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(geometry.distance(P, x) < r)


def ball_points(points, x, r, geometry):
    """The points of ``points`` inside ``B_r(x)``, wrapping around on tori."""
    P = _as_points(points, geometry)
    return P[ball_indices(P, x, r, geometry)]


def window_counts(points, geometry, windows):
    """Integer counts ``#(points in B_r(x))`` of shape (centers, radii)."""
    P = _as_points(points, geometry)
    C = windows.centers
    if P.shape[0] == 0:
        return np.zeros((C.shape[0], len(windows.radii)), dtype=np.int64)
    dist = geometry.pairwise_distance(C, P)
    return np.stack([(dist < r).sum(axis=1) for r in windows.radii], axis=1)


def window_measures(geometry, windows):
    """Plain and kernel-weighted window measures, each of shape (centers, radii)."""
    key = ("measures", windows.centers.tobytes(), windows.radii)
    cache = geometry._cache
    if key not in cache:
        m = np.empty((windows.centers.shape[0], len(windows.radii)))
        w = np.empty_like(m)
        for i, x in enumerate(windows.centers):
            for j, r in enumerate(windows.radii):
                m[i, j] = geometry.ball_measure(x, r)
                w[i, j] = geometry.ball_measure(x, r, weighted=True)
        cache[key] = (m, w)
    return cache[key]


def beurling_density(points, geometry, windows=None):
    """Finite-radius lower/upper Beurling densities, plain and kernel-weighted.

    For each window the plain ratio is ``#(points in B_r(x)) / mu(B_r(x))``;
    the weighted ratio divides by ``int_{B_r(x)} k(y,y) dmu(y)`` instead, and
    equals the plain ratio when the geometry has no kernel diagonal.

    Returns
    -------
    DensityReport
        Headline values are taken at the largest radius.
    """
    if windows is None:
        windows = WindowFamily.grid(geometry)
    if not np.all(geometry.contains(windows.centers)):
        raise InvalidInput("window centers must lie inside the geometry's domain")
    counts = window_counts(points, geometry, windows)
    measures, weighted = window_measures(geometry, windows)
    if np.any(measures <= 0) or np.any(weighted <= 0):
        raise InvalidInput("a window has zero measure")
    return DensityReport(np.asarray(windows.radii), windows.centers, counts,
                         measures, weighted, windows.spacing)


def relative_separation(points, geometry, r, centers=None):
    """Largest number of points in a single ball of radius ``r``.

    Centers default to the points themselves together with a grid of spacing
    ``r/2``; the result is therefore a lower estimate of the supremum over all
    ``x``.
    """
    check_positive(r, "r")
    P = _as_points(points, geometry)
    if centers is None:
        grid = geometry.grid_centers(r / 2)
        centers = np.vstack([P, grid]) if P.shape[0] else grid
    C = check_points(centers, name="centers")
    windows = WindowFamily(C, (r,))
    counts = window_counts(P, geometry, windows)[:, 0]
    measures = np.array([geometry.ball_measure(x, r) for x in C])
    i = int(np.argmax(counts))
    ratios = counts / measures
    return {
        "r": float(r),
        "max_count_per_ball": int(counts[i]),
        "argmax_center": C[i].tolist(),
        "max_ratio": float(ratios.max()),
        "is_separated_estimate": bool(np.isfinite(ratios.max())),
    }
