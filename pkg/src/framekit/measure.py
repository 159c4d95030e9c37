"""Frame measure over windows and numerical checks of measure/density identities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import diagonal_coefficients, frame_bounds
from .exceptions import InvalidInput
from .geometry import WindowFamily, beurling_density

DENSITY_BAND = 0.10


@dataclass(frozen=True, eq=False)
class MeasureReport:
    """Window averages of the diagonal coefficients ``<g_l, h_l>``.

    ``averages`` has shape (centers, radii) and is NaN for windows holding no
    index point; those windows are left out of ``M_minus``/``M_plus``.
    """

    radii: np.ndarray
    centers: np.ndarray
    counts: np.ndarray
    sums: np.ndarray
    global_average: float
    n_points: int

    @property
    def averages(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.nan)

    @property
    def empty_window_count(self):
        return int(np.count_nonzero(self.counts == 0))

    def _headline_column(self):
        col = self.averages[:, -1]
        col = col[np.isfinite(col)]
        if col.size == 0:
            raise InvalidInput("no window at the headline radius contains an index point")
        return col

    @property
    def M_minus(self):
        return float(self._headline_column().min())

    @property
    def M_plus(self):
        return float(self._headline_column().max())

    @property
    def headline_radius(self):
        return float(self.radii[-1])

    def per_radius(self):
        rows = []
        avg = self.averages
        for j, r in enumerate(self.radii):
            col = avg[:, j]
            col = col[np.isfinite(col)]
            rows.append({
                "r": float(r),
                "M_min": float(col.min()) if col.size else None,
                "M_max": float(col.max()) if col.size else None,
                "empty_windows": int(np.count_nonzero(self.counts[:, j] == 0)),
            })
        return rows

    def rows(self):
        out = []
        avg = self.averages
        for i in range(self.centers.shape[0]):
            for j, r in enumerate(self.radii):
                if self.counts[i, j] == 0:
                    continue
                out.append({
                    "r": float(r),
                    "center_index": i,
                    "count": int(self.counts[i, j]),
                    "sum_diagonal": float(self.sums[i, j]),
                    "average": float(avg[i, j]),
                })
        return out

    def to_dict(self):
        return {
            "radii": [float(r) for r in self.radii],
            "headline": {"r": self.headline_radius, "M_minus": self.M_minus, "M_plus": self.M_plus},
            "global_average": self.global_average,
            "n_points": self.n_points,
            "empty_window_count": self.empty_window_count,
            "per_radius": self.per_radius(),
            "windows": self.rows(),
        }


def _windows_for(F, windows):
    if F.geometry is None:
        raise InvalidInput("frame system has no geometry")
    return WindowFamily.grid(F.geometry) if windows is None else windows


def frame_measure(F, windows=None):
    """Lower and upper frame measure estimated at finite radii.

    For each window, the average of ``d_l = <g_l, S^+ g_l>`` over the index
    points inside it. Empty windows are skipped and counted.
    """
    windows = _windows_for(F, windows)
    d = diagonal_coefficients(F)
    dist = F.geometry.pairwise_distance(windows.centers, F.index_points)
    counts = np.empty((windows.centers.shape[0], len(windows.radii)), dtype=np.int64)
    sums = np.empty(counts.shape)
    for j, r in enumerate(windows.radii):
        inside = dist < r
        counts[:, j] = inside.sum(axis=1)
        sums[:, j] = inside.astype(float) @ d
    if np.all(counts == 0):
        raise InvalidInput("no window contains an index point")
    report = MeasureReport(np.asarray(windows.radii), windows.centers, counts, sums,
                           float(d.sum() / d.size), int(d.size))
    report._headline_column()
    return report


def verify_frd(F, windows=None):
    """Products ``M+ * D0-`` and ``M- * D0+`` at one common headline radius.

    Deviations from 1 are reported, not asserted.
    """
    windows = _windows_for(F, windows)
    dens = beurling_density(F.index_points, F.geometry, windows)
    meas = frame_measure(F, windows)
    prod_plus = meas.M_plus * dens.D0_minus
    prod_minus = meas.M_minus * dens.D0_plus
    return {
        "radius": meas.headline_radius,
        "M_plus": meas.M_plus,
        "D0_minus": dens.D0_minus,
        "product_plus": prod_plus,
        "M_minus": meas.M_minus,
        "D0_plus": dens.D0_plus,
        "product_minus": prod_minus,
        "max_deviation": max(abs(prod_plus - 1.0), abs(prod_minus - 1.0)),
        "empty_window_count": meas.empty_window_count,
        "center_spacing": windows.spacing,
    }


def check_density_bounds(F, windows=None, band=DENSITY_BAND):
    """Check ``D0- >= 1`` and ``A/C <= D0- <= D0+ <= B/c`` on finite windows.

    ``c`` and ``C`` are the smallest and largest squared norms of the vectors.
    A check fails only when violated by more than ``band`` (relative).
    """
    windows = _windows_for(F, windows)
    dens = beurling_density(F.index_points, F.geometry, windows)
    bounds = frame_bounds(F)
    norms = F.norms_squared
    c, C = float(norms.min()), float(norms.max())
    if c <= 0:
        raise InvalidInput("all vectors must be nonzero to form A/C and B/c")
    lo, hi = bounds.lower / C, bounds.upper / c
    d_minus, d_plus = dens.D0_minus, dens.D0_plus
    checks = {
        "critical_density": {"lhs": 1.0, "rhs": d_minus, "slack": d_minus - 1.0,
                             "holds": d_minus >= 1.0 * (1 - band)},
        "lower_sandwich": {"lhs": lo, "rhs": d_minus, "slack": d_minus - lo,
                           "holds": d_minus >= lo * (1 - band)},
        "ordering": {"lhs": d_minus, "rhs": d_plus, "slack": d_plus - d_minus,
                     "holds": d_minus <= d_plus},
        "upper_sandwich": {"lhs": d_plus, "rhs": hi, "slack": hi - d_plus,
                           "holds": d_plus <= hi * (1 + band)},
    }
    return {
        "radius": dens.headline["r"],
        "A": bounds.lower,
        "B": bounds.upper,
        "c": c,
        "C": C,
        "A_over_C": lo,
        "B_over_c": hi,
        "D0_minus": d_minus,
        "D0_plus": d_plus,
        "band": band,
        "checks": checks,
        "holds": all(ch["holds"] for ch in checks.values()),
    }
