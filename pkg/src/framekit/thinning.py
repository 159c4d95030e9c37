"""Density reduction of an overcomplete frame by repeated selector removal.

One pass (:func:`thin_once`):

1. pass to the Parseval system ``S^{-1/2} g_l`` of the active frame;
2. keep the indices with diagonal coefficient ``<= alpha``, ``alpha = 1/(1+eps/2)``;
3. pack disjoint ``R``-balls centred in that set and cut every packed region
   into cells of ``r`` to ``2r-1`` points;
4. pick one index per cell with a small Bessel bound and remove the picks.

If the picks have Parseval Bessel bound ``beta < 1`` the remaining frame has
lower bound at least ``A (1 - beta)`` and upper bound at most ``B``.
:func:`thin_to_density` repeats passes until the headline ``D0-`` estimate is
at most ``1 + eps``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_epsilon, check_indices
from .core import diagonal_coefficients, frame_bounds, parseval_transform
from .exceptions import (BudgetExceeded, CertificateFailure, InsufficientDensity,
                         InvalidInput, NoProgress, PartialResult)
from .geometry import WindowFamily, beurling_density
from .measure import DENSITY_BAND, frame_measure
from .selector import DEFAULT_BUDGET, STRATEGIES, CellPartition, find_selector, theorem_bound

CERT_SLACK = 1e-8
ALPHA_TOL = 1e-12


@dataclass(frozen=True)
class ThinningConfig:
    """Parameters of a thinning run.

    ``r_override`` replaces the cell size from :func:`choose_alpha_r`, which
    is far too large for small systems (``r = 165`` at ``epsilon = 1``).
    ``density_radius`` is the headline radius for all density and measure
    estimates; ``None`` uses the geometry's default sweep, whose last radius
    covers the whole domain.
    """

    epsilon: float = 1.0
    r_override: Optional[int] = None
    R_override: Optional[float] = None
    selector_strategy: str = "greedy"
    max_iterations: int = 50
    min_lower_bound: float = 0.0
    density_radius: Optional[float] = None
    window_spacing: Optional[float] = None
    budget: int = DEFAULT_BUDGET
    restarts: int = 64
    seed: int = 0

    def __post_init__(self):
        check_epsilon(self.epsilon)
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidInput("max_iterations must be an integer >= 1")
        if self.r_override is not None and (int(self.r_override) != self.r_override
                                            or self.r_override < 1):
            raise InvalidInput("r_override must be a positive integer")
        if self.R_override is not None and not self.R_override > 0:
            raise InvalidInput("R_override must be positive")
        if self.selector_strategy not in STRATEGIES:
            raise InvalidInput(f"selector_strategy must be one of {STRATEGIES}")
        if self.density_radius is not None and not self.density_radius > 0:
            raise InvalidInput("density_radius must be positive")

    def windows(self, geometry):
        radii = None if self.density_radius is None else (self.density_radius,)
        return WindowFamily.grid(geometry, radii, self.window_spacing)

    def to_dict(self):
        return asdict(self)


@dataclass
class ThinningTrace:
    """Per-pass records plus the final state of a thinning run."""

    config: dict
    initial: dict
    records: list = field(default_factory=list)
    final: dict = field(default_factory=dict)

    def summary_rows(self):
        keys = ("iteration", "alpha", "M_plus_estimate", "Lambda_alpha_size", "R", "r",
                "cell_count", "removed_count", "active_size", "achieved_bessel",
                "new_lower", "new_upper", "new_D0_minus", "new_D0_plus", "delta_observed")
        return [{k: rec.get(k) for k in keys} for rec in self.records]

    def to_dict(self):
        return {"config": self.config, "initial": self.initial,
                "records": self.records, "final": self.final}


def alpha_set(F, alpha):
    """Positions ``l`` with ``<g_l, S^+ g_l> <= alpha``."""
    if not 0 < alpha < 1:
        raise InvalidInput("alpha must lie in (0, 1)")
    d = diagonal_coefficients(F)
    return np.flatnonzero(d <= alpha + ALPHA_TOL)


def choose_alpha_r(epsilon, r_override=None):
    """``alpha = 1/(1 + eps/2)`` and the smallest integer ``r`` with
    ``(1/sqrt(r) + sqrt(alpha))^2 < 1/(1 + eps/4)``.
    """
    eps = check_epsilon(epsilon)
    alpha = 1.0 / (1.0 + eps / 2)
    target = 1.0 / (1.0 + eps / 4)
    gap = math.sqrt(target) - math.sqrt(alpha)
    assert gap > 0
    r = max(1, int(1.0 / gap ** 2) - 2)
    while theorem_bound(r, alpha) >= target:
        r += 1
    while r > 1 and theorem_bound(r - 1, alpha) < target:
        r -= 1
    out = {"alpha": alpha, "r": r, "r_theory": r, "target_bessel": target,
           "theorem_bound": theorem_bound(r, alpha)}
    if r_override is not None:
        out["r"] = int(r_override)
        out["theorem_bound"] = theorem_bound(int(r_override), alpha)
    return out


def _pack(points, geometry, R):
    """Greedy maximal family of centers with pairwise distance >= 2R."""
    centers = []
    for i in range(points.shape[0]):
        if centers:
            d = geometry.pairwise_distance(points[i:i + 1], points[centers])[0]
            if np.any(d < 2 * R):
                continue
        centers.append(i)
    return centers


def _regions(points, geometry, R, r):
    centers = _pack(points, geometry, R)
    dist = geometry.pairwise_distance(points, points[centers])
    owner = np.argmin(dist, axis=1)  # first minimum: lowest center id on ties
    in_ball = (dist < R).sum(axis=0)
    return centers, owner, in_ball


def partition_cells(points, geometry, R, r):
    """Cells of ``r`` to ``2r - 1`` positions inside packed regions.

    Disjoint ``R``-balls centred at the points are packed greedily; every
    point joins its nearest packed center, so each region contains its ball
    and sits inside the doubled ball. A region's points, sorted by
    coordinates, are cut into consecutive runs of ``r``; a short remainder is
    merged into the preceding run.

    Raises
    ------
    InsufficientDensity
        If a packed ball holds fewer than ``r`` points.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, np.newaxis]
    if P.shape[0] == 0:
        raise InsufficientDensity("no points to partition")
    r = int(r)
    if r < 1 or not R > 0:
        raise InvalidInput("need r >= 1 and R > 0")
    centers, owner, in_ball = _regions(P, geometry, R, r)
    short = [c for c, k in zip(centers, in_ball) if k < r]
    if short:
        raise InsufficientDensity(
            f"{len(short)} of {len(centers)} packed balls of radius {R} hold fewer than {r} points")
    cells = []
    for k in range(len(centers)):
        members = np.flatnonzero(owner == k)
        order = np.lexsort(tuple(P[members].T[::-1]))  # lexicographic by coordinates
        members = members[order]
        runs = [list(members[i:i + r]) for i in range(0, members.size, r)]
        if len(runs) > 1 and len(runs[-1]) < r:
            runs[-2].extend(runs.pop())
        cells.extend(runs)
    return CellPartition(cells)


def _radius_candidates(points, geometry):
    if geometry.kind == "torus":
        return [float(R) for R in range(1, int(geometry.full_radius) + 1)]
    if points.shape[0] > 1:
        dist = geometry.pairwise_distance(points, points)
        np.fill_diagonal(dist, np.inf)
        step = float(np.median(dist.min(axis=1)))
    else:
        step = geometry.diameter
    step = max(step, geometry.diameter / 1000)
    top = geometry.full_radius
    count = int(math.ceil(top / step))
    return [step * k for k in range(1, count + 1)] + [top]


def auto_radius(points, geometry, r):
    """Smallest candidate ``R`` for which every packed ball holds ``>= r`` points."""
    P = np.asarray(points, dtype=float)
    for R in _radius_candidates(P, geometry):
        centers, _, in_ball = _regions(P, geometry, R, r)
        if np.all(in_ball >= r):
            return R
    raise InsufficientDensity(f"only {P.shape[0]} points available for cells of size {r}")


def _density(points, geometry, windows):
    return beurling_density(points, geometry, windows)


def thin_once(F, active_indices, epsilon, config=None, *, target_rank=None, iteration=1):
    """Remove one selector from the active subsystem of ``F``.

    Parameters
    ----------
    F : FrameSystem
    active_indices : sequence of int
        Positions of the current subsystem.
    epsilon : float in (0, 1]
    config : ThinningConfig, optional
    target_rank : int, optional
        Dimension of the span the subsystem must stay a frame for; defaults to
        the rank of ``F``.

    Returns
    -------
    dict
        ``removed``, ``new_active`` (global positions), ``new_bounds`` and the
        trace ``record``.

    Raises
    ------
    NoProgress
        If the frame-measure estimate is not below ``alpha``, the alpha-set is
        empty, or no selector keeps the lower bound positive.
    InsufficientDensity
        If cells of size ``r`` cannot be formed.
    CertificateFailure
        If the recomputed bounds contradict the selector certificate.
    """
    config = config or ThinningConfig(epsilon=epsilon)
    eps = check_epsilon(epsilon)
    active = check_indices(active_indices, len(F), name="active_indices")
    if active.size == 0:
        raise InvalidInput("active set is empty")
    if target_rank is None:
        target_rank = frame_bounds(F).rank
    Fa = F.subset(active)
    bounds = frame_bounds(Fa)
    if bounds.lower <= 0 or bounds.rank != target_rank:
        raise InvalidInput("active subsystem is not a frame for the target span")
    geometry = F.geometry
    windows = config.windows(geometry)

    params = choose_alpha_r(eps, config.r_override)
    alpha, r = params["alpha"], params["r"]
    m_plus = frame_measure(Fa, windows).M_plus
    if m_plus >= alpha:
        raise NoProgress(f"frame measure estimate {m_plus:.4g} is not below alpha = {alpha:.4g}")

    P = parseval_transform(Fa)
    local_alpha = alpha_set(Fa, alpha)
    if local_alpha.size == 0:
        raise NoProgress("alpha-set is empty")
    pts = Fa.index_points[local_alpha]
    R = config.R_override if config.R_override is not None else auto_radius(pts, geometry, r)
    cells_local = partition_cells(pts, geometry, R, r)
    partition = CellPartition([[int(local_alpha[i]) for i in c] for c in cells_local.cells])

    strategy = config.selector_strategy
    try:
        result = find_selector(P, partition, strategy, config.budget, config.restarts,
                               config.seed + iteration)
    except BudgetExceeded:
        strategy = "greedy"
        result = find_selector(P, partition, strategy)
    beta = result.achieved_bessel
    if beta >= 1 - 1e-12:
        raise NoProgress(f"best selector found has Parseval Bessel bound {beta:.6g} >= 1")

    removed = np.sort(active[list(result.selected)])
    new_active = np.setdiff1d(active, removed)
    new_sys = F.subset(new_active)
    new_bounds = frame_bounds(new_sys)
    certified_lower = bounds.lower * (1 - beta)
    if new_bounds.rank != target_rank or new_bounds.lower < certified_lower - CERT_SLACK:
        raise CertificateFailure(
            f"new lower bound {new_bounds.lower!r} below certificate {certified_lower!r}")
    if new_bounds.upper > bounds.upper + CERT_SLACK * max(1.0, bounds.upper):
        raise CertificateFailure("upper bound increased after removal")

    old_dens = _density(Fa.index_points, geometry, windows)
    new_dens = _density(new_sys.index_points, geometry, windows)
    target = params["target_bessel"]
    record = {
        "iteration": int(iteration),
        "alpha": alpha,
        "r": int(r),
        "r_theory": params["r_theory"],
        "R": float(R),
        "M_plus_estimate": m_plus,
        "Lambda_alpha_size": int(local_alpha.size),
        "cell_count": len(partition),
        "cell_size_min": partition.r_min,
        "cell_size_max": partition.r_max,
        "selector": result.to_dict() | {"selected_global": [int(i) for i in removed]},
        "selector_strategy": strategy,
        "achieved_bessel": beta,
        "target_bessel": target,
        "target_met": bool(beta < target),
        "removed": [int(i) for i in removed],
        "removed_count": int(removed.size),
        "active_size": int(new_active.size),
        "old_bounds": bounds.to_dict(),
        "new_bounds": new_bounds.to_dict(),
        "new_lower": new_bounds.lower,
        "new_upper": new_bounds.upper,
        "certified_lower": certified_lower,
        "nominal_lower": bounds.lower * eps / (eps + 4),
        "old_D0_plus": old_dens.D0_plus,
        "new_D0_minus": new_dens.D0_minus,
        "new_D0_plus": new_dens.D0_plus,
        "delta_observed": new_dens.D0_plus / old_dens.D0_plus,
        "density_radius": float(windows.headline_radius),
    }
    return {"removed": removed, "new_active": new_active, "new_bounds": new_bounds,
            "record": record}


def contraction_constants(F, epsilon, r):
    """The worst-case contraction ``delta`` and the a-priori pass count ``N'``."""
    eps = check_epsilon(epsilon)
    norms = F.norms_squared
    c = float(norms.min())
    B = frame_bounds(F).upper
    kb = F.geometry.kernel_bounds() if F.geometry is not None else None
    c1, c2 = kb if kb is not None else (1.0, 1.0)
    delta = 1.0 - eps / (32 * r) * (c1 / c2) * (c / B)
    if c <= 0 or B / c <= 1 + eps:
        n_cap = 0
    else:
        n_cap = int(math.ceil(math.log(c * (1 + eps) / B) / math.log(delta)))
    return {"delta": delta, "a_priori_iterations": n_cap, "c": c, "B": B,
            "C1": c1, "C2": c2}


def thin_to_density(F, epsilon=None, config=None):
    """Thin ``F`` until the headline ``D0-`` estimate is at most ``1 + epsilon``.

    Returns
    -------
    dict
        ``Gamma`` (sorted positions kept) and ``trace`` (:class:`ThinningTrace`).

    Raises
    ------
    PartialResult
        If ``max_iterations`` passes still leave ``D0- > 1 + epsilon``; the
        exception's ``result`` carries ``Gamma`` and ``trace``.
    """
    if config is None:
        config = ThinningConfig(epsilon=1.0 if epsilon is None else epsilon)
    eps = config.epsilon if epsilon is None else check_epsilon(epsilon)
    if F.geometry is None:
        raise InvalidInput("frame system has no geometry")
    bounds0 = frame_bounds(F)
    if bounds0.lower <= 0:
        raise InvalidInput("input is not a frame for its span")
    windows = config.windows(F.geometry)
    params = choose_alpha_r(eps, config.r_override)
    consts = contraction_constants(F, eps, params["r"])
    dens0 = _density(F.index_points, F.geometry, windows)
    trace = ThinningTrace(
        config=config.to_dict() | {"epsilon": eps},
        initial={
            "size": len(F),
            "bounds": bounds0.to_dict(),
            "D0_minus": dens0.D0_minus,
            "D0_plus": dens0.D0_plus,
            "density_radius": float(windows.headline_radius),
            "alpha": params["alpha"],
            "r": params["r"],
            "r_theory": params["r_theory"],
            "theorem_bound": params["theorem_bound"],
            **consts,
        },
    )
    active = np.arange(len(F))
    d0_minus = dens0.D0_minus
    stop = None
    iteration = 0
    while d0_minus > 1 + eps:
        if iteration >= min(config.max_iterations, len(F)):
            stop = "max_iterations"
            break
        try:
            step = thin_once(F, active, eps, config, target_rank=bounds0.rank,
                             iteration=iteration + 1)
        except NoProgress as exc:
            stop = "no_progress"
            trace.final["stop_detail"] = str(exc)
            break
        except InsufficientDensity as exc:
            stop = "insufficient_density"
            trace.final["stop_detail"] = str(exc)
            break
        if step["new_bounds"].lower < config.min_lower_bound:
            stop = "lower_bound_floor"
            trace.final["stop_detail"] = f"pass would drop the lower bound to {step['new_bounds'].lower!r}"
            break
        iteration += 1
        trace.records.append(step["record"])
        active = step["new_active"]
        d0_minus = step["record"]["new_D0_minus"]
    if stop is None:
        stop = "target_reached"

    final_sys = F.subset(active)
    final_bounds = frame_bounds(final_sys)
    final_dens = _density(final_sys.index_points, F.geometry, windows)
    trace.final.update({
        "Gamma": [int(i) for i in active],
        "size": int(active.size),
        "bounds": final_bounds.to_dict(),
        "D0_minus": final_dens.D0_minus,
        "D0_plus": final_dens.D0_plus,
        "iterations": iteration,
        "within_a_priori_cap": iteration <= consts["a_priori_iterations"],
        "certified_stop_reason": stop,
    })
    result = {"Gamma": active, "trace": trace}
    if stop == "max_iterations":
        raise PartialResult(f"D0- = {d0_minus:.4g} > {1 + eps} after {iteration} passes", result)
    return result


def check_near_critical_lemma(F, alpha, windows=None, band=DENSITY_BAND):
    """Compare ``((alpha - M+)/alpha) D0-(Lambda)`` against ``D0-(Lambda_alpha)``.

    Both sides are finite-radius estimates at the same headline radius; the
    inequality counts as holding when ``lhs <= (1 + band) * rhs``.
    """
    if F.geometry is None:
        raise InvalidInput("frame system has no geometry")
    if windows is None:
        windows = WindowFamily.grid(F.geometry)
    m_plus = frame_measure(F, windows).M_plus
    d_minus = beurling_density(F.index_points, F.geometry, windows).D0_minus
    idx = alpha_set(F, alpha)
    if idx.size:
        rhs = beurling_density(F.index_points[idx], F.geometry, windows).D0_minus
    else:
        rhs = 0.0
    lhs = (alpha - m_plus) / alpha * d_minus
    return {"lhs": lhs, "rhs": rhs, "M_plus": m_plus, "D0_minus": d_minus,
            "Lambda_alpha_size": int(idx.size), "slack": rhs - lhs,
            "holds": bool(lhs <= rhs * (1 + band) + 1e-12)}
