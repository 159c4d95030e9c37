"""Selector-based thinning."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framekit import (GaborSpec, InsufficientDensity, InvalidInput, NoProgress, PartialResult,
                      PointGeometry, ThinningConfig, alpha_set, check_near_critical_lemma,
                      choose_alpha_r, frame_bounds, gabor_system, orthonormal_basis,
                      partition_cells, thin_once, thin_to_density)
from framekit.generators import lattice_index
from framekit.selector import theorem_bound
from framekit.thinning import auto_radius, contraction_constants


def _r_oracle(eps):
    # independent oracle: linear scan for the first r meeting the target
    alpha = 1 / (1 + eps / 2)
    target = 1 / (1 + eps / 4)
    r = 1
    while (1 / math.sqrt(r) + math.sqrt(alpha)) ** 2 >= target:
        r += 1
    return alpha, r


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.1])
def test_choose_alpha_r_matches_scan(eps):
    alpha, r = _r_oracle(eps)
    out = choose_alpha_r(eps)
    assert out["alpha"] == pytest.approx(alpha)
    assert out["r"] == r
    assert out["theorem_bound"] < out["target_bessel"]


def test_known_cell_sizes():
    assert choose_alpha_r(1.0)["r"] == 165
    assert choose_alpha_r(0.1)["r"] == 7147
    over = choose_alpha_r(1.0, r_override=2)
    assert over["r"] == 2 and over["r_theory"] == 165
    assert over["theorem_bound"] == pytest.approx(theorem_bound(2, 2 / 3))


def test_epsilon_validation():
    with pytest.raises(InvalidInput):
        choose_alpha_r(0.0)
    with pytest.raises(InvalidInput):
        ThinningConfig(epsilon=1.5)
    with pytest.raises(InvalidInput):
        ThinningConfig(selector_strategy="annealing")


def test_alpha_set_on_lattice():
    F = gabor_system(GaborSpec(8, index_set=lattice_index(8, 2, 2)))
    assert alpha_set(F, 0.6).size == 16
    assert alpha_set(F, 0.4).size == 0


def test_partition_cells_sizes_and_disjointness():
    geo = PointGeometry.line(0, 30)
    pts = np.arange(30, dtype=float)[:, None]
    part = partition_cells(pts, geo, 3.0, 2)
    flat = sorted(i for c in part.cells for i in c)
    assert flat == list(range(30))
    assert all(2 <= len(c) <= 3 * 2 - 1 for c in part.cells)


def test_partition_insufficient_density():
    geo = PointGeometry.line(0, 30)
    with pytest.raises(InsufficientDensity):
        partition_cells(np.arange(0, 30, 5.0)[:, None], geo, 2.0, 2)
    with pytest.raises(InsufficientDensity):
        auto_radius(np.arange(3.0)[:, None], geo, 5)


def test_thin_once_doubled_basis():
    F = orthonormal_basis(8, copies=2)
    A0, B0 = frame_bounds(F).lower, frame_bounds(F).upper
    cfg = ThinningConfig(epsilon=1.0, r_override=2, selector_strategy="exhaustive")
    step = thin_once(F, np.arange(16), 1.0, cfg)
    new = step["new_bounds"]
    assert new.lower >= A0 / 5 - 1e-8
    assert new.upper <= B0 + 1e-8
    rec = step["record"]
    assert rec["removed_count"] == 8 and rec["achieved_bessel"] == pytest.approx(0.5)
    assert new.lower >= rec["certified_lower"] - 1e-8


def test_thin_once_no_progress_on_basis():
    F = orthonormal_basis(6)
    with pytest.raises(NoProgress):
        thin_once(F, np.arange(6), 1.0, ThinningConfig(r_override=2))


def test_thin_to_density_gabor_8():
    F = gabor_system(GaborSpec(8))
    cfg = ThinningConfig(epsilon=1.0, r_override=2, seed=7)
    out = thin_to_density(F, config=cfg)
    trace = out["trace"]
    assert trace.final["certified_stop_reason"] == "target_reached"
    assert trace.final["D0_minus"] <= 2.5
    assert frame_bounds(F.subset(out["Gamma"])).lower > 0
    d0 = [trace.initial["D0_plus"]] + [rec["new_D0_plus"] for rec in trace.records]
    assert all(b < a for a, b in zip(d0, d0[1:]))
    assert len(trace.summary_rows()) == len(trace.records)


def test_thin_to_density_with_theory_r_stops_cleanly():
    F = gabor_system(GaborSpec(8))
    out = thin_to_density(F, 1.0)
    assert out["trace"].final["certified_stop_reason"] == "insufficient_density"
    assert out["Gamma"].size == 64


def test_max_iterations_gives_partial_result():
    F = gabor_system(GaborSpec(16))
    cfg = ThinningConfig(epsilon=1.0, r_override=2, max_iterations=1, seed=7)
    with pytest.raises(PartialResult) as info:
        thin_to_density(F, config=cfg)
    assert len(info.value.result["trace"].records) == 1


def test_thinning_rejects_non_frames():
    F = orthonormal_basis(4)
    bad = F.with_vectors(np.zeros((4, 4)))
    with pytest.raises(InvalidInput):
        thin_to_density(bad, 1.0)


def test_contraction_constants_formula():
    F = gabor_system(GaborSpec(8))
    out = contraction_constants(F, 1.0, 2)
    assert out["delta"] == pytest.approx(1 - 1 / 64 * 1 * (1 / 8))
    assert out["a_priori_iterations"] == math.ceil(math.log(2 / 8) / math.log(out["delta"]))


def test_near_critical_lemma_doubled_basis():
    out = check_near_critical_lemma(orthonormal_basis(8, copies=2), 2 / 3)
    assert out["holds"]
    assert out["Lambda_alpha_size"] == 16


def _run(F, cfg):
    try:
        return thin_to_density(F, config=cfg)
    except PartialResult as exc:
        return exc.result


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**20))
def test_thinning_is_deterministic_and_certified(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    F = gabor_system(GaborSpec(6, g))
    cfg = ThinningConfig(epsilon=1.0, r_override=2, seed=seed, max_iterations=3)
    a, b = _run(F, cfg), _run(F, cfg)
    assert np.array_equal(a["Gamma"], b["Gamma"])
    assert frame_bounds(F.subset(a["Gamma"])).lower > 0
    for rec in a["trace"].records:
        assert rec["new_lower"] >= rec["certified_lower"] - 1e-8
        assert rec["new_upper"] <= rec["old_bounds"]["upper"] + 1e-8
