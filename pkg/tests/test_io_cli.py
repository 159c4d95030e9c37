"""Persistence and the command-line runner."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framekit import GaborSpec, frame_bounds, gabor_system, thin_to_density
from framekit.cli import main
from framekit.generators import mercedes_frame, random_system
from framekit.geometry import WindowFamily, beurling_density
from framekit.io import (dumps, emit_plotdata, frame_from_dict, frame_to_dict, load_frame,
                         plot_rows, save_frame)
from framekit.thinning import ThinningConfig


def _run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_frame_round_trip_is_exact(tmp_path):
    F = gabor_system(GaborSpec(6))
    save_frame(F, tmp_path / "f.json")
    G = load_frame(tmp_path / "f.json")
    np.testing.assert_array_equal(G.vectors, F.vectors)
    np.testing.assert_array_equal(G.index_points, F.index_points)
    assert G.geometry.same_as(F.geometry)
    assert frame_bounds(G) == frame_bounds(F)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_round_trip_property(seed):
    F = random_system(3, 5, np.random.default_rng(seed))
    G = frame_from_dict(json.loads(dumps(frame_to_dict(F))))
    np.testing.assert_array_equal(G.vectors, F.vectors)


def test_dumps_rejects_nan():
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})


def test_plot_rows_counts(tmp_path):
    geo = gabor_system(GaborSpec(8)).geometry
    windows = WindowFamily(np.array([[i, i] for i in range(5)], dtype=float), (2, 3, 4))
    rep = beurling_density(gabor_system(GaborSpec(8)).index_points, geo, windows)
    assert emit_plotdata(rep, tmp_path / "d.csv") == 15
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "r,center_index,count,measure,ratio,weighted_ratio"
    assert len(lines) == 16
    F = gabor_system(GaborSpec(16))
    cfg = ThinningConfig(r_override=2, seed=7)
    trace = thin_to_density(F, config=cfg)["trace"]
    assert len(plot_rows(trace)) == len(trace.records) == 4


def test_gen_then_bounds(tmp_path, capsys):
    f = tmp_path / "f.json"
    code, _, _ = _run(["gen", "--gabor", "N=8", "--index", "full", "--out", f], capsys)
    assert code == 0
    code, out, _ = _run(["bounds", f], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["A"] == pytest.approx(8) and doc["B"] == pytest.approx(8)
    for key in ("tool_version", "seed", "config_hash", "theory_constants"):
        assert key in doc["provenance"]
    code, text, _ = _run(["bounds", f, "--format", "text"], capsys)
    assert "A = " in text and "B = " in text


def test_cli_round_trip_matches_memory(tmp_path, capsys):
    f = tmp_path / "m.json"
    _run(["gen", "--mercedes", "--out", f], capsys)
    _, out, _ = _run(["bounds", f], capsys)
    b = frame_bounds(mercedes_frame())
    doc = json.loads(out)
    assert doc["A"] == b.lower and doc["B"] == b.upper


def test_verify_frd_lattice(capsys):
    code, out, _ = _run(["verify", "frd", "--gabor", "N=8", "--lattice", "2,2", "--tol", "1e-8"],
                        capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["product_plus"] == pytest.approx(1, abs=1e-8)
    assert doc["product_minus"] == pytest.approx(1, abs=1e-8)
    code, out, _ = _run(["verify", "frd", "--gabor", "N=8", "--lattice", "2,2",
                         "--format", "csv"], capsys)
    assert len(out.splitlines()) == 2 and "product_plus" in out.splitlines()[0]


def test_thin_is_byte_identical(tmp_path, capsys):
    f = tmp_path / "f.json"
    _run(["gen", "--gabor", "N=8", "--index", "full", "--out", f], capsys)
    outs = []
    for k in range(2):
        t = tmp_path / f"t{k}.json"
        code, _, _ = _run(["thin", f, "--epsilon", "1", "--seed", "7", "--out", t], capsys)
        assert code == 0
        outs.append(t.read_bytes())
    assert outs[0] == outs[1]
    code, _, _ = _run(["thin", f, "--epsilon", "1", "--seed", "7", "--r", "2", "--out",
                       tmp_path / "t.json", "--gamma-out", tmp_path / "g.json"], capsys)
    trace = json.loads((tmp_path / "t.json").read_text())
    gamma = load_frame(tmp_path / "g.json")
    assert len(gamma) == trace["final"]["size"]
    assert trace["provenance"]["theory_constants"]["r"] == 2


def test_thin_partial_exit_code(tmp_path, capsys):
    code, _, err = _run(["thin", "--gabor", "N=16", "--r", "2", "--max-iterations", "1",
                         "--out", tmp_path / "t.json"], capsys)
    assert code == 4 and "partial" in err
    assert json.loads((tmp_path / "t.json").read_text())["final"]["iterations"] == 1


def test_exit_codes(tmp_path, capsys):
    assert _run(["bounds", tmp_path / "missing.json"], capsys)[0] == 2
    assert _run(["gen", "--gabor", "N=8", "--lattice", "3,2"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"version": 1, "ambient_dim": 1, "vectors": [[[1e308, 0]]],
                               "index_points": [[0.0]], "geometry_ref": None}))
    code = _run(["bounds", bad, "--random", "2,2"], capsys)[0]
    assert code == 2


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("no convergence")
    monkeypatch.setattr(np.linalg, "eigh", boom)
    monkeypatch.setattr(np.linalg, "eigvalsh", boom)
    assert _run(["bounds", "--onb", "3"], capsys)[0] == 3


def test_certificate_exit_code(capsys):
    code, out, _ = _run(["verify", "density-bounds", "--onb", "4"], capsys)
    assert code == 0 and json.loads(out)["holds"]
    code, _, _ = _run(["verify", "frd", "--random", "3,6", "--tol", "1e-12"], capsys)
    assert code == 5


def test_spec_file_and_flag_precedence(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"gabor": {"N": 4, "index": "full"}}))
    _, out, _ = _run(["bounds", "--spec", spec], capsys)
    assert json.loads(out)["A"] == pytest.approx(4)
    _, out, _ = _run(["bounds", "--spec", spec, "--gabor", "N=6"], capsys)
    assert json.loads(out)["A"] == pytest.approx(6)


def test_exponential_source(capsys):
    code, out, _ = _run(["bounds", "--exponential", "--intervals", "0:1", "--step", "1/64",
                         "--freqs=-16:16"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["rank"] == 33
    assert doc["A"] == pytest.approx(1) and doc["B"] == pytest.approx(1)


def test_density_measure_localization_bench(capsys):
    code, out, _ = _run(["density", "--gabor", "N=8", "--radii", "2,3,5"], capsys)
    assert code == 0 and json.loads(out)["headline"]["D_minus"] == pytest.approx(8)
    code, out, _ = _run(["measure", "--gabor", "N=8", "--format", "csv"], capsys)
    assert code == 0 and out.startswith("r,center_index,count,sum_diagonal,average")
    code, out, _ = _run(["localization", "--gabor", "N=8", "--probes", "0,0;2,3",
                         "--radii", "1,2,4"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["monotone"] and len(doc["tail"]) == 2
    code, out, _ = _run(["selector-bench", "--trials", "2", "--dim", "4", "--n-vectors", "8",
                         "--cell-size", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["exhaustive"]["certified"] == 2


def test_every_json_output_is_finite(capsys):
    for args in (["bounds", "--onb", "4"], ["verify", "near-critical", "--onb", "4",
                                            "--copies", "2"]):
        _, out, _ = _run(args, capsys)
        json.loads(out, parse_constant=lambda c: pytest.fail(f"non-finite {c}"))
