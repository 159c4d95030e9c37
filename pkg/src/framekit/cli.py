"""Command-line experiment runner.

Every JSON document written by the CLI embeds a ``provenance`` block
(tool version, seed, config hash, theory constants). Output is
deterministic for a fixed seed, so repeated runs are byte-identical.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 partial
result, 5 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import stream
from .core import frame_bounds, parseval_transform
from .exceptions import (CertificateFailure, FramekitError, InvalidInput, NumericalFailure,
                         PartialResult)
from .generators import (GaborSpec, SpectrumSpec, exponential_system, full_index, gabor_probes,
                         gabor_system, gaussian_window, lattice_index, localization_profile,
                         mercedes_frame, orthonormal_basis, pw_kernel_system, random_system)
from .geometry import WindowFamily, beurling_density
from .io import (csv_text, dumps, frame_to_dict, load_frame, plot_rows, points_from_dict,
                 provenance)
from .measure import check_density_bounds, frame_measure, verify_frd
from .selector import STRATEGIES, CellPartition, find_selector, verify_selector_bound
from .thinning import (ThinningConfig, check_near_critical_lemma, choose_alpha_r,
                       contraction_constants, thin_to_density)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_PARTIAL, EXIT_CERTIFICATE = 0, 2, 3, 4, 5


# ----------------------------------------------------------------------------
# argument parsing helpers

def _number(text):
    """Parse ``0.5``, ``1/64`` or ``-3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"not a number: {text!r}") from exc


def _number_list(text):
    """``a,b,c`` or the inclusive range ``start:stop[:step]``."""
    text = text.strip()
    if ":" in text:
        parts = [_number(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise InvalidInput(f"bad range {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0:
            raise InvalidInput("range step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(max(n, 0))]
    return [_number(p) for p in text.split(",") if p.strip()]


def _int_pair(text):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 2:
        raise InvalidInput(f"expected two integers 'a,b', got {text!r}")
    return int(parts[0]), int(parts[1])


def _keyvals(text):
    """``N=8,width=2`` (a bare number is read as ``N``)."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
        else:
            out["N"] = part
    return out


def _intervals(text):
    """``0:1;2:2.5`` into ``[[0, 1], [2, 2.5]]``."""
    out = []
    for part in text.split(";"):
        if part.strip():
            lo, hi = part.split(":")
            out.append([_number(lo), _number(hi)])
    return out


# ----------------------------------------------------------------------------
# frame sources

def _source_config(args):
    """Resolve the frame source into a plain dict (flags override a spec file)."""
    base = {}
    if getattr(args, "spec", None):
        try:
            base = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read spec file {args.spec}: {exc}") from exc
        if not isinstance(base, dict) or len(base) != 1:
            raise InvalidInput("spec file must hold one object keyed by generator name")
    kind, cfg = (next(iter(base.items())) if base else (None, {}))
    cfg = dict(cfg)

    if getattr(args, "gabor", None):
        kind = "gabor"
        cfg.update(_keyvals(args.gabor))
    if getattr(args, "exponential", False) or getattr(args, "pw", None):
        kind = "pw" if args.pw else "exponential"
    if getattr(args, "onb", None):
        kind = "onb"
        cfg["d"] = args.onb
    if getattr(args, "mercedes", False):
        kind = "mercedes"
    if getattr(args, "random", None):
        kind = "random"
        cfg["dim"], cfg["n_vectors"] = _int_pair(args.random)

    if kind == "gabor":
        if args.lattice:
            cfg["index"] = {"lattice": list(_int_pair(args.lattice))}
        elif args.index:
            cfg["index"] = args.index
        if args.window:
            cfg["window"] = args.window
        cfg.setdefault("index", "full")
        cfg.setdefault("window", "gaussian")
        cfg["N"] = int(cfg["N"])
    elif kind in ("exponential", "pw"):
        if args.intervals:
            cfg["intervals"] = _intervals(args.intervals)
        if args.step:
            cfg["grid_step"] = _number(args.step)
        if args.freqs:
            cfg["frequencies"] = _number_list(args.freqs)
        if args.pw:
            extent, step = _number_list(args.pw)
            cfg["extent"], cfg["time_step"] = extent, step
        for key in ("intervals", "grid_step", "frequencies"):
            if key not in cfg:
                raise InvalidInput(f"{kind} source needs --{key.replace('_', '-')}")
    elif kind == "onb":
        cfg["d"] = int(cfg["d"])
        cfg["copies"] = int(args.copies)
    if kind is None:
        return None
    return {"kind": kind, **cfg}


def _gabor_window(cfg, seed):
    N, w = cfg["N"], str(cfg["window"])
    if w == "gaussian" or w.startswith("gaussian:"):
        width = _number(w.split(":", 1)[1]) if ":" in w else 1.0
        return gaussian_window(N, width)
    if w == "random":
        rng = stream(seed, "generators")
        return rng.standard_normal(N) + 1j * rng.standard_normal(N)
    raise InvalidInput(f"unknown window {w!r}; use gaussian[:width] or random")


def _gabor_index(cfg):
    N, idx = cfg["N"], cfg["index"]
    if idx == "full":
        return full_index(N)
    if isinstance(idx, dict) and "lattice" in idx:
        a, b = idx["lattice"]
        return lattice_index(N, int(a), int(b))
    raise InvalidInput(f"unknown index set {idx!r}; use full or --lattice a,b")


def _build(src, seed):
    kind = src["kind"]
    if kind == "gabor":
        return gabor_system(GaborSpec(src["N"], _gabor_window(src, seed), _gabor_index(src)))
    if kind in ("exponential", "pw"):
        spec = SpectrumSpec(src["intervals"], src["grid_step"])
        if kind == "exponential":
            return exponential_system(spec, src["frequencies"])
        F = pw_kernel_system(spec, src["frequencies"], src["extent"], src["time_step"])
        print(f"max kernel tail energy {F.meta['max_tail_energy']:.3e}", file=sys.stderr)
        return F
    if kind == "onb":
        return orthonormal_basis(src["d"], src["copies"])
    if kind == "mercedes":
        return mercedes_frame()
    if kind == "random":
        return random_system(src["dim"], src["n_vectors"], stream(seed, "generators"))
    raise InvalidInput(f"unknown generator {kind!r}")


def _load_system(args):
    src = _source_config(args)
    if src is not None and getattr(args, "frame", None):
        raise InvalidInput("give either a frame file or generator flags, not both")
    if src is not None:
        return _build(src, args.seed), src
    if getattr(args, "frame", None):
        return load_frame(args.frame), {"kind": "file", "path": str(args.frame)}
    raise InvalidInput("no frame given: pass a frame file or generator flags")


# ----------------------------------------------------------------------------
# output

def _theory_constants(epsilon, F=None, r_override=None):
    params = choose_alpha_r(epsilon, r_override)
    out = {"epsilon": float(epsilon), "alpha": params["alpha"], "r": params["r"],
           "theorem_bound": params["theorem_bound"], "delta": None}
    if F is not None and len(F) and float(F.norms_squared.min()) > 0:
        try:
            out["delta"] = contraction_constants(F, epsilon, params["r"])["delta"]
        except FramekitError:
            pass
    return out


def _config_of(args):
    skip = {"func", "out", "format", "gamma_out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, payload, report=None, theory=None):
    """Write ``payload`` as JSON (with provenance) or ``report`` rows as CSV."""
    if args.format == "csv":
        text = csv_text(plot_rows(report if report is not None else payload))
    else:
        doc = dict(payload)
        doc["provenance"] = provenance(args.seed, _config_of(args), theory)
        text = dumps(doc)
        if args.format == "text":
            text = "".join(f"{k} = {v!r}\n" for k, v in sorted(doc.items())
                           if isinstance(v, (int, float, str, bool)))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _windows(args, geometry):
    radii = _number_list(args.radii) if getattr(args, "radii", None) else None
    spacing = _number(args.spacing) if getattr(args, "spacing", None) else None
    return WindowFamily.grid(geometry, radii, spacing)


# ----------------------------------------------------------------------------
# subcommands

def cmd_gen(args):
    F, src = _load_system(args)
    doc = frame_to_dict(F)
    doc["source"] = src
    args.format = "json"
    _emit(args, doc, theory=_theory_constants(args.epsilon, F))
    return EXIT_OK


def cmd_bounds(args):
    F, src = _load_system(args)
    b = frame_bounds(F)
    payload = {"A": b.lower, "B": b.upper, "rank": b.rank, "on_span": b.on_span,
               "condition": b.condition if b.lower > 0 else None,
               "n_vectors": len(F), "ambient_dim": F.ambient_dim, "source": src}
    _emit(args, payload, {k: v for k, v in payload.items() if k != "source"},
          _theory_constants(args.epsilon, F))
    return EXIT_OK


def cmd_density(args):
    if args.points:
        try:
            pts, geo = points_from_dict(json.loads(Path(args.points).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InvalidInput(f"cannot read points file {args.points}: {exc}") from exc
        F = None
    else:
        F, _ = _load_system(args)
        if F.geometry is None:
            raise InvalidInput("frame system has no geometry")
        pts, geo = F.index_points, F.geometry
    report = beurling_density(pts, geo, _windows(args, geo))
    _emit(args, report.to_dict(), report, _theory_constants(args.epsilon, F))
    return EXIT_OK


def cmd_measure(args):
    F, _ = _load_system(args)
    if F.geometry is None:
        raise InvalidInput("frame system has no geometry")
    report = frame_measure(F, _windows(args, F.geometry))
    _emit(args, report.to_dict(), report, _theory_constants(args.epsilon, F))
    return EXIT_OK


def cmd_verify(args):
    F, _ = _load_system(args)
    if F.geometry is None:
        raise InvalidInput("frame system has no geometry")
    windows = _windows(args, F.geometry)
    theory = _theory_constants(args.epsilon, F)
    status = EXIT_OK
    if args.check == "frd":
        out = verify_frd(F, windows)
        if args.tol is not None:
            out["tol"] = args.tol
            out["holds"] = bool(out["max_deviation"] <= args.tol)
            status = EXIT_OK if out["holds"] else EXIT_CERTIFICATE
        row = out
    elif args.check == "density-bounds":
        out = check_density_bounds(F, windows, args.band)
        status = EXIT_OK if out["holds"] else EXIT_CERTIFICATE
        row = {k: v for k, v in out.items() if k != "checks"}
        row.update({f"{name}_holds": ch["holds"] for name, ch in out["checks"].items()})
    else:
        alpha = args.alpha if args.alpha is not None else theory["alpha"]
        out = check_near_critical_lemma(F, alpha, windows, args.band)
        out["alpha"] = alpha
        status = EXIT_OK if out["holds"] else EXIT_CERTIFICATE
        row = out
    out = {"check": args.check, **out}
    _emit(args, out, row, theory)
    return status


def cmd_thin(args):
    F, _ = _load_system(args)
    config = ThinningConfig(
        epsilon=args.epsilon, r_override=args.r, R_override=args.R,
        selector_strategy=args.strategy, max_iterations=args.max_iterations,
        min_lower_bound=args.min_lower_bound, density_radius=args.density_radius,
        window_spacing=args.spacing, budget=args.budget, restarts=args.restarts,
        seed=args.seed)
    theory = _theory_constants(args.epsilon, F, args.r)
    status = EXIT_OK
    try:
        result = thin_to_density(F, config=config)
    except PartialResult as exc:
        result, status = exc.result, EXIT_PARTIAL
        print(f"partial result: {exc}", file=sys.stderr)
    trace = result["trace"]
    if args.gamma_out:
        gamma = F.subset(result["Gamma"])
        doc = frame_to_dict(gamma)
        doc["Gamma"] = [int(i) for i in result["Gamma"]]
        doc["provenance"] = provenance(args.seed, _config_of(args), theory)
        Path(args.gamma_out).write_text(dumps(doc))
    _emit(args, trace.to_dict(), trace, theory)
    return status


def _consecutive_cells(n, size):
    if size < 1 or size > n:
        raise InvalidInput("cell size must lie in [1, n_vectors]")
    cells = [list(range(k, k + size)) for k in range(0, n - n % size, size)]
    if n % size:
        cells[-1].extend(range(n - n % size, n))
    return cells


def cmd_selector_bench(args):
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    bad = [s for s in strategies if s not in STRATEGIES]
    if bad or not strategies:
        raise InvalidInput(f"strategies must be drawn from {STRATEGIES}")
    src = _source_config(args)
    if args.frame or src is not None:
        F, _ = _load_system(args)
        systems = [parseval_transform(F)]
    else:
        rng = stream(args.seed, "bench")
        systems = [parseval_transform(random_system(args.dim, args.n_vectors, rng))
                   for _ in range(args.trials)]
    trials = []
    for t, P in enumerate(systems):
        cells = CellPartition(_consecutive_cells(len(P), args.cell_size))
        row = {"trial": t}
        for s in strategies:
            res = find_selector(P, cells, s, args.budget, args.restarts, args.seed + t)
            check = verify_selector_bound(P, res)
            row[f"{s}_achieved"] = res.achieved_bessel
            row[f"{s}_certified"] = bool(check["certified"])
            row["theorem_bound"] = res.theorem_bound
            row["alpha"] = res.alpha
        if "greedy" in strategies and "exhaustive" in strategies:
            row["greedy_gap"] = row["greedy_achieved"] - row["exhaustive_achieved"]
        trials.append(row)
    summary = {s: {"certified": sum(r[f"{s}_certified"] for r in trials),
                   "max_achieved": max(r[f"{s}_achieved"] for r in trials)}
               for s in strategies}
    payload = {"trials": trials, "summary": summary, "n_trials": len(trials),
               "cell_size": args.cell_size}
    _emit(args, payload, trials and _Rows(trials), _theory_constants(args.epsilon))
    return EXIT_OK


class _Rows(list):
    """Marker so ``plot_rows`` receives prepared rows."""


def cmd_localization(args):
    F, src = _load_system(args)
    radii = _number_list(args.radii) if args.radii else None
    if args.probes_file:
        probes = load_frame(args.probes_file)
    else:
        if src is None or src["kind"] != "gabor":
            raise InvalidInput("--probes needs a Gabor source; use --probes-file otherwise")
        pts = [_int_pair(p) for p in args.probes.split(";") if p.strip()]
        probes = gabor_probes(src["N"], pts)
    if radii is None:
        if F.geometry is None:
            raise InvalidInput("frame system has no geometry")
        radii = list(range(1, int(np.ceil(F.geometry.full_radius)) + 1))
    prof = localization_profile(F, probes, radii)
    tail = np.asarray(prof["tail"])
    monotone = bool(np.all(np.diff(tail, axis=1) <= 1e-12))
    rows = _Rows({"probe_index": i, "r": r, "tail": float(tail[i, j])}
                 for i in range(tail.shape[0]) for j, r in enumerate(prof["radii"]))
    payload = {"probes": prof["probes"], "radii": prof["radii"], "tail": tail.tolist(),
               "total": np.asarray(prof["total"]).tolist(), "monotone": monotone}
    _emit(args, payload, rows, _theory_constants(args.epsilon, F))
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser

def _add_common(p, frame=True):
    if frame:
        p.add_argument("frame", nargs="?", help="frame JSON file")
        g = p.add_argument_group("generator")
        g.add_argument("--spec", help="JSON spec file, e.g. {\"gabor\": {\"N\": 8}}")
        g.add_argument("--gabor", metavar="N=8", help="finite Gabor system on Z_N^2")
        g.add_argument("--index", choices=["full"], help="Gabor index set")
        g.add_argument("--lattice", metavar="a,b", help="Gabor lattice aZ_N x bZ_N")
        g.add_argument("--window", help="gaussian[:width] (default) or random")
        g.add_argument("--exponential", action="store_true", help="exponential system")
        g.add_argument("--pw", metavar="T,tau", help="sinc-type kernel system on [-T/2, T/2)")
        g.add_argument("--intervals", metavar="a:b;c:d", help="spectrum intervals")
        g.add_argument("--step", help="frequency-domain grid step h, e.g. 1/64")
        g.add_argument("--freqs", metavar="LIST", help="a,b,c or start:stop[:step]; write --freqs=-16:16 for negative starts")
        g.add_argument("--onb", type=int, metavar="d", help="orthonormal basis of C^d")
        g.add_argument("--copies", type=int, default=1, help="repeat the basis")
        g.add_argument("--mercedes", action="store_true", help="three vectors in R^2")
        g.add_argument("--random", metavar="dim,n", help="Gaussian random vectors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--out", help="output path (stdout by default)")
    p.add_argument("--format", choices=["json", "csv", "text"], default="json")


def _add_windows(p):
    p.add_argument("--radii", metavar="LIST", help="window radii")
    p.add_argument("--spacing", help="window center spacing")


def build_parser():
    parser = argparse.ArgumentParser(prog="framekit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"framekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a frame system and save it")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bounds", help="frame bounds on the span")
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("density", help="Beurling density estimates")
    _add_common(p)
    _add_windows(p)
    p.add_argument("--points", help="points JSON file instead of a frame")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("measure", help="frame measure estimates")
    _add_common(p)
    _add_windows(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("verify", help="check measure/density identities")
    p.add_argument("check", choices=["frd", "density-bounds", "near-critical"])
    _add_common(p)
    _add_windows(p)
    p.add_argument("--tol", type=float, help="frd: fail (exit 5) above this deviation")
    p.add_argument("--band", type=float, default=0.10, help="relative finite-size band")
    p.add_argument("--alpha", type=float, help="near-critical: sublevel alpha")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("thin", help="thin a frame toward density 1 + epsilon")
    _add_common(p)
    p.add_argument("--r", type=int, help="cell size override")
    p.add_argument("--R", type=float, help="packing radius override")
    p.add_argument("--strategy", choices=STRATEGIES, default="greedy")
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--min-lower-bound", type=float, default=0.0)
    p.add_argument("--density-radius", type=float)
    p.add_argument("--spacing", type=float, help="window center spacing")
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--gamma-out", help="write the kept subsystem as a frame file")
    p.set_defaults(func=cmd_thin)

    p = sub.add_parser("selector-bench", help="compare selector strategies")
    _add_common(p)
    p.add_argument("--strategies", default="exhaustive,greedy")
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--n-vectors", type=int, default=16)
    p.add_argument("--cell-size", type=int, default=4)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--restarts", type=int, default=64)
    p.set_defaults(func=cmd_selector_bench)

    p = sub.add_parser("localization", help="tail-energy profiles of probe kernels")
    _add_common(p)
    p.add_argument("--probes", default="0,0", metavar="a,b;c,d", help="Gabor probe points")
    p.add_argument("--probes-file", help="probe vectors as a frame file")
    p.add_argument("--radii", metavar="LIST", help="radii (default 1..full radius)")
    p.set_defaults(func=cmd_localization)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PartialResult as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except CertificateFailure as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FramekitError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
