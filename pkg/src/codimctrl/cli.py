"""Command-line front end: config-driven experiments with JSON/CSV output.

Commands
--------
gramian     assemble a Gramian and write its JSON payload
codim-scan  defect-count ladder scan; presets reproduce the wave/heat
            dichotomy (geometric-optics controlled wave vs heat)
hum         HUM control synthesis (wave exact, heat regularized)
lq          endpoint-constrained LQ solve
oracle      finite-dimensional equivalence checks, single or random sweep

Exit codes: 0 success, 2 validation failure, 3 numerical failure.  Errors
are written to stderr as one JSON object.  All outputs are deterministic:
identical config and seed give byte-identical files.
"""

import argparse
import json
import sys

import numpy as np

from . import codim as codim_mod
from . import synthesis
from .errors import NumericalError, ValidationError
from .gramian import assemble_heat_gramian, assemble_wave_gramian
from .oracle import check_equivalences, random_sweep
from .propagators import HeatState, WaveState
from .serialize import SCHEMA_VERSION, to_canonical_json, write_csv, write_json
from .spectral import ControlRegion, project_function

PRESETS = {
    "prop31-wave": {
        "kind": "wave", "omega": [0.25, 0.75], "potential": 0.0, "T": 1.0,
        "ladder": [16, 32, 64, 128],
    },
    "prop32-heat": {
        "kind": "heat", "omega": [0.2, 0.8], "potential": 0.0, "T": 0.1,
        "ladder": [16, 32, 64, 128],
    },
    "gcc-violated-wave": {
        "kind": "wave", "omega": [0.0, 0.3], "potential": 0.0, "T": 0.2,
        "ladder": [16, 32, 64, 128],
    },
}

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _error_json(exc):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    spectrum = getattr(exc, "spectrum", None)
    if spectrum is not None:
        eigs = getattr(spectrum, "eigs", spectrum)
        doc["spectrum"] = [float(x) for x in np.asarray(eigs).ravel()[:64]]
    return to_canonical_json(doc)


def _load_config(path):
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValidationError("config file must hold a JSON object")
    return doc


def _merge_config(args, parser_defaults):
    """Fill unset options from the config file; explicit flags win."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
    merged = {}
    for key, default in parser_defaults.items():
        val = getattr(args, key, None)
        if val is None:
            val = cfg.get(key, default)
        merged[key] = val
    return merged


def _region(omega):
    if omega is None or len(omega) != 2:
        raise ValidationError("control region needs two endpoints: --omega a b")
    return ControlRegion(float(omega[0]), float(omega[1]))


def _resolved(cfg):
    out = {}
    for k, v in cfg.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        out[k] = v
    return out


def _wave_target(cfg, N):
    pos = project_function(cfg["target"], N)
    vel = project_function(cfg.get("target_vel") or "zero", N)
    return WaveState(pos, vel)


def cmd_gramian(args):
    defaults = {"kind": None, "N": None, "T": None, "omega": None,
                "potential": 0.0, "out": None}
    cfg = _merge_config(args, defaults)
    if cfg["kind"] not in ("heat", "wave"):
        raise ValidationError("--kind must be heat or wave")
    if cfg["N"] is None or cfg["T"] is None:
        raise ValidationError("--N and --T are required")
    N, T = int(cfg["N"]), float(cfg["T"])
    region = _region(cfg["omega"])
    if cfg["kind"] == "heat":
        G = assemble_heat_gramian(N, T, region)
    else:
        G = assemble_wave_gramian(N, T, region, float(cfg["potential"]))
    G.validate()
    doc = {"schema": SCHEMA_VERSION, "config": _resolved(cfg),
           "gramian": G.to_json_dict()}
    if cfg["out"]:
        write_json(cfg["out"], doc)
    else:
        sys.stdout.write(to_canonical_json(doc))
    return EXIT_OK


def cmd_codim_scan(args):
    defaults = {"preset": None, "kind": None, "T": None, "omega": None,
                "potential": 0.0, "ladder": None, "tau": None, "tau_rel": None,
                "out": None, "csv": None}
    cfg = _merge_config(args, defaults)
    if cfg["preset"]:
        if cfg["preset"] not in PRESETS:
            raise ValidationError(
                f"unknown preset {cfg['preset']!r}; choose from {sorted(PRESETS)}")
        # preset pins the experiment; explicit command-line flags still win
        for key, val in PRESETS[cfg["preset"]].items():
            if getattr(args, key, None) is None:
                cfg[key] = val
    for key in ("kind", "T", "omega", "ladder"):
        if cfg[key] is None:
            raise ValidationError(f"--{key.replace('_', '-')} is required (or use --preset)")
    ladder = [int(x) for x in cfg["ladder"]]
    tau_rule = None
    if cfg["tau"] is not None:
        tau_rule = float(cfg["tau"])
    elif cfg["tau_rel"] is not None:
        tau_rule = f"rel:{float(cfg['tau_rel'])}"
    verdict = codim_mod.ladder_scan(cfg["kind"], float(cfg["T"]), _region(cfg["omega"]),
                                    float(cfg["potential"]), ladder, tau_rule)
    doc = {"schema": SCHEMA_VERSION, "config": _resolved(cfg),
           "verdict": verdict.to_json_dict()}
    if cfg["out"]:
        write_json(cfg["out"], doc)
    else:
        sys.stdout.write(to_canonical_json(doc))
    if cfg["csv"]:
        rows = codim_mod.eigenvalue_csv_rows(verdict.reports)
        write_csv(cfg["csv"], ("N", "j", "eig"), rows)
    return EXIT_OK


def cmd_hum(args):
    defaults = {"kind": None, "N": 64, "T": None, "omega": None,
                "potential": 0.0, "target": None, "target_vel": None,
                "y0": None, "eps": 1e-6, "cg_tol": 1e-10, "cert_tol": 1e-5,
                "out": None, "csv": None}
    cfg = _merge_config(args, defaults)
    if cfg["kind"] not in ("heat", "wave"):
        raise ValidationError("--kind must be heat or wave")
    if cfg["T"] is None or cfg["target"] is None:
        raise ValidationError("--T and --target are required")
    N, T = int(cfg["N"]), float(cfg["T"])
    region = _region(cfg["omega"])
    if cfg["kind"] == "wave":
        target = _wave_target(cfg, N)
        y0 = WaveState(project_function(cfg["y0"] or "zero", N),
                       np.zeros(N))
        sol = synthesis.hum_wave(target, y0, T, region, float(cfg["potential"]),
                                 N, cg_tol=float(cfg["cg_tol"]),
                                 cert_tol=float(cfg["cert_tol"]))
    else:
        target = HeatState(project_function(cfg["target"], N))
        y0 = HeatState(project_function(cfg["y0"] or "zero", N))
        sol = synthesis.hum_heat_regularized(target, y0, T, region, N,
                                             eps=float(cfg["eps"]))
    doc = {"schema": SCHEMA_VERSION, "config": _resolved(cfg),
           "solution": sol.to_json_dict()}
    if cfg["out"]:
        write_json(cfg["out"], doc)
    else:
        sys.stdout.write(to_canonical_json(doc))
    if cfg["csv"]:
        rows = synthesis.control_profile_rows(sol.control)
        write_csv(cfg["csv"], ("t", "u_norm"), rows)
    return EXIT_OK


def cmd_lq(args):
    defaults = {"kind": None, "alpha": 0.0, "beta": 1.0, "N": 32, "T": None,
                "omega": None, "potential": 0.0, "target": None,
                "target_vel": None, "y0": None, "steps": None, "radius": None,
                "out": None, "csv": None}
    cfg = _merge_config(args, defaults)
    if cfg["kind"] not in ("heat", "wave"):
        raise ValidationError("--kind must be heat or wave")
    if cfg["T"] is None or cfg["target"] is None:
        raise ValidationError("--T and --target are required")
    N, T = int(cfg["N"]), float(cfg["T"])
    region = _region(cfg["omega"])
    if cfg["kind"] == "wave":
        target = _wave_target(cfg, N)
        y0 = WaveState(project_function(cfg["y0"] or "zero", N), np.zeros(N))
    else:
        target = HeatState(project_function(cfg["target"], N))
        y0 = HeatState(project_function(cfg["y0"] or "zero", N))
    sol = synthesis.lq_endpoint(
        cfg["kind"], float(cfg["alpha"]), float(cfg["beta"]), target, y0, T,
        region, float(cfg["potential"]), N,
        time_grid=None if cfg["steps"] is None else int(cfg["steps"]),
        radius=None if cfg["radius"] is None else float(cfg["radius"]))
    doc = {"schema": SCHEMA_VERSION, "config": _resolved(cfg),
           "solution": sol.to_json_dict()}
    if cfg["out"]:
        write_json(cfg["out"], doc)
    else:
        sys.stdout.write(to_canonical_json(doc))
    if cfg["csv"]:
        rows = synthesis.control_profile_rows(sol.control)
        write_csv(cfg["csv"], ("t", "u_norm"), rows)
    return EXIT_OK


def cmd_oracle(args):
    defaults = {"A": None, "B": None, "T": 1.0, "random": None, "seed": 0,
                "out": None}
    cfg = _merge_config(args, defaults)
    reports = []
    if cfg["random"] is not None:
        spec = [int(x) for x in cfg["random"]]
        if len(spec) != 3:
            raise ValidationError("--random needs three integers: n m count")
        n_max, m_max, count = spec
        sweep = random_sweep(count, int(cfg["seed"]), n_max=n_max, m_max=m_max)
        reports = [rep.to_json_dict() for _, _, _, rep in sweep]
        all_ok = all(rep.consistent() for _, _, _, rep in sweep)
    else:
        if cfg["A"] is None or cfg["B"] is None:
            raise ValidationError("provide --A and --B files, or --random n m count")
        with open(cfg["A"]) as fh:
            A = np.asarray(json.load(fh), dtype=float)
        with open(cfg["B"]) as fh:
            B = np.asarray(json.load(fh), dtype=float)
        rep = check_equivalences(A, B, float(cfg["T"]))
        reports = [rep.to_json_dict()]
        all_ok = rep.consistent()
    doc = {"schema": SCHEMA_VERSION, "config": _resolved(cfg),
           "all_consistent": bool(all_ok), "reports": reports}
    if cfg["out"]:
        write_json(cfg["out"], doc)
    else:
        sys.stdout.write(to_canonical_json(doc))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="codimctrl",
        description="Gramian diagnostics and control synthesis for 1D wave/heat systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags take precedence")
        p.add_argument("--out", help="output JSON path (stdout when omitted)")

    p = sub.add_parser("gramian", help="assemble a controllability Gramian")
    common(p)
    p.add_argument("--kind", choices=["heat", "wave"])
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--omega", nargs=2, type=float)
    p.add_argument("--potential", type=float)
    p.set_defaults(func=cmd_gramian)

    p = sub.add_parser("codim-scan", help="defect-count ladder scan")
    common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--kind", choices=["heat", "wave"])
    p.add_argument("--T", type=float)
    p.add_argument("--omega", nargs=2, type=float)
    p.add_argument("--potential", type=float)
    p.add_argument("--ladder", nargs="+", type=int)
    p.add_argument("--tau", type=float, help="absolute defect threshold")
    p.add_argument("--tau-rel", dest="tau_rel", type=float,
                   help="threshold factor relative to lmax at the smallest N")
    p.add_argument("--csv", help="per-level eigenvalue CSV path")
    p.set_defaults(func=cmd_codim_scan)

    p = sub.add_parser("hum", help="HUM control synthesis")
    common(p)
    p.add_argument("--kind", choices=["heat", "wave"])
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--omega", nargs=2, type=float)
    p.add_argument("--potential", type=float)
    p.add_argument("--target", help="catalog descriptor, e.g. mode:1, bump, step")
    p.add_argument("--target-vel", dest="target_vel")
    p.add_argument("--y0")
    p.add_argument("--eps", type=float, help="heat regularization")
    p.add_argument("--cg-tol", dest="cg_tol", type=float)
    p.add_argument("--cert-tol", dest="cert_tol", type=float)
    p.add_argument("--csv", help="(t, |u|) profile CSV path")
    p.set_defaults(func=cmd_hum)

    p = sub.add_parser("lq", help="endpoint-constrained LQ solve")
    common(p)
    p.add_argument("--kind", choices=["heat", "wave"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--omega", nargs=2, type=float)
    p.add_argument("--potential", type=float)
    p.add_argument("--target")
    p.add_argument("--target-vel", dest="target_vel")
    p.add_argument("--y0")
    p.add_argument("--steps", type=int, help="time grid intervals (even)")
    p.add_argument("--radius", type=float, help="heat endpoint relaxation radius")
    p.add_argument("--csv", help="(t, |u|) profile CSV path")
    p.set_defaults(func=cmd_lq)

    p = sub.add_parser("oracle", help="finite-dimensional equivalence checks")
    common(p)
    p.add_argument("--A", help="JSON file with the A matrix")
    p.add_argument("--B", help="JSON file with the B matrix")
    p.add_argument("--T", type=float)
    p.add_argument("--random", nargs=3, type=int, metavar=("N", "M", "COUNT"))
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_VALIDATION
    except NumericalError as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
