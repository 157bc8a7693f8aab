"""Batch front-end: density / solve / simulate / correlation / classify jobs.

Configuration comes from subcommand flags or a JSON job file (--config);
flags win.  Every job validates against a schema that rejects unknown keys.
Outputs are plot-ready CSV tables: header row, '.' decimal separator, 17
significant digits, LF line endings (bit-exactness matters for the
determinism tests).

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 spectrum-bound / domain error.
"""

import argparse
import json
import os
import sys

import jsonschema
import numpy as np

from . import bernstein, montecarlo, solver
from .errors import (
    ConfigError,
    DatumError,
    DomainError,
    NumericError,
    ParameterError,
    SimulationError,
    SpectrumBoundError,
    TruncationError,
    UsageError,
)
from .pearson import PolynomialSystem
from .pearson import from_descriptor as family_from_descriptor
from .spectral import SpectralExpansion
from .subordination import RenewalFunction

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DOMAIN = 4

_GRID = {"type": "string", "pattern": r"^-?[0-9.eE+-]+:-?[0-9.eE+-]+:[0-9]+$"}
_DESCRIPTOR = {"type": "object", "properties": {"kind": {"type": "string"}}, "required": ["kind"]}
_COMMON = {
    "out": {"type": ["string", "null"]},
    "seed": {"type": "integer"},
    "threads": {"type": ["integer", "null"]},
}

SCHEMAS = {
    "phi-eval": {
        "type": "object",
        "additionalProperties": False,
        "required": ["phi", "lambda_grid"],
        "properties": {"phi": _DESCRIPTOR, "lambda_grid": _GRID, **_COMMON},
    },
    "relax": {
        "type": "object",
        "additionalProperties": False,
        "required": ["phi", "lam", "t_grid"],
        "properties": {"phi": _DESCRIPTOR, "lam": {"type": "number"}, "t_grid": _GRID, **_COMMON},
    },
    "density": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family", "t", "x0", "x_grid"],
        "properties": {
            "family": _DESCRIPTOR,
            "phi": {**_DESCRIPTOR, "type": ["object", "null"]},
            "t": {"type": "number"},
            "x0": {"type": "number"},
            "x_grid": _GRID,
            "tail_tol": {"type": ["number", "null"]},
            "n_head": {"type": ["integer", "null"]},
            **_COMMON,
        },
    },
    "solve": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family", "phi", "mode", "datum", "t", "x_grid"],
        "properties": {
            "family": _DESCRIPTOR,
            "phi": _DESCRIPTOR,
            "mode": {"enum": ["backward", "forward"]},
            "datum": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kind"],
                "properties": {
                    "kind": {"enum": ["polynomial", "basis", "tabulated", "dirac"]},
                    "coeffs": {"type": "array", "items": {"type": "number"}},
                    "n": {"type": "integer"},
                    "x": {"type": "array", "items": {"type": "number"}},
                    "values": {"type": "array", "items": {"type": "number"}},
                },
            },
            "n_terms": {"type": "integer"},
            "t": {"type": "number"},
            "x_grid": _GRID,
            **_COMMON,
        },
    },
    "simulate": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family", "x0", "horizon", "paths"],
        "properties": {
            "family": _DESCRIPTOR,
            "phi": {**_DESCRIPTOR, "type": ["object", "null"]},
            "x0": {"type": ["number", "string"]},
            "horizon": {"type": "number"},
            "dt": {"type": "number"},
            "dt_operational": {"type": "number"},
            "paths": {"type": "integer"},
            "scheme": {"enum": ["euler", "exact"]},
            "obs": {"type": "array", "items": {"type": "number"}},
            **_COMMON,
        },
    },
    "correlation": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family", "phi", "t", "s", "paths"],
        "properties": {
            "family": _DESCRIPTOR,
            "phi": _DESCRIPTOR,
            "t": {"type": "number"},
            "s": {"type": "number"},
            "paths": {"type": "integer"},
            "dt": {"type": "number"},
            "scheme": {"enum": ["euler", "exact"]},
            **_COMMON,
        },
    },
    "classify": {
        "type": "object",
        "additionalProperties": False,
        "required": ["phi"],
        "properties": {"phi": _DESCRIPTOR, **_COMMON},
    },
}

DEFAULTS = {
    "seed": 0,
    "out": None,
    "threads": None,
    "dt": 1e-3,
    "dt_operational": 1e-3,
    "scheme": "euler",
    "phi": None,
    "tail_tol": None,
    "n_head": None,
    "n_terms": 8,
}


def _fmt(v):
    return f"{float(v):.17g}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _parse_grid(spec):
    try:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    except Exception as exc:
        raise ConfigError(f"bad grid spec {spec!r}: use start:stop:count") from exc


def _resolve_config(args):
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if cfg.pop("command", args.command) != args.command:
            raise ConfigError("config file is for a different subcommand")
    for key, value in vars(args).items():
        if key in ("command", "config", "dump_config", "func"):
            continue
        if value is not None:
            cfg[key] = value
    for key, schema_props in SCHEMAS[args.command]["properties"].items():
        if key not in cfg and key in DEFAULTS:
            cfg[key] = DEFAULTS[key]
    try:
        jsonschema.validate(cfg, SCHEMAS[args.command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid job config: {exc.message}") from exc
    if cfg.get("threads") is None and os.environ.get("NLP_THREADS"):
        try:
            cfg["threads"] = int(os.environ["NLP_THREADS"])
        except ValueError as exc:
            raise ConfigError("NLP_THREADS must be an integer") from exc
    return cfg


def _json_arg(text, what):
    if text is None:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON for {what}: {exc}") from exc


def _maybe_dump(args, cfg):
    if args.dump_config:
        print(json.dumps({"command": args.command, **cfg}, indent=1, sort_keys=True))
        return True
    return False


# ---- subcommand bodies ----
def _run_phi_eval(cfg):
    desc = bernstein.from_descriptor(cfg["phi"])
    lams = _parse_grid(cfg["lambda_grid"])
    rows = [(lam, float(desc.phi(lam))) for lam in lams]
    _write_csv(cfg["out"], ["lambda", "phi"], rows)


def _run_relax(cfg):
    from .relaxation import RelaxationEvaluator

    desc = bernstein.from_descriptor(cfg["phi"])
    ev = RelaxationEvaluator(desc)
    ts = _parse_grid(cfg["t_grid"])
    rows = [(t, cfg["lam"], float(ev.eigenfunction(t, cfg["lam"]))) for t in ts]
    _write_csv(cfg["out"], ["t", "lambda", "value"], rows)


def _run_density(cfg):
    family = family_from_descriptor(cfg["family"])
    phi = bernstein.from_descriptor(cfg["phi"]) if cfg.get("phi") else None
    se = SpectralExpansion(
        family, phi, tail_tol=cfg.get("tail_tol"), n_head=cfg.get("n_head")
    )
    xs = _parse_grid(cfg["x_grid"])
    xs = xs[family.contains(xs)]
    t, x0 = cfg["t"], cfg["x0"]
    if phi is None:
        vals, bound = se.transition_density(t, xs, x0, return_bound=True)
    else:
        vals, bound = se.nonlocal_transition_density(t, xs, x0, return_bound=True)
    rows = [(t, x, x0, v, bound) for x, v in zip(xs, vals)]
    _write_csv(cfg["out"], ["t", "x", "x0", "value", "abs_err_bound"], rows)


def _make_datum(cfg_datum, family, n_terms):
    kind = cfg_datum["kind"]
    if kind == "dirac":
        return "dirac"
    if kind == "polynomial":
        return np.asarray(cfg_datum["coeffs"], dtype=float)
    if kind == "basis":
        system = PolynomialSystem(family, max_n=max(cfg_datum["n"], n_terms - 1))
        return system.polynomial(cfg_datum["n"])
    if kind == "tabulated":
        xs = np.asarray(cfg_datum["x"], dtype=float)
        vs = np.asarray(cfg_datum["values"], dtype=float)

        def tabulated(x):
            return np.interp(x, xs, vs)

        return tabulated
    raise ConfigError(f"unknown datum kind {kind!r}")


def _run_solve(cfg):
    family = family_from_descriptor(cfg["family"])
    phi = bernstein.from_descriptor(cfg["phi"])
    datum = _make_datum(cfg["datum"], family, cfg["n_terms"])
    mode = cfg["mode"]
    expansion = solver.expand(family, datum, cfg["n_terms"], mode=mode)
    fieldv = solver.SolutionField(expansion, phi)
    xs = _parse_grid(cfg["x_grid"])
    xs = xs[family.contains(xs)]
    vals = fieldv.backward(cfg["t"], xs) if mode == "backward" else fieldv.forward(cfg["t"], xs)
    rows = [(cfg["t"], x, v) for x, v in zip(xs, np.atleast_1d(vals))]
    _write_csv(cfg["out"], ["t", "x", "value"], rows)


def _run_simulate(cfg):
    family = family_from_descriptor(cfg["family"])
    phi = bernstein.from_descriptor(cfg["phi"]) if cfg.get("phi") else None
    obs = cfg.get("obs") or [cfg["horizon"]]
    x0 = cfg["x0"]
    if isinstance(x0, str) and x0 != "stationary":
        raise ConfigError("x0 must be a number or 'stationary'")
    if phi is None:
        ts = montecarlo.simulate_pearson(
            family, x0, cfg["horizon"], dt=cfg["dt"], n_paths=cfg["paths"],
            seed=cfg["seed"], scheme=cfg["scheme"], obs_times=obs,
        )
    else:
        ts = montecarlo.simulate_nonlocal(
            family, phi, x0, cfg["horizon"], dt=cfg["dt"],
            dt_operational=cfg["dt_operational"], n_paths=cfg["paths"],
            seed=cfg["seed"], scheme=cfg["scheme"], obs_times=obs,
        )
    out = cfg["out"] or "trajectories"
    base = out[:-4] if out.endswith(".csv") else out
    ts.save(base)
    header = ["path"] + [f"t={_fmt(t)}" for t in ts.time_grid]
    rows = [(i, *ts.paths[i]) for i in range(ts.paths.shape[0])]
    _write_csv(f"{base}.csv", header, rows)


def _run_correlation(cfg):
    family = family_from_descriptor(cfg["family"])
    phi = bernstein.from_descriptor(cfg["phi"])
    t, s = cfg["t"], cfg["s"]
    if s > t:
        raise ParameterError("correlation requires t >= s")
    obs = sorted({v for v in (s, t) if v > 0})
    scheme = cfg.get("scheme") or ("exact" if family.kind == "ou" else "euler")
    ts = montecarlo.simulate_nonlocal(
        family, phi, "stationary", t, dt=cfg["dt"], n_paths=cfg["paths"],
        seed=cfg["seed"], scheme=scheme, obs_times=obs,
    )
    est, se = montecarlo.estimate_correlation(ts, t, s)
    lam1 = family.eigenvalue(1)
    renewal = RenewalFunction(phi, horizon=max(2.0 * t, 1.0))
    theory = montecarlo.theoretical_correlation(phi, lam1, t, s, renewal)
    _write_csv(cfg["out"], ["t", "s", "estimate", "std_error", "theory"],
               [(t, s, est, se, theory)])


def _run_classify(cfg):
    desc = bernstein.from_descriptor(cfg["phi"])
    label = desc.classify_dependence()
    if cfg["out"]:
        with open(cfg["out"], "w", newline="\n") as fh:
            fh.write("classification\n" + label + "\n")
    print(label)


RUNNERS = {
    "phi-eval": _run_phi_eval,
    "relax": _run_relax,
    "density": _run_density,
    "solve": _run_solve,
    "simulate": _run_simulate,
    "correlation": _run_correlation,
    "classify": _run_classify,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="nlpearson", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON job config; flags override its keys")
        p.add_argument("--dump-config", action="store_true", help="print the resolved job and exit")
        p.add_argument("--out", help="output CSV path (stdout if omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, help="worker cap (NLP_THREADS fallback)")

    p = sub.add_parser("phi-eval", help="evaluate a Bernstein function on a grid")
    p.add_argument("--phi", type=str)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=str)
    common(p)

    p = sub.add_parser("relax", help="relaxation eigenfunction on a t-grid")
    p.add_argument("--phi", type=str)
    p.add_argument("--lam", type=float)
    p.add_argument("--t-grid", dest="t_grid", type=str)
    common(p)

    p = sub.add_parser("density", help="classical or non-local transition density")
    p.add_argument("--family", type=str)
    p.add_argument("--phi", type=str)
    p.add_argument("--t", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--x-grid", dest="x_grid", type=str)
    p.add_argument("--tail-tol", dest="tail_tol", type=float)
    p.add_argument("--n-head", dest="n_head", type=int)
    common(p)

    p = sub.add_parser("solve", help="non-local Cauchy problem on a grid")
    p.add_argument("--family", type=str)
    p.add_argument("--phi", type=str)
    p.add_argument("--mode", choices=["backward", "forward"])
    p.add_argument("--datum", type=str, help='JSON, e.g. {"kind":"basis","n":2}')
    p.add_argument("--n-terms", dest="n_terms", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--x-grid", dest="x_grid", type=str)
    common(p)

    p = sub.add_parser("simulate", help="simulate paths, write npz + sidecar + CSV")
    p.add_argument("--family", type=str)
    p.add_argument("--phi", type=str)
    p.add_argument("--x0", type=str)
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--dt-operational", dest="dt_operational", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--scheme", choices=["euler", "exact"])
    p.add_argument("--obs", type=str, help="comma-separated observation times")
    common(p)

    p = sub.add_parser("correlation", help="stationary autocorrelation: MC vs theory")
    p.add_argument("--family", type=str)
    p.add_argument("--phi", type=str)
    p.add_argument("--t", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--scheme", choices=["euler", "exact"])
    common(p)

    p = sub.add_parser("classify", help="long/short-range dependence label")
    p.add_argument("--phi", type=str)
    common(p)
    return parser


def _preprocess(args):
    for key in ("phi", "family", "datum"):
        if hasattr(args, key):
            setattr(args, key, _json_arg(getattr(args, key), key))
    if getattr(args, "obs", None) is not None:
        try:
            args.obs = [float(v) for v in args.obs.split(",")]
        except ValueError as exc:
            raise ConfigError("bad --obs list") from exc
    if getattr(args, "x0", None) is not None and args.command == "simulate":
        if args.x0 != "stationary":
            try:
                args.x0 = float(args.x0)
            except ValueError as exc:
                raise ConfigError("x0 must be a number or 'stationary'") from exc


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _preprocess(args)
        cfg = _resolve_config(args)
        if _maybe_dump(args, cfg):
            return EXIT_OK
        if cfg.get("threads"):
            os.environ.setdefault("OMP_NUM_THREADS", str(cfg["threads"]))
            os.environ.setdefault("OPENBLAS_NUM_THREADS", str(cfg["threads"]))
        RUNNERS[args.command](cfg)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, TruncationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpectrumBoundError, DomainError, ParameterError, DatumError,
            SimulationError, UsageError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
