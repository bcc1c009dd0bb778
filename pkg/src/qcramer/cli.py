"""Command-line front end.

    qcramer verify <check> [--q --alpha --dim --norm --density --psi ... --tol --seed --out --format]
    qcramer simulate [scenario file] [--family --weight --estimator --theta --q --alpha --norm --budget --seed]
    qcramer scan <grid file> [--out --format]
    qcramer minimize [--q --alpha --dim --norm --target --knots --restarts --seed --density-out]

Exit codes: 0 all counted reports hold (ratio >= 1 - max(tol, numeric error)),
2 some report is violated, 1 usage or input error.  Every output embeds the
resolved configuration; ``--config`` replays one (either a bare config object
or a previous JSON output).  JSON floats carry 17 significant digits, CSV
floats 12; CSV output starts with a ``# config:`` comment line.

Grid file for ``scan``::

    check = q-location-cr          # a verify check or 'simulate'
    dim = 1                        # fixed parameters
    grid.q = 0.7, 0.9, 1.2         # one axis per 'grid.' key, Cartesian product
    grid.alpha = 1.5, 2, 3
"""

from __future__ import annotations

import argparse
import itertools
import json
import secrets
import sys
import warnings
from pathlib import Path

import numpy as np

from . import estimation as est
from . import inequalities as ineq
from .density import AnalyticDensity, write_grid
from .extremal import ExtremalConfig, extremal_search
from .info_measures import SupportError
from .norms import holder_check, holder_extremal, parse_norm
from .qgaussian import InadmissibleError
from .quadrature import DEFAULT, QuadratureConfig, QuadratureError, parallel_map
from .report import REPORT_FIELDS, InequalityReport, dumps_json, reports_to_csv, reports_to_json, rows_to_csv
from .specs import parse_density, parse_psi
from .uncertainty import (AliasingError, check_uncertainty_euclidean, check_uncertainty_general,
                          heisenberg_check)

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


def _float(v):
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return float("inf")
    return float(v)


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _opt_str(v):
    return None if v is None or str(v).lower() in ("", "none") else str(v)


def _opt_float(v):
    return None if v is None or str(v).lower() in ("", "none") else _float(v)


# name -> (type, default)
PARAMS = {
    "q": (_float, 1.0),
    "alpha": (_float, 2.0),
    "dim": (int, 1),
    "norm": (str, "lp:2"),
    "density": (_opt_str, None),
    "weight_density": (_opt_str, None),
    "psi": (str, "gauss:sigma=1"),
    "a": (_float, 2.0),
    "b": (_float, 2.0),
    "family": (str, "gauss-location:sigma=1"),
    "weight": (_opt_str, None),
    "escort_q": (_opt_float, None),
    "estimator": (str, "identity"),
    "theta": (str, "0"),
    "gamma_mom": (_float, 2.0),
    "theta_mom": (_float, 2.0),
    "raw_moments": (_bool, False),
    "extremal": (_bool, False),
    "budget": (int, 100_000),
    "target": (_float, 1.0),
    "knots": (int, 16),
    "restarts": (int, 6),
    "density_out": (_opt_str, None),
}

CHECK_KEYS = {
    "main-cr": ("family", "weight", "escort_q", "estimator", "theta", "alpha", "norm"),
    "q-cr": ("family", "q", "estimator", "theta", "alpha", "norm"),
    "location-cr": ("density", "weight_density", "alpha", "dim", "norm"),
    "q-location-cr": ("density", "q", "alpha", "dim", "norm"),
    "lutwak": ("density", "q", "alpha", "dim", "norm"),
    "moment-entropy": ("density", "q", "alpha", "dim", "norm"),
    "stam": ("density", "q", "alpha", "dim", "norm"),
    "beta-fn": ("a", "b"),
    "uncertainty-general": ("psi", "alpha", "q"),
    "uncertainty-euclidean": ("psi", "q", "gamma_mom", "theta_mom"),
    "heisenberg": ("psi", "raw_moments"),
    "holder": ("density", "alpha", "dim", "norm", "extremal"),
    "simulate": ("family", "weight", "escort_q", "estimator", "theta", "alpha", "norm", "budget"),
    "minimize": ("q", "alpha", "dim", "norm", "target", "knots", "restarts", "density_out"),
}
CHECKS = tuple(k for k in CHECK_KEYS if k not in ("simulate", "minimize"))
QUAD_KEYS = {"epsrel": float, "grid_nodes": int, "mc_samples": int}
TOP_KEYS = {"command", "check", "params", "seed", "tol", "format", "quadrature"}


# ------------------------------------------------------------- handlers


def _theta(text):
    return np.array([float(t) for t in str(text).split(",")])


def _g_density(p):
    if p["density"]:
        d = parse_density(p["density"])
    else:
        n, a, q = p["dim"], p["alpha"], p["q"]
        if not q > n / (n + a):
            raise InadmissibleError(f"M_q of the matched q-Gaussian diverges unless q > n/(n+alpha) = {n / (n + a):.6g}")
        d = parse_density(f"qgauss:q={p['q']!r},alpha={p['alpha']!r},gamma=1,n={p['dim']},norm={p['norm']}")
    if d.dim != p["dim"]:
        raise ValueError(f"density has dimension {d.dim}, --dim is {p['dim']}")
    return d


def _scenario(p, seed):
    return est.Scenario(family=p["family"], weight=p["weight"], estimator=p["estimator"],
                        theta=tuple(_theta(p["theta"])), alpha=p["alpha"], q=p["escort_q"], norm=p["norm"],
                        budget=p.get("budget", 100_000), seed=seed)


def _run_check(check, p, seed, cfg):
    norm = parse_norm(p["norm"]) if "norm" in p else None
    if check == "main-cr":
        s = _scenario(p, seed)
        f = est.make_family(s.family)
        g = est.make_weight(s, f, cfg)
        return [ineq.check_main_cr(f, g, est.make_estimator(s.estimator), np.asarray(s.theta), s.alpha, norm, cfg)]
    if check == "q-cr":
        g = est.make_family(p["family"])
        return list(ineq.check_q_cr(g, p["q"], est.make_estimator(p["estimator"]), _theta(p["theta"]), p["alpha"],
                                    norm, cfg))
    if check == "location-cr":
        f = parse_density(p["density"] or f"gauss:sigma=1,n={p['dim']}")
        g = parse_density(p["weight_density"]) if p["weight_density"] else f
        if not isinstance(f, AnalyticDensity):
            raise ValueError("location-cr needs an analytic f")
        return [ineq.check_location_cr(f, g, p["alpha"], norm, cfg)]
    if check == "q-location-cr":
        return [ineq.check_q_location_cr(_g_density(p), p["q"], p["alpha"], norm, cfg)]
    if check == "lutwak":
        return [ineq.check_lutwak_cr(_g_density(p), p["q"], p["alpha"], norm, cfg)]
    if check == "moment-entropy":
        return [ineq.check_moment_entropy(_g_density(p), p["q"], p["alpha"], norm, cfg)]
    if check == "stam":
        return [ineq.check_stam(_g_density(p), p["q"], p["alpha"], norm, cfg)]
    if check == "beta-fn":
        return [ineq.beta_function_inequality(p["a"], p["b"], cfg)]
    if check == "uncertainty-general":
        return list(check_uncertainty_general(parse_psi(p["psi"]), p["alpha"], p["q"], cfg))
    if check == "uncertainty-euclidean":
        reps = check_uncertainty_euclidean(parse_psi(p["psi"]), p["q"], p["gamma_mom"], p["theta_mom"], cfg)
        return [r for r in reps if r is not None]
    if check == "heisenberg":
        return [heisenberg_check(parse_psi(p["psi"]), centred=not p["raw_moments"])]
    if check == "holder":
        return [_holder(p, norm, seed)]
    if check == "simulate":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return [est.run_scenario(_scenario(p, seed), cfg).report]
    raise UsageError(f"unknown check {check!r}")


def _holder(p, norm, seed):
    """Random trigonometric fields X (and Y unless --extremal) against the weight density."""
    w = parse_density(p["density"] or "uniform:a=0,b=1")
    if w.dim != 1:
        raise ValueError("holder weight must be one-dimensional")
    rng = np.random.default_rng(seed)
    n = p["dim"]
    cx, px = rng.normal(size=(n, 3)), rng.uniform(0, 2 * np.pi, (n, 3))
    cy, py = rng.normal(size=(n, 3)), rng.uniform(0, 2 * np.pi, (n, 3))
    j = np.arange(1, 4)

    def field(c, ph):
        return lambda t: np.stack([(c[i] * np.cos(np.asarray(t)[:, :1] * j + ph[i])).sum(1) for i in range(n)], -1)

    X = field(cx, px)
    Y = holder_extremal(X, norm, p["alpha"]) if p["extremal"] else field(cy, py)
    lo, hi = np.asarray(w.lo, float), np.asarray(w.hi, float)
    rep = holder_check(X, Y, lambda t: w.pdf(t), norm, p["alpha"], lo=lo, hi=hi)
    rep.params["extremal"] = p["extremal"]
    return rep


def _counts(r: InequalityReport) -> bool:
    return bool(r.params.get("premise_holds", True))


def _violated(reports, tol) -> bool:
    return any(_counts(r) and not r.holds(tol) for r in reports)


def _minimize(p, seed, cfg):
    ec = ExtremalConfig(knots=p["knots"], restarts=p["restarts"], seed=seed)
    res = extremal_search(p["q"], p["alpha"], p["dim"], parse_norm(p["norm"]), p["target"], ec, cfg)
    if p["density_out"]:
        R = res.density.radial.r_max
        per = {1: 2049, 2: 257, 3: 65}.get(p["dim"], 33)
        axes = [np.linspace(-R, R, per)] * p["dim"]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, p["dim"])
        write_grid(p["density_out"], axes, res.density.pdf(pts).reshape((per,) * p["dim"]))
    return [res.report]


# ------------------------------------------------------------- config


def _coerce(key, value):
    if key not in PARAMS:
        raise UsageError(f"unknown parameter {key!r}")
    try:
        return PARAMS[key][0](value)
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad value for {key}: {value!r} ({e})") from None


def _load_config(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if isinstance(doc, dict) and "config" in doc and "reports" in doc:
        doc = doc["config"]
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    bad = set(doc) - TOP_KEYS
    if bad:
        raise UsageError(f"unknown config keys: {sorted(bad)}")
    for k in doc.get("params", {}):
        if k not in PARAMS:
            raise UsageError(f"unknown parameter {k!r} in config")
    for k in doc.get("quadrature", {}):
        if k not in QUAD_KEYS:
            raise UsageError(f"unknown quadrature key {k!r} in config")
    return doc


def _resolve(command, check, args, base):
    keys = CHECK_KEYS[check if command == "verify" else command]
    given = {k: getattr(args, k) for k in PARAMS if getattr(args, k, None) is not None}
    stray = set(given) - set(keys)
    if stray:
        flags = ", ".join("--" + k.replace("_", "-") for k in sorted(stray))
        raise UsageError(f"{flags} not used by {check or command}")
    bp = base.get("params", {})
    stray = set(bp) - set(keys)
    if stray:
        raise UsageError(f"config parameters {sorted(stray)} not used by {check or command}")
    params = {k: _coerce(k, given[k]) if k in given else (_coerce(k, bp[k]) if k in bp else PARAMS[k][1])
              for k in keys}
    quad = dict(base.get("quadrature", {}))
    for k, typ in QUAD_KEYS.items():
        v = getattr(args, k, None)
        if v is not None:
            quad[k] = typ(v)
    seed = args.seed if args.seed is not None else base.get("seed")
    if seed is None:
        seed = secrets.randbits(32)
    tol = args.tol if args.tol is not None else base.get("tol", 1e-8)
    fmt = args.format or base.get("format", "json")
    config = {"command": command, "check": check, "params": params, "seed": int(seed), "tol": float(tol),
              "format": fmt, "quadrature": {k: quad[k] for k in sorted(quad)}}
    return config


def _cfg(config) -> QuadratureConfig:
    return DEFAULT.with_(seed=config["seed"], **config["quadrature"])


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _render(reports, config):
    if config["format"] == "csv":
        return "# config: " + dumps_json(config) + "\n" + reports_to_csv(reports)
    return reports_to_json(reports, config)


# ------------------------------------------------------------- scan


def _read_grid_file(path):
    fixed, axes, check = {}, {}, None
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        k, sep, v = line.partition("=")
        k, v = k.strip(), v.strip()
        if not sep:
            raise UsageError(f"{path}:{ln}: expected 'key = value'")
        if k == "check":
            check = v
        elif k.startswith("grid."):
            name = k[5:]
            if name not in PARAMS:
                raise UsageError(f"{path}:{ln}: unknown parameter {name!r}")
            sep_char = ";" if name in ("theta", "density", "psi", "family", "weight", "norm", "estimator") else ","
            axes[name] = [_coerce(name, t.strip()) for t in v.split(sep_char) if t.strip()]
        else:
            fixed[k] = _coerce(k, v)
    if check not in CHECK_KEYS or check == "minimize":
        raise UsageError(f"{path}: 'check' must be one of {', '.join(CHECKS)} or simulate")
    stray = (set(fixed) | set(axes)) - set(CHECK_KEYS[check])
    if stray:
        raise UsageError(f"{path}: parameters {sorted(stray)} not used by {check}")
    return check, fixed, axes


def _scan(config, check, axes, cfg):
    names = list(axes)
    tuples = list(itertools.product(*(axes[k] for k in names))) if names else []
    base = config["params"]

    def one(values):
        p = dict(base, **dict(zip(names, values)))
        echo = {f"grid.{k}": v for k, v in zip(names, values)}
        try:
            reps = _run_check(check, p, config["seed"], cfg)
            return [dict(echo, **r.to_dict(), violation=_counts(r) and not r.holds(config["tol"]),
                         inadmissible=False, error="") for r in reps]
        except InadmissibleError as e:
            return [dict(echo, inadmissible=True, violation=False, error=str(e))]
        except (ValueError, ArithmeticError, RuntimeError, AssertionError) as e:
            return [dict(echo, inadmissible=False, violation=False, error=f"{type(e).__name__}: {e}")]

    rows = [r for chunk in parallel_map(one, tuples) for r in chunk]
    return names, rows


def _render_scan(names, rows, config):
    if config["format"] == "csv":
        pkeys = sorted({k for r in rows for k in r.get("params", {})})
        cols = [f"grid.{k}" for k in names] + list(REPORT_FIELDS) + ["violation", "inadmissible", "error"]
        cols += [f"param.{k}" for k in pkeys]
        flat = []
        for r in rows:
            d = {k: v for k, v in r.items() if k != "params"}
            d.update({f"param.{k}": v for k, v in r.get("params", {}).items()})
            flat.append(d)
        return "# config: " + dumps_json(config) + "\n" + rows_to_csv(flat, cols)
    return dumps_json({"config": config, "rows": rows}) + "\n"


# ------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(sp, keys):
    for k in keys:
        flag = "--" + k.replace("_", "-")
        if PARAMS[k][0] is _bool:
            sp.add_argument(flag, dest=k, action="store_const", const=True, default=None)
        else:
            sp.add_argument(flag, dest=k, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    sp.add_argument("--config", default=None, help="replay a config (JSON object or previous JSON output)")
    sp.add_argument("--epsrel", type=float, default=None)
    sp.add_argument("--grid-nodes", dest="grid_nodes", type=int, default=None)
    sp.add_argument("--mc-samples", dest="mc_samples", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qcramer", description="Numerical checks of generalized Cramer-Rao and uncertainty bounds.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    all_keys = sorted({k for c in CHECKS for k in CHECK_KEYS[c]})
    v = sub.add_parser("verify", help="evaluate one inequality")
    v.add_argument("check", choices=CHECKS)
    _add_common(v, all_keys)
    s = sub.add_parser("simulate", help="Monte Carlo run of the parametric bound")
    s.add_argument("scenario", nargs="?", default=None, help="scenario key-value file")
    _add_common(s, CHECK_KEYS["simulate"])
    g = sub.add_parser("scan", help="run a check over a parameter grid")
    g.add_argument("grid")
    _add_common(g, [])
    m = sub.add_parser("minimize", help="search for the Fisher-minimising radial density")
    _add_common(m, CHECK_KEYS["minimize"])
    return ap


def _scenario_params(path):
    s = est.read_scenario(path)
    return {"family": s.family, "weight": s.weight, "escort_q": s.q, "estimator": s.estimator,
            "theta": ",".join(repr(t) for t in s.theta), "alpha": s.alpha, "norm": s.norm, "budget": s.budget}, s.seed


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing command (verify, simulate, scan, minimize)")
        base = _load_config(args.config) if args.config else {}
        if base and base.get("command") not in (None, args.command):
            raise UsageError(f"config is for command {base['command']!r}")
        if args.command == "verify":
            if base.get("check") not in (None, args.check):
                raise UsageError(f"config is for check {base['check']!r}")
            config = _resolve("verify", args.check, args, base)
            reps = _run_check(args.check, config["params"], config["seed"], _cfg(config))
        elif args.command == "simulate":
            if args.scenario:
                sp, sseed = _scenario_params(args.scenario)
                base = dict(base, params=dict(sp, **base.get("params", {})))
                if base.get("seed") is None:
                    base["seed"] = sseed
            config = _resolve("simulate", None, args, base)
            reps = _run_check("simulate", config["params"], config["seed"], _cfg(config))
        elif args.command == "minimize":
            config = _resolve("minimize", None, args, base)
            reps = _minimize(config["params"], config["seed"], _cfg(config))
        else:
            if args.config:
                raise UsageError("scan takes its configuration from the grid file")
            check, fixed, axes = _read_grid_file(args.grid)
            seed = secrets.randbits(32) if args.seed is None else args.seed
            keys = CHECK_KEYS[check]
            params = {k: fixed.get(k, PARAMS[k][1]) for k in keys if k not in axes}
            quad = {k: QUAD_KEYS[k](getattr(args, k)) for k in QUAD_KEYS if getattr(args, k) is not None}
            config = {"command": "scan", "check": check, "params": params,
                      "grid": {k: axes[k] for k in axes}, "seed": int(seed),
                      "tol": float(args.tol if args.tol is not None else 1e-8),
                      "format": args.format or "json", "quadrature": quad}
            names, rows = _scan(config, check, axes, _cfg(config))
            _emit(_render_scan(names, rows, config), args.out)
            return EXIT_VIOLATION if any(r.get("violation") for r in rows) else EXIT_OK
        _emit(_render(reps, config), args.out)
        return EXIT_VIOLATION if _violated(reps, config["tol"]) else EXIT_OK
    except UsageError as e:
        print(f"qcramer: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, InadmissibleError, SupportError, AliasingError, QuadratureError, OSError,
            ineq.ConsistencyError, ineq.BoundaryError) as e:
        print(f"qcramer: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
