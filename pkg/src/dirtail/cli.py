"""Command-line front end.

One command per invocation, a JSON config in, a flat CSV or JSON table
out.  Output is data-only: columns are chosen so that one external plot
command can reproduce any ratio-convergence figure.  All randomized
commands require an explicit seed (config key or --seed); there is no
wall-clock seeding, and --workers must never change a result.

Exit codes: 0 success, 2 validation/config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__, aggtail, montecarlo
from .errors import DirtailError, DomainError, NumericError, ValidationError
from .radial import RadialModel

_COMMON_KEYS = {"alpha", "lambda", "p", "radial", "seed", "out", "format"}
_COMMAND_KEYS = {
    "approx": {"thresholds", "depths"},
    "simulate": {"thresholds", "depths", "n", "method"},
    "ratio": {"depths", "n", "oracle"},
    "var-es": {"levels"},
    "diagnose-mda": {"mode", "x", "t", "mu", "c", "x_grid", "depths", "n"},
    "maxstable": {"weights", "pair", "n_grid", "n"},
    "constants": set(),
}


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return cfg


def _check_keys(command: str, cfg: dict) -> None:
    allowed = _COMMON_KEYS | _COMMAND_KEYS[command]
    unknown = set(cfg) - allowed
    if unknown:
        raise ValidationError(
            f"unknown config keys for '{command}': {sorted(unknown)}; allowed: {sorted(allowed)}")


def _build_spec(cfg: dict) -> aggtail.AggregateSpec:
    for key in ("alpha", "lambda", "p", "radial"):
        if key not in cfg:
            raise ValidationError(f"config is missing required key '{key}'")
    radial = RadialModel.from_json(cfg["radial"])
    return aggtail.validate_spec(cfg["alpha"], cfg["lambda"], cfg["p"], radial)


def _spec_hash(cfg: dict) -> str:
    core = {k: cfg.get(k) for k in ("alpha", "lambda", "p", "radial")}
    blob = json.dumps(core, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _thresholds_from_config(cfg: dict, spec, asym) -> list[float]:
    if "thresholds" in cfg and "depths" in cfg:
        raise ValidationError("give either 'thresholds' or 'depths', not both")
    if "thresholds" in cfg:
        return [float(t) for t in cfg["thresholds"]]
    depths = cfg.get("depths", [1e-6, 1e-8, 1e-10])
    out = []
    for depth in depths:
        depth = float(depth)
        if not 0 < depth < 1:
            raise ValidationError(f"depths must lie in (0, 1), got {depth}")
        u = spec.radial.quantile_survival(depth)
        # the endpoint regime's base variable is the distance from the
        # endpoint, not the radial position
        if asym.base == "weibull":
            u = 1.0 - u
        out.append(asym.base_to_threshold(u))
    return out


def _depth_of(spec, asym, t: float) -> float:
    u = asym.threshold_to_base(t)
    if asym.base == "weibull":
        u = 1.0 - u
    return math.exp(spec.radial.log_survival(u))


# ----------------------------------------------------------------------
# command implementations: each returns (header, rows)
# ----------------------------------------------------------------------

def _cmd_approx(cfg, spec, seed, workers):
    asym = aggtail.tail_asymptotic(spec)
    info = aggtail.regime_classify(spec)
    header = ["threshold", "depth", "prediction_log", "regime"]
    rows = [[t, _depth_of(spec, asym, t), asym.evaluate_log(t), info.regime]
            for t in _thresholds_from_config(cfg, spec, asym)]
    return header, rows


def _cmd_simulate(cfg, spec, seed, workers):
    if seed is None:
        raise ValidationError("'simulate' needs an explicit seed (config key or --seed)")
    n = int(cfg.get("n", 10**5))
    method = cfg.get("method", "conditional")
    if method not in ("conditional", "crude"):
        raise ValidationError(f"method must be 'conditional' or 'crude', got {method!r}")
    asym = aggtail.tail_asymptotic(spec)
    fn = montecarlo.conditional_mc_tail if method == "conditional" else montecarlo.crude_mc_tail
    header = ["threshold", "method", "n", "seed", "p_hat", "log_p_hat", "stderr"]
    rows = []
    for t in _thresholds_from_config(cfg, spec, asym):
        est = fn(spec, t, n, seed, workers=workers)
        rows.append([t, est.method, est.n, est.seed, est.p_hat, est.log_p_hat, est.stderr])
    return header, rows


def _cmd_ratio(cfg, spec, seed, workers):
    n = int(cfg.get("n", 10**5))
    oracle = cfg.get("oracle", "conditional")
    if oracle not in ("conditional", "crude", "quadrature"):
        raise ValidationError(f"oracle must be conditional, crude or quadrature, got {oracle!r}")
    if oracle != "quadrature" and seed is None:
        raise ValidationError(f"'ratio' with the {oracle} oracle needs an explicit seed")
    asym = aggtail.tail_asymptotic(spec)
    header = ["threshold", "depth", "prediction_log", "oracle_log", "ratio"]
    rows = []
    for t in _thresholds_from_config(cfg, spec, asym):
        pred = asym.evaluate_log(t)
        if oracle == "quadrature":
            est = montecarlo.quadrature_tail(spec, t)
        elif oracle == "crude":
            est = montecarlo.crude_mc_tail(spec, t, n, seed, workers=workers)
        else:
            est = montecarlo.conditional_mc_tail(spec, t, n, seed, workers=workers)
        rows.append([t, _depth_of(spec, asym, t), pred, est.log_p_hat,
                     math.exp(pred - est.log_p_hat)])
    return header, rows


def _cmd_var_es(cfg, spec, seed, workers):
    levels = cfg.get("levels", [0.99, 0.999, 0.9999])
    header = ["level", "var", "es_minus_var", "accuracy_warning"]
    rows = []
    for b in levels:
        res = aggtail.var_es_asymptotic(spec, float(b))
        rows.append([float(b), res.var, res.es_minus_var, res.accuracy_warning])
    return header, rows


def _cmd_diagnose_mda(cfg, spec, seed, workers):
    mode = cfg.get("mode")
    if mode is None:
        raise ValidationError("'diagnose-mda' needs a 'mode'")
    if mode == "empirical":
        if seed is None:
            raise ValidationError("'diagnose-mda' in empirical mode needs an explicit seed")
        x_grid = cfg.get("x_grid", [0.5, 1.0, 2.0])
        depths = cfg.get("depths", [1e-4, 1e-6, 1e-8])
        n = int(cfg.get("n", 10**5))
        table = montecarlo.empirical_gumbel_mda(spec, x_grid, depths, n, seed)
        header = ["depth", "v", "x", "ratio", "reference"]
        return header, [list(row) for row in table]
    params = {}
    for key in ("x", "t", "mu", "c"):
        if key in cfg:
            params[key] = cfg[key]
    if "depths" in cfg:
        params["depths"] = [float(d) for d in cfg["depths"]]
    from .radial import mda_diagnostic
    table = mda_diagnostic(spec.radial, mode, params)
    header = ["u", "ratio"]
    return header, [list(row) for row in table]


def _cmd_maxstable(cfg, spec, seed, workers):
    if seed is None:
        raise ValidationError("'maxstable' needs an explicit seed")
    if "weights" not in cfg:
        raise ValidationError("'maxstable' needs a 'weights' matrix")
    weights = cfg["weights"]
    pair = cfg.get("pair", [0, 1])
    if len(pair) != 2:
        raise ValidationError(f"'pair' must be two column indices, got {pair}")
    n_grid = [int(v) for v in cfg.get("n_grid", [100, 1000, 10000])]
    n = int(cfg.get("n", 10**5))
    i, j = int(pair[0]), int(pair[1])
    table = montecarlo.pairwise_asymindep(list(spec.alpha), weights, spec.p, spec.radial,
                                          i, j, n_grid, n, seed)
    w = np.asarray(weights, dtype=float)
    header = ["n_level", "b_n", "a_n", "pair_ratio"]
    rows = []
    for (n_level, b_n, ratio) in table:
        col_spec = montecarlo._column_spec(list(spec.alpha), w[:, i], spec.p, spec.radial)
        consts = montecarlo.norming_constants(col_spec, int(n_level))
        rows.append([int(n_level), consts.b_n, consts.a_n, ratio])
    return header, rows


def _cmd_constants(cfg, spec, seed, workers):
    geom = aggtail.simplex_constant_recursion(spec)
    header = ["k", "lambda_tilde", "theta", "curvature", "c_tilde", "rv_index"]
    rows = []
    for k in range(2, geom.d + 1):
        rows.append([k, geom.lambda_tilde[k - 1], geom.theta[k - 2], geom.curvature[k - 2],
                     geom.c_tilde[k - 2], geom.rv_index[k - 2]])
    return header, rows


_COMMANDS = {
    "approx": _cmd_approx,
    "simulate": _cmd_simulate,
    "ratio": _cmd_ratio,
    "var-es": _cmd_var_es,
    "diagnose-mda": _cmd_diagnose_mda,
    "maxstable": _cmd_maxstable,
    "constants": _cmd_constants,
}


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------

def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        # 17 significant digits: enough to round-trip any double exactly
        return f"{float(v):.16e}"
    return str(v)


def _emit(out_path, fmt, command, cfg, seed, header, rows):
    meta = (f"# dirtail={__version__} command={command} "
            f"seed={'none' if seed is None else seed} spec_sha256={_spec_hash(cfg)}")
    if fmt == "csv":
        lines = [meta, ",".join(header)]
        lines += [",".join(_fmt_cell(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        doc = {"meta": {"dirtail": __version__, "command": command,
                        "seed": seed, "spec_sha256": _spec_hash(cfg)},
               "columns": header,
               "rows": [[(v if not isinstance(v, (np.integer, np.floating)) else v.item())
                         for v in row] for row in rows]}
        text = json.dumps(doc, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def run(command: str, cfg: dict, seed=None, workers: int = 1,
        out_path=None, fmt=None, dump_config=None) -> int:
    """Execute one command against a parsed config; returns the exit code."""
    if command not in _COMMANDS:
        raise ValidationError(f"unknown command {command!r}")
    _check_keys(command, cfg)
    if seed is None:
        seed = cfg.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    fmt = fmt or cfg.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"format must be 'csv' or 'json', got {fmt!r}")
    out_path = out_path or cfg.get("out")
    spec = _build_spec(cfg)

    if dump_config is not None:
        resolved = dict(cfg)
        if seed is not None:
            resolved["seed"] = seed
        resolved.setdefault("format", fmt)
        with open(dump_config, "w", encoding="utf-8") as fh:
            json.dump(resolved, fh, indent=2, sort_keys=True)
            fh.write("\n")

    header, rows = _COMMANDS[command](cfg, spec, seed, workers)
    _emit(out_path, fmt, command, cfg, seed, header, rows)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dirtail",
        description="Tail asymptotics of aggregated Dirichlet risks, with oracles.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", default=None, help="output path (default: stdout or config 'out')")
    parser.add_argument("--format", default=None, choices=["csv", "json"])
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker threads for the estimators; never changes results")
    parser.add_argument("--dump-config", default=None,
                        help="write the fully resolved config to this path before running")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        return run(args.command, cfg, seed=args.seed, workers=args.workers,
                   out_path=args.out, fmt=args.format, dump_config=args.dump_config)
    except NumericError as exc:
        print(f"dirtail: numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, DomainError, DirtailError) as exc:
        print(f"dirtail: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"dirtail: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
