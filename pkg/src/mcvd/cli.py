"""Command-line front end.

    mcvd run CONFIG.json [--seed N] [--out PATH] [--realizations N]
    mcvd compare ANALYTIC.csv MC.csv [--threshold Z] [--min-pass-rate R]
    mcvd presets list | show ID

Configs are flat JSON objects. Exit codes: 0 success, 1 comparison below
the pass rate, 2 configuration error, 3 numeric failure (rows computed
before the failure are still written, with an ``error`` column).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import ber, expectations
from .channel import SystemParams
from .distance import DistanceDistribution
from .exceptions import DomainError, NumericError
from .simulator import SimConfig, estimate_ber, estimate_ber_curve

EXIT_OK, EXIT_COMPARE_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

PARAM_KEYS = {"D": "D", "mu": "mu", "a": "a", "N": "N", "ts": "ts", "lambda": "lam", "p1": "p1"}
SWEEP_COLUMNS = {
    "ts": "ts_s",
    "rd": "rd_um",
    "eta": "eta",
    "lambda": "lambda_per_um3",
    "mu": "mu_per_s",
}
MODES = ("expectations", "ber_analytic", "ber_mc", "threshold_table", "figure")
KNOWN_KEYS = set(PARAM_KEYS) | {
    "mode", "figure", "source", "rd", "rd_b", "rd_c", "eta", "eta_max", "L", "K",
    "method", "policy", "step", "sweep_var", "sweep", "output", "format", "seed",
    "realizations", "r_max", "sampling", "pin_bits", "n_jobs", "description",
}

BER_COLUMNS = ["peb0", "peb1", "pe"]
EXP_COLUMNS = ["e_s", "e_i", "e_c", "e_t"]


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# presets

_FIG_BASE = {"D": 74.9, "a": 4.0, "N": 100, "ts": 0.5, "p1": 0.5}

PRESETS = {
    "fig3": {
        "description": "expected counts versus slot duration (steady state)",
        "mode": "expectations", "mu": 1.0, "lambda": 1e-5, "rd": 10.0,
        "sweep_var": "ts", "sweep": [round(0.1 * k, 10) for k in range(1, 101)],
        "series": [("steady", {})],
    },
    "fig4": {
        "description": "expected counts versus tagged distance",
        "mode": "expectations", "mu": 1.0, "lambda": 1e-5,
        "sweep_var": "rd", "sweep": [round(4.0 + 0.5 * k, 10) for k in range(1, 53)],
        "series": [("steady", {})],
    },
    "fig5": {
        "description": "error probability versus threshold, fixed distances",
        "mode": "ber", "mu": 5.0, "lambda": 1e-5,
        "sweep_var": "eta", "sweep": list(range(0, 31)),
        "series": [(f"rd_um={r:g}", {"rd": r}) for r in (8.0, 10.0, 12.0)],
    },
    "fig6": {
        "description": "error probability versus threshold, uniform distance",
        "mode": "ber", "mu": 5.0, "rd_b": 4.1, "rd_c": 10.0,
        "sweep_var": "eta", "sweep": list(range(0, 41)),
        "series": [(f"lambda_per_um3={v:g}", {"lambda": v}) for v in (1e-5, 1e-4)],
    },
    "fig7": {
        "description": "single versus distance-adaptive threshold",
        "mode": "ber", "mu": 5.0, "rd_b": 4.1, "rd_c": 10.0, "step": 0.1, "eta": "opt",
        "sweep_var": "lambda", "sweep": [1e-5, 2.5e-5, 5e-5, 7.5e-5, 1e-4],
        "series": [("single", {"policy": "single"}), ("adaptive", {"policy": "adaptive"})],
    },
    "fig8": {
        "description": "error probability versus tagged distance with and without ISI",
        "mode": "ber", "N": 50, "mu": 1.0, "eta": 10,
        "sweep_var": "rd", "sweep": [4.0 + k for k in range(2, 16)],
        "series": [
            (f"lambda_per_um3={v:g}/{name}", {"lambda": v, "L": L, "method": method})
            for v in (1e-5, 1e-4)
            for name, L, method in (("isi", 5, "isi"), ("no_isi", 1, "no_isi"))
        ],
    },
}


def _preset_summary(name):
    return PRESETS[name]["description"]


def _preset_config(name):
    spec = dict(PRESETS[name])
    spec.pop("series")
    spec.pop("description")
    out = dict(_FIG_BASE)
    out.update(spec)
    return out


# --------------------------------------------------------------------------
# config handling


def _number(cfg, key, kind=float):
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"key {key!r} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    check_keys(cfg)
    return cfg


def check_keys(cfg: dict) -> None:
    unknown = sorted(set(cfg) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")


def system_params(cfg: dict) -> SystemParams:
    values = {}
    for key, attr in PARAM_KEYS.items():
        if key in cfg:
            values[attr] = _number(cfg, key, int if key == "N" else float)
    try:
        return SystemParams(**values)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def distance(cfg: dict) -> DistanceDistribution:
    has_fixed = "rd" in cfg
    has_uniform = "rd_b" in cfg or "rd_c" in cfg
    if has_fixed and has_uniform:
        raise ConfigError("give either rd or rd_b/rd_c, not both")
    if has_uniform:
        if not ("rd_b" in cfg and "rd_c" in cfg):
            raise ConfigError("a uniform distance needs both rd_b and rd_c")
        try:
            return DistanceDistribution.uniform(_number(cfg, "rd_b"), _number(cfg, "rd_c"))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    return DistanceDistribution.fixed(_number(cfg, "rd") if has_fixed else 10.0)


def sweep_grid(cfg: dict, default_var: str, default_value):
    var = cfg.get("sweep_var", default_var)
    if var not in SWEEP_COLUMNS:
        raise ConfigError(f"sweep_var must be one of {', '.join(SWEEP_COLUMNS)}, got {var!r}")
    grid = cfg.get("sweep", [default_value] if "sweep_var" not in cfg else None)
    if not isinstance(grid, list) or not grid:
        raise ConfigError("sweep must be a non-empty list")
    for v in grid:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"sweep values must be finite numbers, got {v!r}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep grid must be strictly ascending")
    if var == "eta" and any(int(v) != v or v < 0 for v in grid):
        raise ConfigError("eta sweep values must be non-negative integers")
    return var, [int(v) if var == "eta" else float(v) for v in grid]


def point_config(cfg: dict, var: str, value) -> dict:
    out = dict(cfg)
    out[var] = value
    if var == "rd":
        out.pop("rd_b", None)
        out.pop("rd_c", None)
    return out


def _opt(cfg, key, default, kind=float):
    return _number(cfg, key, kind) if key in cfg else default


def _eta(cfg):
    if cfg.get("eta") == "opt":
        return "opt"
    value = _opt(cfg, "eta", 1, int)
    if value < 0:
        raise ConfigError("eta must be >= 0")
    return value


# --------------------------------------------------------------------------
# computations


@dataclass
class Table:
    columns: list
    rows: list
    error: str | None = None


class _PointFailure:
    def __init__(self, message):
        self.message = message


def _run_points(func, points, n_jobs):
    """Evaluate ``func`` at every point, keeping grid order. A numeric
    failure becomes a :class:`_PointFailure` in place of the row."""

    def guarded(point):
        try:
            return func(point)
        except NumericError as exc:
            return _PointFailure(str(exc))

    if n_jobs == 1 or len(points) == 1:
        out = []
        for pt in points:
            out.append(guarded(pt))
            if isinstance(out[-1], _PointFailure):
                break
        return out
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(guarded)(pt) for pt in points)


def _assemble(columns, grid, results):
    rows = []
    for x, res in zip(grid, results):
        if isinstance(res, _PointFailure):
            return Table(columns, rows, error=(x, res.message))
        rows.append([x] + list(res))
    return Table(columns, rows)


def run_expectations(cfg: dict) -> Table:
    var, grid = sweep_grid(cfg, "ts", cfg.get("ts", 0.5))
    if var == "eta":
        raise ConfigError("expectations cannot be swept over eta")
    K = _opt(cfg, "K", None, int)
    points = []
    for v in grid:
        pc = point_config(cfg, var, v)
        dist = distance(pc)
        if dist.kind != "fixed":
            raise ConfigError("expectations need a fixed rd")
        points.append((system_params(pc), dist.lo))

    def one(point):
        p, rd = point
        br = expectations.expected_total(rd, p) if K is None else expectations.expected_total_transient(rd, K, p)
        return [br.e_s, br.e_i, br.e_c, br.e_t]

    results = _run_points(one, points, cfg.get("n_jobs", 1))
    return _assemble([SWEEP_COLUMNS[var]] + EXP_COLUMNS, grid, results)


def _method(cfg: dict, L: int) -> str:
    method = cfg.get("method", "isi" if L > 1 else "no_isi")
    if method not in ("isi", "no_isi"):
        raise ConfigError(f"method must be 'isi' or 'no_isi', got {method!r}")
    return method


def _analytic_point(p, dist, eta, L, method, policy, cfg):
    """``(peb0, peb1, pe)`` at one operating point."""
    if policy == "adaptive":
        if dist.kind != "uniform":
            raise ConfigError("the adaptive policy needs a uniform distance (rd_b, rd_c)")
        table = ber.build_threshold_table(dist.lo, dist.hi, _opt(cfg, "step", 0.1), p)
        r = ber.adaptive_policy_ber(table, dist, p)
        return [r.peb0, r.peb1, r.pe]
    if dist.kind == "fixed":
        if eta == "opt":
            eta, _ = ber.optimal_threshold(dist.lo, p, method=f"analytic_{method}", L=L)
        r = ber.ber_isi_fixed(dist.lo, eta, L, p) if method == "isi" else ber.ber_no_isi_fixed(dist.lo, eta, p)
    else:
        if method == "isi":
            raise ConfigError("random distance with ISI has no analytic form; use ber_mc")
        if eta == "opt":
            eta, _ = ber.best_single_threshold(dist, p)
        r = ber.ber_no_isi_random(dist, eta, p)
    return [r.peb0, r.peb1, r.pe]


def run_ber_analytic(cfg: dict) -> Table:
    var, grid = sweep_grid(cfg, "eta", 1 if _eta(cfg) == "opt" else _eta(cfg))
    L = _opt(cfg, "L", 1, int)
    if L < 1:
        raise ConfigError("L must be >= 1")
    method = _method(cfg, L)
    policy = cfg.get("policy", "single")
    if policy not in ("single", "adaptive"):
        raise ConfigError(f"policy must be 'single' or 'adaptive', got {policy!r}")
    columns = [SWEEP_COLUMNS[var]] + BER_COLUMNS

    if var == "eta" and policy == "single":
        # one curve serves the whole threshold grid
        p, dist = system_params(cfg), distance(cfg)
        _validate_dist(dist, p)

        def curve(_):
            top = max(grid)
            if dist.kind == "fixed":
                if method == "isi":
                    return ber.ber_isi_curve(dist.lo, top, L, p)
                return ber.ber_no_isi_curve(dist.lo, top, p)
            if method == "isi":
                raise ConfigError("random distance with ISI has no analytic form; use ber_mc")
            return ber.ber_no_isi_random_curve(dist, top, p)

        res = _run_points(curve, [None], 1)[0]
        if isinstance(res, _PointFailure):
            return Table(columns, [], error=(grid[0], res.message))
        peb0, peb1 = res
        rows = [[e, peb0[e], peb1[e], ber.total_ber(peb0[e], peb1[e], p)] for e in grid]
        return Table(columns, rows)

    points = []
    for v in grid:
        pc = point_config(cfg, var, v)
        p, dist = system_params(pc), distance(pc)
        _validate_dist(dist, p)
        points.append((p, dist, _eta(pc)))
    results = _run_points(
        lambda pt: _analytic_point(pt[0], pt[1], pt[2], L, method, policy, cfg),
        points,
        cfg.get("n_jobs", 1),
    )
    return _assemble(columns, grid, results)


def _validate_dist(dist, p):
    try:
        dist.validate(p.a)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _sim_config(cfg, p, dist, eta, L):
    try:
        return SimConfig(
            params=p,
            rd_dist=dist,
            eta=eta,
            L=L,
            r_max=_opt(cfg, "r_max", 150.0),
            realizations=_opt(cfg, "realizations", 10_000, int),
            seed=_opt(cfg, "seed", 0, int),
            pin_bits=cfg.get("pin_bits"),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def run_ber_mc(cfg: dict) -> Table:
    var, grid = sweep_grid(cfg, "eta", 1 if _eta(cfg) == "opt" else _eta(cfg))
    L = _opt(cfg, "L", 1, int)
    if L < 1:
        raise ConfigError("L must be >= 1")
    sampling = cfg.get("sampling", "forced")
    if sampling not in ("forced", "natural"):
        raise ConfigError(f"sampling must be 'forced' or 'natural', got {sampling!r}")
    policy = cfg.get("policy", "single")
    if policy not in ("single", "adaptive"):
        raise ConfigError(f"policy must be 'single' or 'adaptive', got {policy!r}")
    method = _method(cfg, L)
    n_jobs = cfg.get("n_jobs", 1)
    columns = [SWEEP_COLUMNS[var]] + BER_COLUMNS + ["se_pe"]

    def row(res):
        result, est = res
        return [result.peb0, result.peb1, result.pe, est["pe"].se]

    if var == "eta" and policy == "single":
        p, dist = system_params(cfg), distance(cfg)
        sim = _sim_config(cfg, p, dist, grid[0], L)
        curve = estimate_ber_curve(sim, grid, mode=sampling, n_jobs=n_jobs)
        return Table(columns, [[e] + row(r) for e, r in zip(grid, curve)])

    rows = []
    for v in grid:
        pc = point_config(cfg, var, v)
        p, dist = system_params(pc), distance(pc)
        _validate_dist(dist, p)
        eta = _eta(pc)
        if policy == "adaptive":
            if dist.kind != "uniform":
                raise ConfigError("the adaptive policy needs a uniform distance (rd_b, rd_c)")
            eta = ber.build_threshold_table(dist.lo, dist.hi, _opt(cfg, "step", 0.1), p)
        elif eta == "opt":
            if dist.kind == "fixed":
                eta, _ = ber.optimal_threshold(dist.lo, p, method=f"analytic_{method}", L=L)
            else:
                eta, _ = ber.best_single_threshold(dist, p)
        sim = _sim_config(pc, p, dist, eta, L)
        rows.append([v] + row(estimate_ber(sim, mode=sampling, n_jobs=n_jobs)))
    return Table(columns, rows)


def run_threshold_table(cfg: dict) -> Table:
    p = system_params(cfg)
    for key in ("rd_b", "rd_c"):
        if key not in cfg:
            raise ConfigError(f"threshold_table needs {key}")
    b, c = _number(cfg, "rd_b"), _number(cfg, "rd_c")
    step = _opt(cfg, "step", 0.1)
    eta_max = _opt(cfg, "eta_max", None, int)
    if not (p.a < b < c) or step <= 0:
        raise ConfigError("threshold_table needs a < rd_b < rd_c and step > 0")
    try:
        table = ber.build_threshold_table(b, c, step, p, eta_max=eta_max)
    except NumericError as exc:
        return Table(["rd_um", "eta_opt", "pe_min"], [], error=(b, str(exc)))
    rows = [[r, int(e), pe] for r, e, pe in zip(table.rd_grid, table.eta_opt, table.pe_min)]
    return Table(["rd_um", "eta_opt", "pe_min"], rows)


def run_figure(cfg: dict) -> Table:
    fig = cfg.get("figure")
    if fig not in PRESETS:
        raise ConfigError(f"figure must be one of {', '.join(PRESETS)}, got {fig!r}")
    source = cfg.get("source", "analytic")
    if source not in ("analytic", "mc"):
        raise ConfigError(f"source must be 'analytic' or 'mc', got {source!r}")
    base = _preset_config(fig)
    user = {k: v for k, v in cfg.items() if k not in ("mode", "figure", "source")}
    base.update(user)
    kind = base.pop("mode")
    if kind == "ber":
        kind = "ber_mc" if source == "mc" else "ber_analytic"
    elif source == "mc":
        raise ConfigError(f"{fig} has no Monte-Carlo variant")
    series = PRESETS[fig]["series"]
    if len(series) == 1:
        return RUNNERS[kind]({**base, **series[0][1]})
    columns, rows = None, []
    for label, overrides in series:
        sub = dict(base)
        for key, value in overrides.items():
            if key not in user:
                sub[key] = value
        table = RUNNERS[kind](sub)
        columns = ["series"] + table.columns
        rows.extend([label] + r for r in table.rows)
        if table.error is not None:
            x, msg = table.error
            return Table(columns, rows, error=(f"{label}", f"at {x}: {msg}"))
    return Table(columns, rows)


RUNNERS = {
    "expectations": run_expectations,
    "ber_analytic": run_ber_analytic,
    "ber_mc": run_ber_mc,
    "threshold_table": run_threshold_table,
    "figure": run_figure,
}


def run_config(cfg: dict) -> Table:
    check_keys(cfg)
    mode = cfg.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    n_jobs = cfg.get("n_jobs", 1)
    if isinstance(n_jobs, bool) or not isinstance(n_jobs, int) or n_jobs == 0:
        raise ConfigError("n_jobs must be a non-zero integer")
    try:
        return RUNNERS[mode](cfg)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# output


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _json_value(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def write_table(table: Table, path: str | None, fmt: str) -> None:
    columns = list(table.columns)
    rows = [list(r) for r in table.rows]
    if table.error is not None:
        columns.append("error")
        rows = [r + [""] for r in rows]
        x, msg = table.error
        rows.append([x] + [""] * (len(table.columns) - 1) + [msg])
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        if fmt == "json":
            data = [dict(zip(columns, (_json_value(v) for v in r))) for r in rows]
            json.dump(data, fh, indent=1)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for r in rows:
                writer.writerow([_fmt(v) for v in r])
    finally:
        if path:
            fh.close()


def _output_format(cfg, path):
    fmt = cfg.get("format")
    if fmt is None:
        fmt = "json" if path and path.endswith(".json") else "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    return fmt


# --------------------------------------------------------------------------
# compare


def _read_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            return reader.fieldnames or [], list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def _float(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan


def compare_tables(path_a: str, path_b: str, threshold: float = 3.0, column: str = "pe"):
    """Per-point z-scores of ``column`` between two result files.

    The standard error is combined from whichever files carry
    ``se_<column>``. Returns a list of dicts (key, a, b, se, z, status).
    """
    cols_a, rows_a = _read_csv(path_a)
    cols_b, rows_b = _read_csv(path_b)
    if not cols_a or not cols_b:
        raise ConfigError("both files need a header row")
    key_cols = ["series", cols_a[1]] if cols_a[0] == "series" and len(cols_a) > 1 else [cols_a[0]]
    for c in key_cols + [column]:
        if c not in cols_a or c not in cols_b:
            raise ConfigError(f"column {c!r} missing from one of the files")
    se_col = f"se_{column}"
    if se_col not in cols_a and se_col not in cols_b:
        raise ConfigError(f"neither file has a {se_col} column")
    n = max(len(rows_a), len(rows_b))
    for i in range(n):
        if i >= len(rows_a) or i >= len(rows_b):
            present = rows_a[i] if i < len(rows_a) else rows_b[i]
            point = ", ".join(f"{c}={present[c]}" for c in key_cols)
            raise ConfigError(f"grid mismatch: point {point} (row {i + 1}) is missing from one file")
        ka = [rows_a[i][c] for c in key_cols]
        kb = [rows_b[i][c] for c in key_cols]
        same = all(
            x == y or (_float(x) == _float(y) and not math.isnan(_float(x))) for x, y in zip(ka, kb)
        )
        if not same:
            point = ", ".join(f"{c}={x} vs {y}" for c, x, y in zip(key_cols, ka, kb))
            raise ConfigError(f"grid mismatch at row {i + 1}: {point}")
    report = []
    for ra, rb in zip(rows_a, rows_b):
        a, b = _float(ra[column]), _float(rb[column])
        se = math.sqrt(sum(_float(r.get(se_col, 0.0) or 0.0) ** 2 for r in (ra, rb)))
        key = ", ".join(f"{c}={ra[c]}" for c in key_cols)
        if not se > 0 or math.isnan(a) or math.isnan(b):
            z, status = math.nan, "undefined"
        else:
            z = (a - b) / se
            status = "pass" if abs(z) <= threshold else "fail"
        report.append({"key": key, "a": a, "b": b, "se": se, "z": z, "status": status})
    return report


# --------------------------------------------------------------------------
# entry point


def _parser():
    parser = argparse.ArgumentParser(prog="mcvd", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", help="output path (default: config 'output', else stdout)")
    run.add_argument("--realizations", type=int, help="override the Monte-Carlo realization count")

    cmp_ = sub.add_parser("compare", help="z-score comparison of two result CSVs")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    cmp_.add_argument("--threshold", type=float, default=3.0)
    cmp_.add_argument("--min-pass-rate", type=float, default=0.95)
    cmp_.add_argument("--column", default="pe")
    cmp_.add_argument("--out", help="also write the per-point report as CSV")

    pre = sub.add_parser("presets", help="list or show figure presets")
    pre_sub = pre.add_subparsers(dest="action", required=True)
    pre_sub.add_parser("list")
    show = pre_sub.add_parser("show")
    show.add_argument("figure")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg["seed"] = args.seed
    if args.realizations is not None:
        cfg["realizations"] = args.realizations
    path = args.out or cfg.get("output")
    fmt = _output_format(cfg, path)
    table = run_config(cfg)
    write_table(table, path, fmt)
    if table.error is not None:
        x, msg = table.error
        print(f"numeric error at {x}: {msg}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_compare(args) -> int:
    report = compare_tables(args.a, args.b, args.threshold, args.column)
    for r in report:
        print(f"{r['key']}: a={r['a']:.6g} b={r['b']:.6g} se={r['se']:.3g} z={r['z']:.3g} {r['status'].upper()}")
    defined = [r for r in report if r["status"] != "undefined"]
    passed = sum(r["status"] == "pass" for r in defined)
    undefined = len(report) - len(defined)
    failed = [r["key"] for r in defined if r["status"] == "fail"]
    rate = passed / len(defined) if defined else math.nan
    print(f"pass rate: {passed}/{len(defined)}" + (f" ({undefined} undefined, zero standard error)" if undefined else ""))
    if failed:
        print("failing points: " + "; ".join(failed))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["point", "a", "b", "se", "z", "status"])
            for r in report:
                writer.writerow([r["key"], _fmt(r["a"]), _fmt(r["b"]), _fmt(r["se"]), _fmt(r["z"]), r["status"]])
    if defined and rate < args.min_pass_rate:
        return EXIT_COMPARE_FAIL
    return EXIT_OK


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in PRESETS:
            print(f"{name}\t{_preset_summary(name)}")
        return EXIT_OK
    if args.figure not in PRESETS:
        raise ConfigError(f"unknown preset {args.figure!r}")
    shown = {k: v for k, v in _preset_config(args.figure).items() if k != "mode"}
    shown = {"mode": "figure", "figure": args.figure, "description": _preset_summary(args.figure), **shown}
    print(json.dumps(shown, indent=1))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {"run": _cmd_run, "compare": _cmd_compare, "presets": _cmd_presets}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
