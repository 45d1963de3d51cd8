"""Command-line interface: scenario evaluation, sweeps, bounds, splits,
Monte Carlo validation, and raw trial dumps.

Output is comma-delimited text with '#'-prefixed metadata lines (tool
version, settings hash, seed), deterministic byte-for-byte for identical
inputs.  With --plot a PNG is rendered next to the output file.

Exit codes: 0 ok, 2 scenario/plan parse error, 3 validation error,
4 more than 10% of sweep points failed, 5 tolerance breach in validate.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import math
import os
import sys
from dataclasses import dataclass

import numpy as np
import tomli

from . import __version__
from .channel import ChannelClass
from .design import density_upper_bound, optimize_density, two_layer_split
from .errors import AeronetError, NoCandidate, ValidationError
from .geometry import AssociationAnalysis
from .montecarlo import SimSpec, run_trials
from .netconfig import (
    SCHEMA_VERSION,
    Orientation,
    Scenario,
    load_scenario,
)
from .numerics import DEFAULT_QUADRATURE
from .performance import network_aggregate

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_SWEEP_FAILURES = 4
EXIT_TOLERANCE = 5

_SWEEP_VARIABLES = ("altitude", "density_single", "density_grid_2d", "split_ratio", "beta")
_OBJECTIVES = ("stp", "ase", "both")

# Unit suffixes for the table headers.
_UNITS = {
    "altitude": "m",
    "density_single": "per_m2",
    "density_grid_2d": "per_m2",
    "split_ratio": "frac",
    "beta": "ratio",
}


@dataclass(frozen=True)
class SweepPlan:
    variable: str
    objective: str
    lo: float
    hi: float
    points: int
    spacing: str = "lin"
    layer: int | None = None
    layers: tuple[int, int] | None = None
    total_density: float | None = None
    mc_trials: int | None = None
    mc_seed: int = 0
    mc_window: float | None = None

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


def parse_plan_text(text: str) -> SweepPlan:
    doc = tomli.loads(text)
    problems = []
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        problems.append(f"unsupported schema_version {version!r}")
    sweep = doc.get("sweep", {})
    mc = doc.get("montecarlo", {})
    for key in doc:
        if key not in ("schema_version", "sweep", "montecarlo"):
            problems.append(f"unknown top-level key {key!r}")
    allowed = {"variable", "objective", "min", "max", "points", "spacing", "layer", "layers", "total_density"}
    for key in sweep:
        if key not in allowed:
            problems.append(f"[sweep]: unknown key {key!r}")
    for key in mc:
        if key not in ("trials", "seed", "window_radius"):
            problems.append(f"[montecarlo]: unknown key {key!r}")

    variable = sweep.get("variable", "altitude")
    objective = sweep.get("objective", "both")
    points = int(sweep.get("points", 2))
    spacing = sweep.get("spacing", "lin")
    if variable not in _SWEEP_VARIABLES:
        problems.append(f"[sweep]: unknown variable {variable!r}")
    if objective not in _OBJECTIVES:
        problems.append(f"[sweep]: unknown objective {objective!r}")
    if points < 2:
        problems.append("[sweep]: points must be >= 2")
    if spacing not in ("lin", "log"):
        problems.append(f"[sweep]: unknown spacing {spacing!r}")
    if "min" not in sweep or "max" not in sweep:
        problems.append("[sweep]: min and max are required")
    mc_trials = mc.get("trials")
    if mc and mc_trials is None:
        problems.append("[montecarlo]: trials is required when the section is present")
    if mc_trials is not None and int(mc_trials) < 1:
        problems.append("[montecarlo]: trials must be >= 1")
    layers = sweep.get("layers")
    if variable in ("density_grid_2d", "split_ratio") and (
        layers is None or len(layers) != 2
    ):
        problems.append(f"[sweep]: variable {variable!r} needs layers = [j, k]")
    if variable == "split_ratio" and "total_density" not in sweep:
        problems.append("[sweep]: split_ratio needs total_density")
    if problems:
        raise ValidationError(problems)
    return SweepPlan(
        variable=variable,
        objective=objective,
        lo=float(sweep["min"]),
        hi=float(sweep["max"]),
        points=points,
        spacing=spacing,
        layer=int(sweep["layer"]) if "layer" in sweep else None,
        layers=tuple(int(x) for x in layers) if layers else None,
        total_density=float(sweep["total_density"]) if "total_density" in sweep else None,
        mc_trials=int(mc_trials) if mc_trials is not None else None,
        mc_seed=int(mc.get("seed", 0)),
        mc_window=float(mc["window_radius"]) if mc.get("window_radius") else None,
    )


def _settings_hash(*parts) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(str(part).encode())
        digest.update(b"\x00")
    return digest.hexdigest()[:12]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf"
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


class Report:
    """Metadata lines plus one delimited table."""

    def __init__(self, command, settings_hash, seed=None, extra=()):
        self.meta = [
            f"# aeronet {__version__}",
            f"# schema_version {SCHEMA_VERSION}",
            f"# command {command}",
            f"# settings_hash {settings_hash}",
        ]
        if seed is not None:
            self.meta.append(f"# seed {seed}")
        self.meta.extend(extra)
        self.header: list[str] = []
        self.rows: list[list] = []

    def text(self) -> str:
        lines = list(self.meta)
        lines.append(",".join(self.header))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, out_path):
        body = self.text()
        if out_path:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(body)
        else:
            sys.stdout.write(body)


def _apply_variable(scenario: Scenario, plan: SweepPlan, value):
    cfg = scenario.config
    if plan.variable == "altitude":
        from dataclasses import replace

        layer = plan.layer if plan.layer is not None else _default_tx_layer(scenario)
        layers = list(cfg.layers)
        layers[layer] = replace(layers[layer], altitude=float(value))
        return cfg.with_layers(layers)
    if plan.variable == "density_single":
        layer = plan.layer if plan.layer is not None else _default_tx_layer(scenario)
        return cfg.with_layer_density_tx(layer, float(value))
    if plan.variable == "density_grid_2d":
        j, k = plan.layers
        d1, d2 = value
        return cfg.with_layer_density_tx(j, float(d1)).with_layer_density_tx(k, float(d2))
    if plan.variable == "split_ratio":
        j, k = plan.layers
        rho = float(value)
        cfg = cfg.with_layer_density_tx(j, rho * plan.total_density)
        return cfg.with_layer_density_tx(k, (1.0 - rho) * plan.total_density)
    if plan.variable == "beta":
        from dataclasses import replace

        from .netconfig import validate

        return validate(replace(cfg.raw, target_sinr=float(value)))
    raise AssertionError(plan.variable)


def _default_tx_layer(scenario: Scenario) -> int:
    for k, layer in enumerate(scenario.config.layers):
        if layer.density_tx > 0:
            return k
    return 0


def _sweep_point(args):
    """Evaluate one grid point; runs in a worker process for parallel sweeps."""
    scenario, plan, value, seed = args
    try:
        cfg = _apply_variable(scenario, plan, value)
        report = network_aggregate(cfg, scenario.rule, DEFAULT_QUADRATURE)
        out = {
            "stp": report.per_layer_stp.get(scenario.typical_layer),
            "ase": report.network_ase,
            "status": "ok",
        }
        if plan.mc_trials:
            res = run_trials(
                cfg,
                scenario.rule,
                SimSpec(
                    window_radius=plan.mc_window,
                    trials=plan.mc_trials,
                    seed=seed,
                    typical_node_layer=scenario.typical_layer,
                ),
            )
            out["mc_stp"] = res.stp()
            out["mc_stp_stderr"] = res.stp_stderr()
            out["mc_discard_frac"] = res.discard_fraction
        return out
    except AeronetError as exc:
        return {"status": f"error:{type(exc).__name__}", "stp": None, "ase": None}


def _worker_count() -> int:
    raw = os.environ.get("AERONET_WORKERS", "1")
    try:
        return max(int(raw), 1)
    except ValueError:
        return 1


def cmd_evaluate(args) -> int:
    scenario, text = _load(args.scenario)
    report = network_aggregate(scenario.config, scenario.rule)
    out = Report("evaluate", _settings_hash(text))
    out.header = ["scope", "stp_prob", "ase_bps_per_hz_m2"]
    for k in sorted(report.per_layer_stp):
        out.rows.append([f"layer{k}", report.per_layer_stp[k], report.per_layer_ase[k]])
    out.rows.append(["network", report.network_stp, report.network_ase])
    out.write(args.out)
    if args.plot and args.out:
        from .plotting import plot_evaluate

        plot_evaluate(report, _plot_path(args.out))
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario, text = _load(args.scenario)
    with open(args.plan, "r", encoding="utf-8") as fh:
        plan_text = fh.read()
    plan = parse_plan_text(plan_text)
    seed = args.seed if args.seed is not None else plan.mc_seed
    if args.trials is not None:
        from dataclasses import replace as _replace

        plan = _replace(plan, mc_trials=args.trials)

    grid = plan.grid()
    if plan.variable == "density_grid_2d":
        points = [(a, b) for a in grid for b in grid]
    else:
        points = list(grid)
    jobs = [(scenario, plan, value, seed + idx) for idx, value in enumerate(points)]
    workers = _worker_count()
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(job) for job in jobs]

    unit = _UNITS[plan.variable]
    out = Report("sweep", _settings_hash(text, plan_text, seed), seed=seed)
    if plan.variable == "density_grid_2d":
        var_cols = [f"density_layer{plan.layers[0]}_{unit}", f"density_layer{plan.layers[1]}_{unit}"]
    else:
        var_cols = [f"{plan.variable}_{unit}"]
    obj_cols = []
    if plan.objective in ("stp", "both"):
        obj_cols.append("stp_prob")
    if plan.objective in ("ase", "both"):
        obj_cols.append("ase_bps_per_hz_m2")
    mc_cols = (
        ["mc_stp_prob", "mc_stp_stderr_prob", "mc_discard_frac"] if plan.mc_trials else []
    )
    out.header = var_cols + obj_cols + mc_cols + ["argmax_flag", "status"]

    key = "stp" if plan.objective in ("stp", "both") else "ase"
    best_idx, best_val = None, -math.inf
    for idx, res in enumerate(results):
        v = res.get(key)
        if res["status"] == "ok" and v is not None and v > best_val:
            best_idx, best_val = idx, v
    failures = 0
    for idx, (value, res) in enumerate(zip(points, results)):
        row = list(value) if plan.variable == "density_grid_2d" else [value]
        if plan.objective in ("stp", "both"):
            row.append(res.get("stp"))
        if plan.objective in ("ase", "both"):
            row.append(res.get("ase"))
        if plan.mc_trials:
            row.extend([res.get("mc_stp"), res.get("mc_stp_stderr"), res.get("mc_discard_frac")])
        row.append(1 if idx == best_idx else 0)
        row.append(res["status"])
        out.rows.append(row)
        if res["status"] != "ok":
            failures += 1
    out.write(args.out)
    if args.plot and args.out and plan.variable != "density_grid_2d":
        from .plotting import plot_sweep

        columns = {}
        if plan.objective in ("stp", "both"):
            columns["stp"] = [r.get("stp") for r in results]
        if plan.objective in ("ase", "both"):
            columns["ase"] = [r.get("ase") for r in results]
        if plan.mc_trials:
            columns["mc_stp"] = [r.get("mc_stp") for r in results]
            columns["mc_stp_stderr"] = [r.get("mc_stp_stderr") for r in results]
        plot_sweep(
            plan.variable,
            points,
            columns,
            _plot_path(args.out),
            logx=plan.spacing == "log",
        )
    if failures > 0.1 * len(points):
        return EXIT_SWEEP_FAILURES
    return EXIT_OK


def cmd_bound(args) -> int:
    scenario, text = _load(args.scenario)
    bound = density_upper_bound(
        scenario.config, scenario.rule, args.rx_layer, args.tx_layer, args.objective
    )
    out = Report("bound", _settings_hash(text, args.rx_layer, args.tx_layer, args.objective))
    out.header = ["rx_layer", "tx_layer", "objective", "bound_per_m2", "epsilon_m2", "reason"]
    out.rows.append(
        [bound.rx_layer, bound.tx_layer, bound.objective, bound.bound, bound.epsilon, bound.reason]
    )
    out.write(args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    scenario, text = _load(args.scenario)
    k = args.rx_layer if args.rx_layer is not None else scenario.typical_layer
    result = optimize_density(scenario.config, scenario.rule, k, args.tx_layer, args.objective)
    out = Report("optimize", _settings_hash(text, k, args.tx_layer, args.objective))
    out.meta.append(f"# best_density_per_m2 {_fmt(result.density)}")
    out.meta.append(f"# best_value {_fmt(result.value)}")
    out.meta.append(f"# search_ceiling_per_m2 {_fmt(result.search_ceiling)}")
    unit = "prob" if args.objective == "stp" else "bps_per_hz_m2"
    out.header = ["density_per_m2", f"{args.objective}_{unit}", "argmax_flag"]
    best = int(np.argmax(result.values))
    for idx, (d, v) in enumerate(zip(result.grid, result.values)):
        out.rows.append([float(d), float(v), 1 if idx == best else 0])
    out.write(args.out)
    return EXIT_OK


def cmd_split(args) -> int:
    scenario, text = _load(args.scenario)
    j, k = (int(x) for x in args.tx_layers.split(","))
    splits = np.linspace(0.0, 1.0, args.points)
    result = two_layer_split(
        scenario.config, scenario.rule, (j, k), args.total_density, splits, args.objective
    )
    out = Report(
        "split",
        _settings_hash(text, j, k, args.total_density, args.points, args.objective),
    )
    out.meta.append(f"# argmax_split_frac {_fmt(result.argmax_split)}")
    unit = "prob" if args.objective == "stp" else "bps_per_hz_m2"
    out.header = [
        "split_frac",
        f"density_layer{j}_per_m2",
        f"density_layer{k}_per_m2",
        f"{args.objective}_{unit}",
        f"{args.objective}_normalized",
        "argmax_flag",
    ]
    best = int(np.argmax(result.values))
    for idx, rho in enumerate(result.splits):
        out.rows.append(
            [
                float(rho),
                float(rho * args.total_density),
                float((1.0 - rho) * args.total_density),
                float(result.values[idx]),
                float(result.normalized[idx]),
                1 if idx == best else 0,
            ]
        )
    out.write(args.out)
    if args.plot and args.out:
        from .plotting import plot_split

        plot_split(result, _plot_path(args.out), args.objective)
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario, text = _load(args.scenario)
    trials = args.trials if args.trials is not None else 10000
    seed = args.seed if args.seed is not None else 0
    tol = args.tol if args.tol is not None else 0.03
    cfg, rule, typical = scenario.config, scenario.rule, scenario.typical_layer

    try:
        analysis = AssociationAnalysis(cfg, rule, typical)
        res = run_trials(
            cfg, rule, SimSpec(trials=trials, seed=seed, typical_node_layer=typical)
        )
    except NoCandidate as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    from .performance import layer_stp

    rows = []  # (label, analytic, empirical, stderr)
    stp = layer_stp(cfg, rule, typical)
    rows.append((f"layer{typical}_stp", stp, res.stp(), res.stp_stderr()))
    for j, c in analysis.candidates():
        a = analysis.association_probability(j, c)
        freq = res.association_frequency(j, c)
        se = math.sqrt(max(freq * (1 - freq), 1e-12) / trials)
        rows.append((f"assoc_layer{j}_{c.value}", a, freq, se))

    out = Report(
        "validate",
        _settings_hash(text, trials, seed, tol),
        seed=seed,
        extra=[f"# trials {trials}", f"# tol {_fmt(tol)}", f"# discard_frac {_fmt(res.discard_fraction)}"],
    )
    out.header = ["quantity", "analytic", "montecarlo", "stderr", "abs_diff", "pass_flag"]
    breach = False
    for label, a, b, se in rows:
        diff = abs(a - b)
        ok = diff <= tol
        if se > tol:
            ok = False
            label += ":standard error exceeds tolerance"
        breach = breach or not ok
        out.rows.append([label, a, b, se, diff, ok])
    out.write(args.out)
    if args.plot and args.out:
        from .plotting import plot_validation

        plot_validation(rows, _plot_path(args.out))
    return EXIT_TOLERANCE if breach else EXIT_OK


def cmd_montecarlo_dump(args) -> int:
    scenario, text = _load(args.scenario)
    trials = args.trials if args.trials is not None else 10000
    seed = args.seed if args.seed is not None else 0
    res = run_trials(
        scenario.config,
        scenario.rule,
        SimSpec(trials=trials, seed=seed, typical_node_layer=scenario.typical_layer),
    )
    out = Report(
        "montecarlo-dump",
        _settings_hash(text, trials, seed),
        seed=seed,
        extra=[
            f"# trials {trials}",
            f"# window_radius_m {_fmt(res.window_radius)}",
            f"# discard_frac {_fmt(res.discard_fraction)}",
        ],
    )
    out.header = ["trial", "layer", "class", "distance_m", "sinr_ratio", "success_flag"]
    for row in res.rows():
        out.rows.append(list(row))
    out.write(args.out)
    return EXIT_OK


def _plot_path(out_path: str) -> str:
    root, _ = os.path.splitext(out_path)
    return root + ".png"


def _load(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    from .netconfig import parse_scenario_text

    return parse_scenario_text(text), text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeronet",
        description="Analytic STP/ASE of layered aerial networks with Monte Carlo validation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot=False):
        p.add_argument("--scenario", required=True, help="scenario file path")
        p.add_argument("--out", help="output file path (default: stdout)")
        if plot:
            p.add_argument("--plot", action="store_true", help="also render a PNG beside --out")

    p = sub.add_parser("evaluate", help="per-layer and network STP/ASE")
    common(p, plot=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate a grid described by a plan file")
    common(p, plot=True)
    p.add_argument("--plan", required=True, help="sweep plan file path")
    p.add_argument("--seed", type=int, help="Monte Carlo seed override")
    p.add_argument("--trials", type=int, help="Monte Carlo trials override")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bound", help="upper bound on the optimal tx density")
    common(p)
    p.add_argument("--rx-layer", type=int, required=True)
    p.add_argument("--tx-layer", type=int, required=True)
    p.add_argument("--objective", choices=("stp", "ase"), default="stp")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("optimize", help="grid search for the best tx density")
    common(p)
    p.add_argument("--rx-layer", type=int, help="objective layer (default: typical layer)")
    p.add_argument("--tx-layer", type=int, required=True)
    p.add_argument("--objective", choices=("stp", "ase"), default="stp")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("split", help="two-layer density split sweep")
    common(p, plot=True)
    p.add_argument("--tx-layers", required=True, help="comma-separated pair, e.g. 1,2")
    p.add_argument("--total-density", type=float, required=True)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--objective", choices=("stp", "ase"), default="ase")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("validate", help="analytic vs Monte Carlo comparison")
    common(p, plot=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("montecarlo-dump", help="raw per-trial outcomes")
    common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_montecarlo_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except tomli.TOMLDecodeError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        for problem in exc.problems:
            print(f"validation error: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NoCandidate as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
