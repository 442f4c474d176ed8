"""Command-line experiment runner.

Subcommands: ``simulate``, ``compare``, ``optimize``, ``conditions`` and
``phases``. Simulation horizons default to a desk-scale 20,000 time units;
``--full`` restores each scenario's own horizon.
"""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import phases, pso
from .controllers import CONTROLLERS, ControllerParams, RangeError, make_controller
from .fuzzy import ZeroArea, save_membership
from .sim import (CONDITION_NAMES, ConfigError, METRICS_HEADER, Scenario, Simulation,
                  builtin_condition, metrics_row, resolve_scenario, write_log_csv,
                  write_metrics_csv, write_trace_csv)

DESK_HORIZON = 20_000
CONTROLLER_ORDER = ("va", "turn", "jump", "mix", "mix-opt")


def bundled_mix_opt() -> Path:
    """Membership document shipped with the package for MIX-OPT."""
    return Path(str(resources.files("roundabout_ftc").joinpath("data/mix_opt.json")))


def _scenario(name: str, horizon: int | None, full: bool) -> Scenario:
    scn = resolve_scenario(name)
    if horizon is not None:
        return scn.with_horizon(horizon)
    if full:
        return scn
    return scn.with_horizon(min(DESK_HORIZON, scn.horizon))


def _controller(name: str, mf_file: str | None):
    if name == "mix-opt" and mf_file is None:
        mf_file = bundled_mix_opt()
    return make_controller(name, ControllerParams(), mf_file if name == "mix-opt" else None)


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    scn = _scenario(args.condition, args.horizon, args.full)
    ctrl = _controller(args.controller, args.mf_file)
    sim = Simulation(scn, ctrl, seed=args.seed, log=bool(args.log))
    m = sim.run()
    row = metrics_row(scn.name, args.controller, sim.seed, m)
    if args.out:
        write_metrics_csv(args.out, [row])
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=METRICS_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerow(row)
    if args.trace:
        write_trace_csv(args.trace, m.queue_trace)
    if args.log:
        write_log_csv(args.log, sim.log)
    return 0


# -- compare ----------------------------------------------------------------

@dataclass
class ExperimentPlan:
    conditions: list[str]
    controllers: list[str]
    seeds: list[int]
    horizon: int | None = None
    full: bool = False
    mf_file: str | None = None

    def __post_init__(self):
        if not self.conditions or not self.controllers or not self.seeds:
            raise ConfigError("a plan needs at least one condition, controller and seed")
        for c in self.controllers:
            if c not in CONTROLLERS:
                raise ConfigError(f"unknown controller {c!r}")


@dataclass
class ComparisonReport:
    rows: list[dict] = field(default_factory=list)

    def aggregate(self) -> list[dict]:
        groups: dict[tuple[str, str], list[dict]] = {}
        for r in self.rows:
            groups.setdefault((r["condition"], r["controller"]), []).append(r)
        out = []
        for (cond, ctrl), rs in groups.items():
            agg = {"condition": cond, "controller": ctrl, "runs": len(rs)}
            for key in ("veh_miss", "veh_pass", "veh_delay_s"):
                vals = [float(r[key]) for r in rs]
                agg[f"{key}_mean"] = statistics.fmean(vals)
                agg[f"{key}_min"] = min(vals)
                agg[f"{key}_max"] = max(vals)
            out.append(agg)
        return out

    def grand_mean_delay(self) -> dict[str, float]:
        by_ctrl: dict[str, list[float]] = {}
        for a in self.aggregate():
            by_ctrl.setdefault(a["controller"], []).append(a["veh_delay_s_mean"])
        return {c: statistics.fmean(v) for c, v in by_ctrl.items()}

    def text_table(self) -> str:
        aggs = self.aggregate()
        ctrls = [c for c in CONTROLLER_ORDER if any(a["controller"] == c for a in aggs)]
        conds = list(dict.fromkeys(a["condition"] for a in aggs))
        cell = {(a["condition"], a["controller"]): a for a in aggs}
        lines = []
        for title, key, fmt in (("mean vehMiss", "veh_miss_mean", "{:10.1f}"),
                                ("mean vehDelay (s)", "veh_delay_s_mean", "{:10.3f}")):
            lines.append(title)
            lines.append("cond    " + "".join(f"{c:>10}" for c in ctrls))
            for cond in conds:
                vals = "".join(fmt.format(cell[(cond, c)][key]) if (cond, c) in cell else f"{'-':>10}"
                               for c in ctrls)
                lines.append(f"{cond:<8}{vals}")
            lines.append("")
        gm = self.grand_mean_delay()
        lines.append("mean    " + "".join(f"{gm[c]:10.3f}" for c in ctrls))
        return "\n".join(lines)


def run_plan(plan: ExperimentPlan, progress=None) -> ComparisonReport:
    report = ComparisonReport()
    for cond in plan.conditions:
        scn = _scenario(cond, plan.horizon, plan.full)
        for ctrl_name in plan.controllers:
            for seed in plan.seeds:
                m = Simulation(scn, _controller(ctrl_name, plan.mf_file), seed=seed).run()
                report.rows.append(metrics_row(scn.name, ctrl_name, seed, m))
                if progress:
                    progress(report.rows[-1])
    return report


def _parse_seeds(spec: str) -> list[int]:
    """``"0,3,7"`` lists seeds; ``"5x10"`` means ten seeds starting at 5."""
    if "x" in spec:
        base, count = spec.split("x")
        return list(range(int(base), int(base) + int(count)))
    return [int(s) for s in spec.split(",") if s]


def _parse_conditions(spec: str) -> list[str]:
    out = []
    for part in spec.split(","):
        if "-" in part and part.startswith("C") and not Path(part).exists():
            a, b = part.split("-")
            out += [f"C{i}" for i in range(int(a[1:]), int(b.lstrip("C")) + 1)]
        elif part:
            out.append(part)
    return out


def cmd_compare(args) -> int:
    plan = ExperimentPlan(_parse_conditions(args.conditions), args.controllers.split(","),
                          _parse_seeds(args.seeds), args.horizon, args.full, args.mf_file)
    report = run_plan(plan)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(out / "runs.csv", report.rows)
    aggs = report.aggregate()
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(aggs[0]))
        w.writeheader()
        w.writerows(aggs)
    table = report.text_table()
    (out / "summary.txt").write_text(table + "\n")
    print(table)
    return 0


# -- optimize ---------------------------------------------------------------

def cmd_optimize(args) -> int:
    if args.replay:
        doc = json.loads(Path(args.replay).read_text())
        cfg = pso.SwarmConfig.from_dict(doc["swarm"])
    elif args.config:
        cfg = pso.SwarmConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = pso.SwarmConfig()
    if args.iterations is not None:
        cfg.iterations = args.iterations
    if args.seed is not None:
        cfg.seed = args.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.time()

    def report(it, g):
        if not args.quiet and (it % 10 == 0 or it == cfg.iterations):
            print(f"iteration {it:5d}  gbest {g:.6e}  ({time.time() - t0:.0f} s)", file=sys.stderr)

    result = pso.optimize(pso.TrafficFitness(cfg), cfg, callback=report)
    save_membership(pso.decode(result.best_x), out / "mf.json")
    pso.save_history(out / "fitness_history.csv", result.history)
    pso.save_manifest(out / "manifest.json", cfg,
                      {"best_fitness": result.best_fit, "best_position": result.best_x.tolist()})
    print(f"best fitness {result.best_fit:.6e}; wrote {out}/mf.json")
    return 0


# -- conditions / phases ----------------------------------------------------

def cmd_conditions(args) -> int:
    from .phases import FLOW_LABELS

    print("cond  kind     " + "".join(f"{f:>15}" for f in FLOW_LABELS))
    for name in CONDITION_NAMES:
        scn = builtin_condition(name)
        kind = "steady" if scn.steady else "ramp"
        cells = []
        for f in FLOW_LABELS:
            pts = scn.rate_schedule[f]
            cells.append(f"{pts[0][1]:.3f}" if scn.steady else f"{pts[0][1]:.3f}->{pts[-1][1]:.3f}")
        print(f"{name:<5} {kind:<8} " + "".join(f"{c:>15}" for c in cells))
    return 0


def cmd_phases(args) -> int:
    print(phases.describe())
    return 0


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roundabout-ftc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one condition under one controller")
    s.add_argument("--condition", required=True, help="C1..C16 or a scenario JSON path")
    s.add_argument("--controller", required=True, choices=CONTROLLER_ORDER)
    s.add_argument("--mf-file", help="membership document for mix-opt")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--horizon", type=int, help="override the horizon (time units)")
    s.add_argument("--full", action="store_true", help="use the scenario's full horizon")
    s.add_argument("--trace", help="write the mean-queue-length trace CSV here")
    s.add_argument("--log", help="write the signal decision log CSV here")
    s.add_argument("--out", help="metrics CSV path (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="conditions x controllers x seeds")
    c.add_argument("--conditions", default="C1-C16", help='e.g. "C5-C8" or "C1,C3"')
    c.add_argument("--controllers", default="va,turn,jump,mix,mix-opt")
    c.add_argument("--seeds", default="0x10", help='"0,1,2" or "BASExCOUNT"')
    c.add_argument("--horizon", type=int)
    c.add_argument("--full", action="store_true")
    c.add_argument("--mf-file")
    c.add_argument("--out", default="results/compare")
    c.set_defaults(func=cmd_compare)

    o = sub.add_parser("optimize", help="train MIX-OPT membership functions with PSO")
    o.add_argument("--config", help="swarm config JSON")
    o.add_argument("--replay", help="re-run from a manifest.json")
    o.add_argument("--iterations", type=int)
    o.add_argument("--seed", type=int)
    o.add_argument("--out", default="results/optimize")
    o.add_argument("--quiet", action="store_true")
    o.set_defaults(func=cmd_optimize)

    sub.add_parser("conditions", help="list the built-in traffic conditions").set_defaults(
        func=cmd_conditions)
    sub.add_parser("phases", help="print the phase table").set_defaults(func=cmd_phases)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RangeError, ZeroArea, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
