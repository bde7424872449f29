"""Command-line front end: scenario ingestion, config dispatch, report emission.

Subcommands: eval, robustify, dual-check, acceptance, allocate, properties.
Reports go to standard output as a small table and, with --out, to JSON or CSV
with all floats rendered at 17 significant digits for reproducible replays.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import acceptance as acc
from . import allocation as alloc
from . import duality, risk_measures, robustify, uncertainty
from .prob_core import Position, ProbSpace, ScenarioMeasure

__all__ = ["ScenarioFile", "RunConfig", "parse_scenario", "parse_config", "run", "main"]


class InputError(Exception):
    pass


@dataclass(frozen=True)
class ScenarioFile:
    space: ProbSpace
    positions: dict
    measures: dict


@dataclass(frozen=True)
class RunConfig:
    rho: dict
    family: Optional[dict]
    solver: dict
    tolerances: dict
    grid: dict
    seed: int
    extra: dict


def parse_scenario(path: str) -> ScenarioFile:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"scenario file not found: {path}")
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON in {path}: {e}")
    if "space" not in raw or "probs" not in raw.get("space", {}):
        raise InputError("scenario missing field: space.probs")
    try:
        space = ProbSpace(raw["space"]["probs"])
    except ValueError as e:
        raise InputError(f"space.probs: {e}")
    positions = {}
    for name, vals in raw.get("positions", {}).items():
        if name in positions:
            raise InputError(f"positions.{name}: duplicate name")
        try:
            positions[name] = Position(space, vals)
        except ValueError as e:
            raise InputError(f"positions.{name}: {e}")
    measures = {}
    for name, spec_ in raw.get("measures", {}).items():
        try:
            measures[name] = ScenarioMeasure(space, spec_["density"])
        except (KeyError, ValueError) as e:
            raise InputError(f"measures.{name}: {e}")
    return ScenarioFile(space=space, positions=positions, measures=measures)


def _build_loss(spec_: dict):
    kind = spec_.get("kind", "exp")
    if kind == "exp":
        return risk_measures.exponential_loss()
    if kind == "identity":
        return risk_measures.identity_loss()
    if kind == "power":
        return risk_measures.power_loss(float(spec_["k"]))
    raise InputError(f"unknown loss kind {kind!r}")


def build_rho(spec_: dict) -> risk_measures.RiskFunctional:
    kind = spec_.get("kind")
    p = spec_.get("params", {})
    try:
        if kind == "neg_expectation":
            return risk_measures.neg_expectation()
        if kind == "expectation_floor":
            return risk_measures.expectation_floor(float(p["K"]))
        if kind == "worst_case":
            return risk_measures.worst_case()
        if kind == "entropic":
            return risk_measures.entropic(float(p.get("gamma", 1.0)))
        if kind == "expected_shortfall":
            return risk_measures.expected_shortfall(float(p["alpha"]))
        if kind == "certainty_equivalent":
            return risk_measures.certainty_equivalent(_build_loss(p.get("loss", {"kind": "exp"})))
        if kind == "q_entropic":
            return risk_measures.q_entropic(float(p["q"]), float(p["beta"]))
    except (KeyError, ValueError) as e:
        raise InputError(f"rho.params: {e}")
    raise InputError(f"unknown risk measure kind {kind!r}")


def build_family(spec_: dict) -> uncertainty.UncertaintyFamily:
    kind = spec_.get("kind")
    p = spec_.get("params", {})
    try:
        if kind == "sup_norm_ball":
            return uncertainty.sup_norm_ball(float(p.get("eps", 0.0)))
        if kind == "p_norm_ball":
            return uncertainty.p_norm_ball(float(p.get("p", 1.0)), float(p.get("eps", 0.0)))
        if kind == "wasserstein_ball":
            return uncertainty.wasserstein_ball(float(p.get("p", 1.0)), float(p.get("eps", 0.0)))
        if kind == "level_band":
            return uncertainty.level_band(build_rho(p["rho1"]), float(p.get("eps", 0.0)))
        if kind == "level_upper_set":
            return uncertainty.level_upper_set(build_rho(p["rho1"]), float(p.get("eps", 0.0)))
    except (KeyError, ValueError) as e:
        raise InputError(f"family.params: {e}")
    raise InputError(f"unknown family kind {kind!r}")


def parse_config(path: Optional[str]) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise InputError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise InputError(f"malformed JSON in {path}: {e}")
    tol = {"analytic": 1e-9, "grid": 1e-5}
    tol.update(raw.get("tolerances", {}))
    if any(v <= 0 for v in tol.values()):
        raise InputError("tolerances must be positive")
    grid = {"simplex_step": 0.01, "box_bound": 20.0, "lattice_step": 0.4}
    grid.update(raw.get("grid", {}))
    known = {"rho", "family", "solver", "tolerances", "grid", "seed"}
    return RunConfig(
        rho=raw.get("rho", {"kind": "neg_expectation"}),
        family=raw.get("family"),
        solver=raw.get("solver", {"kind": "auto"}),
        tolerances=tol,
        grid=grid,
        seed=int(raw.get("seed", 42)),
        extra={k: v for k, v in raw.items() if k not in known},
    )


# ---------------------------------------------------------------------------
# report serialization


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, Position):
        return _fmt(list(map(float, v.values)))
    if isinstance(v, ScenarioMeasure):
        return _fmt({"density": list(map(float, v.density))})
    if isinstance(v, np.ndarray):
        return _fmt(list(map(float, v)))
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        items = sorted(v.items(), key=lambda kv: str(kv[0]))
        return "{" + ", ".join(json.dumps(str(k)) + ": " + _fmt(val) for k, val in items) + "}"
    return json.dumps(str(v))


def dumps17(report: dict) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    return _fmt(report)


def _flatten(prefix: str, v, rows: list):
    if isinstance(v, dict):
        for k in sorted(v, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], rows)
    elif isinstance(v, Position):
        rows.append((prefix, " ".join(format(x, ".17g") for x in v.values)))
    elif isinstance(v, (list, tuple, np.ndarray)):
        rows.append((prefix, " ".join(_scalar(x) for x in v)))
    else:
        rows.append((prefix, _scalar(v)))


def _scalar(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, Position):
        return " ".join(format(x, ".17g") for x in v.values)
    return str(v)


def emit(report: dict, out: Optional[str], fmt: str):
    rows = []
    _flatten("", report, rows)
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        print(f"{k.ljust(width)}  {v}")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            if fmt == "json":
                fh.write(dumps17(report) + "\n")
            else:
                fh.write("key,value\n")
                for k, v in rows:
                    fh.write(f"{k},{json.dumps(v)}\n")


# ---------------------------------------------------------------------------
# subcommands


def _verdict_report(v: uncertainty.PropertyVerdict) -> dict:
    rep = {"tag": v.tag, "trials": v.trials, "note": v.note}
    if v.witness is not None:
        rep["witness"] = {k: w for k, w in v.witness.items()}
    return rep


def run(subcommand: str, config: RunConfig, scenario: ScenarioFile, args) -> dict:
    rho = build_rho(config.rho)
    family = build_family(config.family) if config.family else None
    seed = args.seed if args.seed is not None else config.seed
    report = {"subcommand": subcommand, "seed": seed}

    if subcommand == "eval":
        report["values"] = {name: rho(X) for name, X in scenario.positions.items()}
        return report

    if subcommand == "robustify":
        if family is None:
            report["values"] = {name: rho(X) for name, X in scenario.positions.items()}
            return report
        vals = {}
        for name, X in scenario.positions.items():
            rv = robustify.robust_value(rho, family, X, solver=config.solver.get("kind", "auto"), seed=seed)
            vals[name] = {
                "value": rv.value,
                "witness": rv.witness,
                "solver": rv.solver,
                "guarantee": rv.guarantee,
            }
        report["values"] = vals
        return report

    if subcommand == "dual-check":
        name, X = _pick_position(scenario, args)
        grid = duality.simplex_grid(scenario.space, config.grid["simplex_step"], seed=seed)
        verifier = args.verifier or config.extra.get("verifier", "primal_dual")
        if verifier == "primal_dual":
            if rho.flags.cash_additive:
                surface = duality.penalty_type(rho, "cash_additive")
            else:
                surface = duality.penalty_type(
                    rho,
                    "brute_force",
                    space=scenario.space,
                    bound=config.grid["box_bound"],
                    step=config.grid["lattice_step"],
                    anchors=(X,),
                )
            rep = duality.verify_primal_dual(rho, X, grid, surface)
        elif verifier == "robust_dual":
            rep = duality.verify_robust_dual(rho, family, X, grid, seed=seed)
        elif verifier == "robust_dual_ce":
            loss = rho.params.get("loss") or risk_measures.exponential_loss()
            rep = duality.verify_robust_dual(rho, family, X, grid, loss=loss, seed=seed)
        elif verifier == "convex_cash_additive":
            rep = duality.verify_convex_cash_additive_dual(rho, family, X, grid)
        elif verifier == "second_approach":
            rep = duality.verify_second_approach_dual(rho, family, X, grid, seed=seed)
        else:
            raise InputError(f"unknown verifier {verifier!r}")
        report["position"] = name
        report["verifier"] = verifier
        report["result"] = rep
        return report

    if subcommand == "acceptance":
        name, X = _pick_position(scenario, args)
        m = args.level if args.level is not None else config.extra.get("level", 0.0)
        report["position"] = name
        report["level"] = m
        report["acceptable"] = acc.is_acceptable(rho, X, m)
        report["acceptance_level"] = acc.acceptance_level(rho, X)
        if family is not None:
            report["robust"] = acc.robust_acceptance_check(rho, family, X, m, seed=seed)
            report["robust_level_by_sets"] = acc.robust_level_by_sets(rho, family, X, seed=seed)
        return report

    if subcommand == "allocate":
        spec_ = config.extra.get("allocate", {})
        agg_name = spec_.get("aggregate", "Y")
        part_names = spec_.get("parts", [])
        if agg_name not in scenario.positions:
            raise InputError(f"allocate.aggregate: unknown position {agg_name!r}")
        Y = scenario.positions[agg_name]
        grid = duality.simplex_grid(scenario.space, config.grid["simplex_step"], seed=seed)
        rule = alloc.gradient_car(rho, grid)
        report["aggregate"] = agg_name
        report["rho"] = rho(Y)
        if family is not None:
            report["robust_car_self"] = alloc.robust_car(rule, family, Y, Y, seed=seed)
            parts = []
            for pn in part_names:
                if pn not in scenario.positions:
                    raise InputError(f"allocate.parts: unknown position {pn!r}")
                parts.append(scenario.positions[pn])
            if parts:
                report["parts"] = {
                    pn: alloc.robust_car(rule, family, scenario.positions[pn], Y, seed=seed)
                    for pn in part_names
                }
                verdict = alloc.check_subadditive_allocation(rule, family, Y, parts, seed=seed)
                report["sub_allocation"] = _verdict_report(verdict)
        return report

    if subcommand == "properties":
        if family is None:
            raise InputError("properties subcommand requires a family in the config")
        props = [args.property] if args.property else list(uncertainty.FAMILY_PROPERTIES)
        trials = args.trials or 200
        out = {}
        found_counterexample = False
        for prop in props:
            v = uncertainty.check_property(family, prop, scenario.space, trials=trials, seed=seed)
            if v.is_counterexample:
                found_counterexample = True
                assert uncertainty.replay_witness(family, prop, v.witness)
            out[prop] = _verdict_report(v)
        report["properties"] = out
        report["counterexample_found"] = found_counterexample
        return report

    raise InputError(f"unknown subcommand {subcommand!r}")


def _pick_position(scenario: ScenarioFile, args):
    if not scenario.positions:
        raise InputError("scenario contains no positions")
    if args.position:
        if args.position not in scenario.positions:
            raise InputError(f"unknown position {args.position!r}")
        return args.position, scenario.positions[args.position]
    name = "X" if "X" in scenario.positions else next(iter(scenario.positions))
    return name, scenario.positions[name]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="robustrisk",
        description="Worst-case risk over uncertainty sets: evaluation, duality and property checks.",
    )
    parser.add_argument("subcommand", choices=["eval", "robustify", "dual-check", "acceptance", "allocate", "properties"])
    parser.add_argument("--scenario", required=True, help="path to the scenario JSON file")
    parser.add_argument("--config", default=None, help="path to the run configuration JSON file")
    parser.add_argument("--out", default=None, help="write the machine-readable report here")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--strict", action="store_true", help="exit 1 when a property counterexample is found")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--position", default=None, help="position name for single-position subcommands")
    parser.add_argument("--level", type=float, default=None, help="acceptance target level m")
    parser.add_argument("--verifier", default=None, help="dual-check verifier selection")
    parser.add_argument("--property", default=None, help="single property for the properties subcommand")
    args = parser.parse_args(argv)

    try:
        scenario = parse_scenario(args.scenario)
        config = parse_config(args.config)
        report = run(args.subcommand, config, scenario, args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    emit(report, args.out, args.format)
    if args.strict and report.get("counterexample_found"):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
