"""Command-line front end: run scenarios, sweep weights, verify optimality.

Scenario files are JSON with all angles in degrees:

    {
      "missile":  {"position": [x, y], "gamma_deg": 10.0, "speed": 250.0},
      "target":   {"position": [x, y]},
      "guidance": {"family": "uniform" | "power_tgo" | "exponential",
                   "params": {...}, "gamma_f_deg": -30.0,
                   "tgo_min": 0.001, "a_max": null},
      "sim":      {"mode": "nonlinear" | "linear", "dt": 0.001,
                   "tf": 20.0, "integrator": "rk4"}
    }

Exit codes: 0 success, 1 verification failure or simulation divergence,
2 usage/config error. Outputs are plain CSV (and optional SVG plots) so
runs stay diffable; identical configs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .engagement import (
    DivergenceError,
    Scenario,
    initial_linear_state,
    scenario_weight,
    simulate,
    write_trajectory_csv,
)
from .gains import (
    equivalent_gains,
    gram_determinant,
    moments_analytic,
    moments_auto,
    moments_quadrature,
)
from .guidance import (
    AngleGuidanceState,
    LinearGuidanceState,
    command_angles,
    command_linear,
    command_predictive_form,
)
from .oracle import BoundaryData, discrete_optimal, schwarz_command, schwarz_cost
from .weighting import check_feasible

SWEEP_HEADER = "param_name,param_value,miss_m,angle_err_deg,cost,peak_accel,flight_time_s,status"
SUMMARY_HEADER = "miss_m,angle_err_deg,cost,peak_accel,flight_time_s"
GAINS_HEADER = "tgo_s,k1,k2"


class ConfigError(Exception):
    """Malformed scenario file or CLI usage; maps to exit code 2."""


def _fmt(v: float) -> str:
    return format(v, ".12g")


def _require(obj: dict, path: str, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"missing field '{path}.{key}'" if path else f"missing field '{key}'")
    return obj[key]


def _number(obj: dict, path: str, key: str) -> float:
    v = _require(obj, path, key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"field '{path}.{key}' must be a number, got {v!r}")
    return float(v)


def _pair(obj: dict, path: str, key: str) -> tuple[float, float]:
    v = _require(obj, path, key)
    if not (isinstance(v, list) and len(v) == 2):
        raise ConfigError(f"field '{path}.{key}' must be a [x, y] pair, got {v!r}")
    return float(v[0]), float(v[1])


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario JSON file.

    Raises:
        ConfigError: missing file, JSON syntax errors (with line/column),
            or missing/ill-typed fields (with dotted field paths).
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")

    missile = _require(raw, "", "missile")
    target = _require(raw, "", "target")
    guidance = _require(raw, "", "guidance")
    sim = _require(raw, "", "sim")

    mode = _require(sim, "sim", "mode")
    if mode not in ("linear", "nonlinear"):
        raise ConfigError(f"field 'sim.mode' must be 'linear' or 'nonlinear', got {mode!r}")
    tf = _number(sim, "sim", "tf") if ("tf" in sim and sim["tf"] is not None) else None
    if mode == "linear" and tf is None:
        raise ConfigError("field 'sim.tf' is required in linear mode")

    params = guidance.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("field 'guidance.params' must be an object")

    try:
        sc = Scenario(
            missile_pos=_pair(missile, "missile", "position"),
            gamma_m0=math.radians(_number(missile, "missile", "gamma_deg")),
            v_m=_number(missile, "missile", "speed"),
            target_pos=_pair(target, "target", "position"),
            gamma_f=math.radians(_number(guidance, "guidance", "gamma_f_deg")),
            weight_family=str(_require(guidance, "guidance", "family")),
            weight_params={k: float(v) for k, v in params.items()},
            kinematics=mode,
            dt=_number(sim, "sim", "dt"),
            tf=tf,
            integrator=str(sim.get("integrator", "rk4")),
            tgo_min=float(guidance.get("tgo_min", 1e-3)),
            a_max=None if guidance.get("a_max") is None else float(guidance["a_max"]),
        )
        scenario_weight(sc)  # validate family name and parameters early
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return sc


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def _summary_lines(metrics) -> list[str]:
    return [
        SUMMARY_HEADER,
        ",".join(
            _fmt(v)
            for v in (
                metrics.miss_distance,
                math.degrees(metrics.impact_angle_error),
                metrics.total_cost,
                metrics.peak_accel,
                metrics.flight_time,
            )
        ),
    ]


def _gains_table_lines(sc: Scenario, points: int = 25) -> list[str]:
    w = scenario_weight(sc)
    lines = [GAINS_HEADER]
    for tgo in np.geomspace(max(sc.tgo_min, 1e-6), w.span, points):
        k = equivalent_gains(w, w.tf - tgo)
        lines.append(f"{_fmt(tgo)},{_fmt(k.k1)},{_fmt(k.k2)}")
    return lines


def _svg_plot(xs: Sequence[float], ys: Sequence[float], title: str) -> str:
    width, height, margin = 640, 480, 50
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0

    def px(x: float) -> float:
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y: float) -> float:
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>\n'
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#999"/>\n'
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>\n'
        "</svg>\n"
    )


def _cmd_run(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        records, metrics = simulate(sc)
    except DivergenceError as exc:
        with open(out / "trajectory.csv", "w") as fp:
            write_trajectory_csv(exc.records, fp)
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        print(f"partial trajectory retained in {out / 'trajectory.csv'}", file=sys.stderr)
        return 1

    with open(out / "trajectory.csv", "w") as fp:
        write_trajectory_csv(records, fp)
    _write_lines(out / "summary.csv", _summary_lines(metrics))
    _write_lines(out / "gains_vs_tgo.csv", _gains_table_lines(sc))
    if args.svg:
        (out / "trajectory.svg").write_text(
            _svg_plot([r.x for r in records], [r.y for r in records], "trajectory (x vs y)")
        )
        (out / "accel.svg").write_text(
            _svg_plot([r.t for r in records], [r.a_m for r in records], "acceleration history")
        )
    print(
        f"miss {_fmt(metrics.miss_distance)} m, "
        f"impact angle error {_fmt(math.degrees(metrics.impact_angle_error))} deg, "
        f"cost {_fmt(metrics.total_cost)}, "
        f"peak accel {_fmt(metrics.peak_accel)} m/s^2, "
        f"flight time {_fmt(metrics.flight_time)} s"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    if not args.values.strip():
        raise ConfigError("empty sweep grid: --values must list at least one number")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --values entry: {exc}") from exc
    if not values:
        raise ConfigError("empty sweep grid: --values must list at least one number")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [SWEEP_HEADER]
    for value in values:
        params = dict(sc.weight_params)
        params[args.param] = value
        variant = replace(sc, weight_params=params)
        try:
            _, metrics = simulate(variant)
            rows.append(
                ",".join(
                    (
                        args.param,
                        _fmt(value),
                        _fmt(metrics.miss_distance),
                        _fmt(math.degrees(metrics.impact_angle_error)),
                        _fmt(metrics.total_cost),
                        _fmt(metrics.peak_accel),
                        _fmt(metrics.flight_time),
                        "ok",
                    )
                )
            )
        except Exception as exc:
            rows.append(
                ",".join(
                    (args.param, _fmt(value), "nan", "nan", "nan", "nan", "nan",
                     f"error:{type(exc).__name__}")
                )
            )
    _write_lines(out / "sweep.csv", rows)
    print(f"wrote {len(rows) - 1} rows to {out / 'sweep.csv'}")
    return 0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel_err(a: float, b: float, floor: float = 1e-12) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def verification_suite(sc: Scenario, steps: int, seed: int = 20260810) -> list[CheckResult]:
    """All verify-subcommand checks for one scenario's weight and geometry."""
    results: list[CheckResult] = []
    w = scenario_weight(sc)

    report = check_feasible(w, samples=256)
    results.append(
        CheckResult(
            "feasibility",
            report.feasible,
            f"positive={report.positive} bounded={report.bounded} "
            f"stack_consistent={report.stack_consistent}",
        )
    )
    if not report.feasible:
        return results

    ts = np.linspace(w.t0, w.tf - 1e-6 * w.span, 50)
    dets = [gram_determinant(moments_auto(w, float(t))) for t in ts]
    results.append(
        CheckResult(
            "gram-positivity",
            all(d > 0.0 for d in dets),
            f"det(t0)={dets[0]:.6g}, min over grid={min(dets):.6g}",
        )
    )

    if w.has_analytic_stack:
        worst = 0.0
        for t in np.linspace(w.t0, w.tf - 0.05 * w.span, 12):
            ma = moments_analytic(w, float(t))
            mq = moments_quadrature(w, float(t), tol=1e-10)
            worst = max(
                worst,
                _rel_err(ma.g1, mq.g1),
                _rel_err(ma.g12, mq.g12),
                _rel_err(ma.g2, mq.g2),
            )
        results.append(
            CheckResult("analytic-vs-quadrature", worst < 1e-8, f"max residual={worst:.3e}")
        )
    else:
        results.append(
            CheckResult("analytic-vs-quadrature", True, "skipped (no analytic stack)")
        )

    rng = np.random.default_rng(seed)
    worst_angle = 0.0
    worst_pred = 0.0
    for _ in range(200):
        tgo = float(rng.uniform(max(sc.tgo_min, 0.05 * w.span), 0.95 * w.span))
        t = w.tf - tgo
        k = equivalent_gains(w, t)
        y = float(rng.uniform(-500.0, 500.0))
        v = float(rng.uniform(-100.0, 100.0))
        s = LinearGuidanceState(y, v, tgo)
        u_lin = command_linear(k, s, tgo_min=sc.tgo_min)
        if abs(u_lin) < 1e-3:
            continue
        gamma_f = float(rng.uniform(-1.0, 1.0))
        ang = AngleGuidanceState(
            sigma=gamma_f - y / (sc.v_m * tgo),
            gamma_m=gamma_f + v / sc.v_m,
            gamma_f=gamma_f,
            v_m=sc.v_m,
            tgo=tgo,
        )
        worst_angle = max(
            worst_angle, _rel_err(command_angles(k, ang, tgo_min=sc.tgo_min), u_lin)
        )
        worst_pred = max(
            worst_pred,
            _rel_err(command_predictive_form(k, s, tgo_min=sc.tgo_min), u_lin),
        )
    results.append(
        CheckResult(
            "form-equivalence",
            worst_angle < 1e-12 and worst_pred < 1e-12,
            f"angle residual={worst_angle:.3e}, predictive residual={worst_pred:.3e}",
        )
    )

    state0 = initial_linear_state(sc)
    if state0.tgo > w.span:
        state0 = LinearGuidanceState(state0.y, state0.v, w.span)
    t0 = w.tf - state0.tgo
    m = moments_auto(w, t0)
    bd = BoundaryData.from_state(state0, tf=w.tf)
    u_ref = float(schwarz_command(bd, m, w, t0)(t0))
    sol = schwarz_cost(bd, m)
    u_seq, cost = discrete_optimal(state0, w, steps)
    if abs(u_ref) > 1e-9:
        cmd_err = _rel_err(float(u_seq[0]), u_ref)
    else:
        cmd_err = abs(float(u_seq[0]) - u_ref)
    cost_err = _rel_err(cost, sol.j_min) if sol.j_min > 1e-12 else abs(cost - sol.j_min)
    results.append(
        CheckResult(
            "oracle-command",
            cmd_err < 0.01,
            f"discrete u0={float(u_seq[0]):.6g} vs closed form {u_ref:.6g} "
            f"(residual={cmd_err:.3e}, steps={steps})",
        )
    )
    results.append(
        CheckResult(
            "oracle-cost",
            cost_err < 0.01,
            f"discrete cost={cost:.6g} vs minimum {sol.j_min:.6g} (residual={cost_err:.3e})",
        )
    )
    return results


def _cmd_verify(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    results = verification_suite(sc, steps=args.steps)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wogl",
        description="Weighted optimal impact-angle guidance runner",
        epilog="All angles in scenario files are degrees; they are converted "
        "to radians internally.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario, write CSV artifacts")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--svg", action="store_true", help="also write SVG plots")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a grid over one weight parameter")
    p_sweep.add_argument("--scenario", required=True, help="base scenario JSON file")
    p_sweep.add_argument("--out", default=".", help="output directory")
    p_sweep.add_argument("--param", required=True, help="weight parameter to sweep (e.g. n)")
    p_sweep.add_argument("--values", required=True, help="comma-separated parameter values")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run optimality and consistency checks")
    p_verify.add_argument("--scenario", required=True, help="scenario JSON file")
    p_verify.add_argument("--steps", type=int, default=2**14, help="oracle step count")
    p_verify.set_defaults(fn=_cmd_verify)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize others.
        return int(exc.code) if exc.code is not None else 2

    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def cli_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli_entry()
