"""Command line front end.

Subcommands solve the two dividend problems, verify the variational
inequalities, run Monte Carlo cross-checks, and emit the CSV data behind the
report figures.  All outputs are deterministic: a fixed column order, 17
significant digits, sorted sweeps, and a header comment embedding the full
resolved configuration, so identical invocations produce identical bytes.

Exit codes: 0 success, 1 verification or z-score failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dividends, injections
from .errors import DualDivError, ParseError
from .generator import check_vi_dividend, check_vi_injection
from .model import LevyModel
from .presets import (
    DEFAULT_DRIFT,
    DEFAULT_LAM,
    DEFAULT_Q,
    FIGURE1_DRIFTS,
    FIGURE2_COSTS,
    halfnormal_m6,
)
from .scale import build_scale
from .simulate import SimConfig, simulate_dividend, simulate_injection

MODES = ("dividend", "injection", "verify", "simulate", "figure1", "figure2")
_Z_GATE = 4.0


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _take(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)} in {where}")


@dataclass
class RunConfig:
    """Fully resolved run settings; see README for the file schema."""

    model: LevyModel
    q: float
    mode: str
    sweep: list[float]
    phi_cost: float
    grid_n: int
    grid_x_max: float | None
    sim: dict
    verify: dict
    output_path: Path

    def resolved(self) -> dict:
        return {
            "grid": {"n": self.grid_n, "x_max": self.grid_x_max},
            "mode": self.mode,
            "model": self.model.to_dict(),
            "phi": self.phi_cost,
            "q": self.q,
            "sim": dict(sorted(self.sim.items())),
            "sweep": list(self.sweep),
            "verify": dict(sorted(self.verify.items())),
        }

    def header(self) -> str:
        return "# " + json.dumps(self.resolved(), sort_keys=True) + "\n"


_SIM_DEFAULTS = {
    "problem": "dividend",
    "n_paths": 20000,
    "dt": 1e-3,
    "t_max": None,
    "seed": 0,
    "antithetic": False,
    "x0": None,
    "barrier": None,
    "trace": None,
}
_VERIFY_DEFAULTS = {"tolerance": 1e-6, "n": 200}


def parse_config(mode: str, args: argparse.Namespace) -> RunConfig:
    """Merge the optional config file with command-line flag overrides."""
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise ParseError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config is not valid JSON (line {exc.lineno}): {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ParseError("config root must be an object")
    _take(doc, {"model", "q", "mode", "sweep", "phi", "grid", "sim", "verify", "output_path"},
          "config root")
    if "mode" in doc and doc["mode"] != mode:
        raise ParseError(f"config mode {doc['mode']!r} does not match subcommand {mode!r}")

    model_doc = doc.get("model")
    if model_doc is None:
        jumps = halfnormal_m6()
        model_doc = {
            "drift_d": DEFAULT_DRIFT,
            "sigma": 0.0,
            "lambda": DEFAULT_LAM,
            "alpha": jumps.alpha.tolist(),
            "T": jumps.T.tolist(),
        }
    if args.drift is not None:
        model_doc["drift_d"] = args.drift
    if args.sigma is not None:
        model_doc["sigma"] = args.sigma
    model = LevyModel.from_dict(model_doc)

    q = float(args.q if args.q is not None else doc.get("q", DEFAULT_Q))
    if q <= 0.0:
        raise ParseError("q must be positive")

    phi_cost = float(args.phi if args.phi is not None else doc.get("phi", 2.0))

    sweep = doc.get("sweep")
    if sweep is None:
        if mode == "figure1":
            sweep = list(FIGURE1_DRIFTS)
        elif mode == "figure2":
            sweep = list(FIGURE2_COSTS)
        elif mode == "verify":
            sweep = [model.drift_d]
        else:
            sweep = []
    sweep = [float(v) for v in sweep]
    if any(v <= 0.0 for v in sweep):
        raise ParseError("sweep values must be positive")

    grid_doc = dict(doc.get("grid", {}))
    _take(grid_doc, {"n", "x_max"}, "grid")
    grid_n = int(grid_doc.get("n", 241))
    if grid_n < 2:
        raise ParseError("grid n must be at least 2")
    grid_x_max = grid_doc.get("x_max")

    sim = dict(_SIM_DEFAULTS)
    sim_doc = dict(doc.get("sim", {}))
    _take(sim_doc, set(_SIM_DEFAULTS), "sim")
    sim.update(sim_doc)
    if args.paths is not None:
        sim["n_paths"] = args.paths
    if args.dt is not None:
        sim["dt"] = args.dt
    if args.seed is not None:
        sim["seed"] = args.seed
    if sim["problem"] not in ("dividend", "injection"):
        raise ParseError("sim problem must be 'dividend' or 'injection'")

    verify = dict(_VERIFY_DEFAULTS)
    verify_doc = dict(doc.get("verify", {}))
    _take(verify_doc, set(_VERIFY_DEFAULTS), "verify")
    verify.update(verify_doc)

    out = Path(args.out if args.out is not None else doc.get("output_path", "out"))
    return RunConfig(
        model=model, q=q, mode=mode, sweep=sweep, phi_cost=phi_cost,
        grid_n=grid_n, grid_x_max=grid_x_max, sim=sim, verify=verify,
        output_path=out,
    )


# ---------------------------------------------------------------------------
# mode runners
# ---------------------------------------------------------------------------

def _write(cfg: RunConfig, name: str, header_cols: str, rows: list) -> Path:
    cfg.output_path.mkdir(parents=True, exist_ok=True)
    path = cfg.output_path / name
    text = cfg.header() + header_cols + "\n" + "\n".join(rows)
    path.write_text(text + "\n")
    return path

def _value_rows(sol, key: float, barrier: float, xs, mu, phi_q):
    rows = []
    for x in xs:
        v = sol.value(float(x))
        d1, _ = sol.barrier_derivatives(barrier, float(x))
        rows.append(
            f"{_fmt(key)},{_fmt(x)},{_fmt(v)},{_fmt(d1)},{_fmt(barrier)},{_fmt(mu)},{_fmt(phi_q)}"
        )
    return rows


def _sweep_models(cfg: RunConfig, drifts) -> list[LevyModel]:
    return [
        LevyModel(drift_d=d, sigma=cfg.model.sigma, lam=cfg.model.lam, jumps=cfg.model.jumps)
        for d in drifts
    ]


def _run_figure1(cfg: RunConfig) -> int:
    drifts = sorted(cfg.sweep)
    sols = []
    for mod in _sweep_models(cfg, drifts):
        sols.append(dividends.optimal_barrier(mod, cfg.q))
    x_max = cfg.grid_x_max
    if x_max is None:
        top = max(s.a_star for s in sols)
        x_max = 1.25 * top if top > 0.0 else 10.0
    xs = np.linspace(0.0, x_max, cfg.grid_n)
    rows, summary = [], []
    for d, sol in zip(drifts, sols):
        rows += _value_rows(sol, d, sol.a_star, xs, sol.mu, sol.sf.phi_q)
        summary.append(
            f"{_fmt(d)},{_fmt(sol.mu)},{_fmt(sol.sf.phi_q)},{_fmt(sol.a_star)},{_fmt(sol.value_at_barrier)}"
        )
    _write(cfg, "figure1_curves.csv",
           "drift_d,x,value,derivative,barrier,mu,phi_q", rows)
    _write(cfg, "figure1_summary.csv",
           "drift_d,mu,phi_q,a_star,value_at_barrier", summary)
    print(f"figure1: wrote {len(rows)} curve points for {len(drifts)} drifts to {cfg.output_path}")
    return 0


def _run_figure2(cfg: RunConfig) -> int:
    costs = sorted(cfg.sweep)
    sf = build_scale(cfg.model, cfg.q)
    sols = [injections.optimal_barrier(sf, c) for c in costs]
    x_max = cfg.grid_x_max
    if x_max is None:
        x_max = 1.25 * max(s.b_star for s in sols)
    xs = np.linspace(0.0, x_max, cfg.grid_n)
    rows, summary = [], []
    for c, sol in zip(costs, sols):
        rows += _value_rows(sol, c, sol.b_star, xs, sol.mu, sf.phi_q)
        summary.append(
            f"{_fmt(c)},{_fmt(sol.b_star)},{_fmt(sol.mu)},{_fmt(sf.phi_q)},{_fmt(sol.value(sol.b_star))}"
        )
    _write(cfg, "figure2_curves.csv",
           "phi,x,value,derivative,barrier,mu,phi_q", rows)
    _write(cfg, "figure2_summary.csv",
           "phi,b_star,mu,phi_q,value_at_barrier", summary)
    print(f"figure2: wrote {len(rows)} curve points for {len(costs)} costs to {cfg.output_path}")
    return 0


def _run_solve_dividend(cfg: RunConfig) -> int:
    sol = dividends.optimal_barrier(cfg.model, cfg.q)
    x_max = cfg.grid_x_max if cfg.grid_x_max is not None else max(1.25 * sol.a_star, 10.0)
    xs = np.linspace(0.0, x_max, cfg.grid_n)
    rows = _value_rows(sol, cfg.model.drift_d, sol.a_star, xs, sol.mu, sol.sf.phi_q)
    _write(cfg, "dividend_curve.csv",
           "drift_d,x,value,derivative,barrier,mu,phi_q", rows)
    _write(cfg, "dividend_summary.csv", "drift_d,mu,phi_q,a_star,value_at_barrier",
           [f"{_fmt(cfg.model.drift_d)},{_fmt(sol.mu)},{_fmt(sol.sf.phi_q)},"
            f"{_fmt(sol.a_star)},{_fmt(sol.value_at_barrier)}"])
    print(f"dividend: a* = {sol.a_star:.6f}, value at barrier = {sol.value_at_barrier:.6f}")
    return 0


def _run_solve_injection(cfg: RunConfig) -> int:
    sf = build_scale(cfg.model, cfg.q)
    sol = injections.optimal_barrier(sf, cfg.phi_cost)
    x_max = cfg.grid_x_max if cfg.grid_x_max is not None else 1.25 * sol.b_star
    xs = np.linspace(0.0, x_max, cfg.grid_n)
    rows = _value_rows(sol, cfg.phi_cost, sol.b_star, xs, sol.mu, sf.phi_q)
    _write(cfg, "injection_curve.csv",
           "phi,x,value,derivative,barrier,mu,phi_q", rows)
    _write(cfg, "injection_summary.csv", "phi,b_star,mu,phi_q,value_at_barrier",
           [f"{_fmt(cfg.phi_cost)},{_fmt(sol.b_star)},{_fmt(sol.mu)},{_fmt(sf.phi_q)},"
            f"{_fmt(sol.value(sol.b_star))}"])
    print(f"injection: b* = {sol.b_star:.6f}, value at barrier = {sol.value(sol.b_star):.6f}")
    return 0


def _run_verify(cfg: RunConfig) -> int:
    tol = float(cfg.verify["tolerance"])
    n = int(cfg.verify["n"])
    drifts = sorted(cfg.sweep)
    summary, status = [], 0
    for i, mod in enumerate(_sweep_models(cfg, drifts)):
        sf = build_scale(mod, cfg.q)
        sol = dividends.optimal_barrier(mod, cfg.q, sf)
        rep = check_vi_dividend(sol, n=n, tol=tol)
        _write(cfg, f"verify_dividend_{i}.csv", rep.to_csv().split("\n", 1)[0],
               rep.to_csv().split("\n")[1:-1])
        summary.append(f"dividend,{_fmt(mod.drift_d)},{_fmt(mod.sigma)},nan,"
                       f"{_fmt(sol.a_star)},{_fmt(rep.max_violation)},{_fmt(tol)},{rep.verdict}")
        status |= rep.verdict != "pass"
        inj = injections.optimal_barrier(sf, cfg.phi_cost)
        repi = check_vi_injection(inj, n=n, tol=tol)
        _write(cfg, f"verify_injection_{i}.csv", repi.to_csv().split("\n", 1)[0],
               repi.to_csv().split("\n")[1:-1])
        summary.append(f"injection,{_fmt(mod.drift_d)},{_fmt(mod.sigma)},{_fmt(cfg.phi_cost)},"
                       f"{_fmt(inj.b_star)},{_fmt(repi.max_violation)},{_fmt(tol)},{repi.verdict}")
        status |= repi.verdict != "pass"
    _write(cfg, "verify_summary.csv",
           "problem,drift_d,sigma,phi,barrier,max_violation,tolerance,verdict", summary)
    for line in summary:
        print(line)
    return 1 if status else 0


def _run_simulate(cfg: RunConfig) -> int:
    sim = cfg.sim
    sim_cfg = SimConfig(
        q=cfg.q, n_paths=int(sim["n_paths"]), dt=float(sim["dt"]),
        t_max=None if sim["t_max"] is None else float(sim["t_max"]),
        seed=int(sim["seed"]), antithetic=bool(sim["antithetic"]),
    )
    trace = sim["trace"]
    if trace is not None:
        cfg.output_path.mkdir(parents=True, exist_ok=True)
        trace = cfg.output_path / str(trace)
    if sim["problem"] == "dividend":
        sol = dividends.optimal_barrier(cfg.model, cfg.q)
        barrier = sol.a_star if sim["barrier"] is None else float(sim["barrier"])
        x0 = barrier if sim["x0"] is None else float(sim["x0"])
        closed = sol.barrier_value(barrier, x0)
        est = simulate_dividend(cfg.model, barrier, x0, sim_cfg, trace_path=trace)
    else:
        sf = build_scale(cfg.model, cfg.q)
        sol = injections.optimal_barrier(sf, cfg.phi_cost)
        barrier = sol.b_star if sim["barrier"] is None else float(sim["barrier"])
        x0 = barrier if sim["x0"] is None else float(sim["x0"])
        closed = sol.barrier_value(barrier, x0)
        est = simulate_injection(cfg.model, barrier, cfg.phi_cost, x0, sim_cfg, trace_path=trace)
    z = est.z_score(closed)
    row = (f"{sim['problem']},{_fmt(barrier)},{_fmt(x0)},{est.n_paths},{_fmt(est.dt)},"
           f"{sim_cfg.seed},{_fmt(est.mean)},{_fmt(est.std_error)},{_fmt(est.ci95[0])},"
           f"{_fmt(est.ci95[1])},{_fmt(est.truncation_bound)},{_fmt(closed)},{_fmt(z)}")
    _write(cfg, "simulate.csv",
           "problem,barrier,x0,n_paths,dt,seed,mean,std_error,ci_lo,ci_hi,"
           "truncation_bound,closed_form,z_score", [row])
    print(f"simulate {sim['problem']}: mean={est.mean:.5f} se={est.std_error:.5f} "
          f"closed={closed:.5f} z={z:+.2f}")
    return 0 if abs(z) <= _Z_GATE else 1


_RUNNERS = {
    "dividend": _run_solve_dividend,
    "injection": _run_solve_injection,
    "verify": _run_verify,
    "simulate": _run_simulate,
    "figure1": _run_figure1,
    "figure2": _run_figure2,
}


def run(cfg: RunConfig) -> int:
    return _RUNNERS[cfg.mode](cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualdiv",
        description="Optimal dividend barriers for spectrally positive surplus models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "solve-dividend": "solve the dividend-until-ruin problem",
        "solve-injection": "solve the capital-injection problem",
        "verify": "check the variational inequalities of both problems",
        "simulate": "Monte Carlo cross-check of a barrier policy",
        "figure1": "emit the drift-sweep dividend curves",
        "figure2": "emit the cost-sweep injection curves",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="JSON run configuration")
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--drift", type=float, default=None)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--phi", type=float, default=None)
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--paths", type=int, default=None)
        p.add_argument("--dt", type=float, default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    mode = {"solve-dividend": "dividend", "solve-injection": "injection"}.get(
        args.command, args.command
    )
    try:
        cfg = parse_config(mode, args)
        return run(cfg)
    except DualDivError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
