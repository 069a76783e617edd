"""Command-line surface: pricing, arbitrage checks, scans, reports.

Markets and derivatives are passed as inline JSON or @path references.
The experiment subcommand renders parameter scans to CSV (schema v1)
for the figure tooling; rows are computed by a bounded worker pool but
always written in grid order, and output is deterministic for a fixed
spec and seed apart from the runtime_ms column.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._simplex_core import IterationLimitError, OPTIMAL
from .bsm import (
    BsmSpec,
    DiscretizedBsm,
    analytic_price,
    build,
    call_payoff,
    put_payoff,
    rn_price_interval,
)
from .market import (
    ArbitrageCertificate,
    Derivative,
    MarketFormatError,
    market_from_json,
)
from .market import detect_arbitrage
from .pseudoinverse import NotLeastSquaresMarketError, pinv_price
from .simplex import (
    InternalInconsistencyError,
    SingularBasisError,
    solve as simplex_solve,
)
from .zsg import (
    InfeasibleMarketError,
    PrecisionFloorError,
    price_absolute,
    quantum_advantage_report,
)

EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_PINV = 4
EXIT_SOLVER = 5

CSV_V1_COLUMNS = [
    "scan_var",
    "value",
    "eta",
    "solver",
    "lp_min",
    "lp_max",
    "analytic_discrete",
    "analytic_closed",
    "seed",
    "status",
    "runtime_ms",
]

# per-round iteration cap for sampling-solver runs started from the CLI;
# the library default (no cap) is the proven budget and is far too slow
# for interactive use
_CLI_T_MAX = 2_000_000
_CLI_SAMPLE_MAX = 100_000

_SPEC_KEYS = {"pi", "mu", "sigma", "k0", "strike", "kind", "half_sigma_sign", "eta"}


class CliError(Exception):
    """Error with an exit code and a JSON payload for stdout."""

    def __init__(self, code: int, payload: dict):
        super().__init__(payload.get("error", "error"))
        self.code = code
        self.payload = payload


def _read_arg(text: str) -> str:
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise CliError(EXIT_PARSE, {"error": f"cannot read {text[1:]}: {exc}"})
    return text


def _load_market(text: str):
    try:
        return market_from_json(_read_arg(text))
    except MarketFormatError as exc:
        raise CliError(EXIT_PARSE, {"error": f"market: {exc}"})


def _load_derivative(text: str, loaded) -> Derivative:
    raw = _read_arg(text)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, {"error": f"derivative: invalid JSON: {exc}"})
    if not isinstance(data, dict):
        raise CliError(EXIT_PARSE, {"error": "derivative JSON must be an object"})
    keys = set(data)
    if keys == {"payoffs"}:
        payoffs = np.asarray(data["payoffs"], dtype=np.float64)
        if payoffs.ndim != 1 or payoffs.shape[0] != loaded.price_system.n_events:
            raise CliError(
                EXIT_PARSE,
                {
                    "error": "derivative: payoffs must be a vector with one "
                    "entry per market event"
                },
            )
        if not np.all(np.isfinite(payoffs)) or np.any(payoffs < 0):
            raise CliError(
                EXIT_PARSE,
                {"error": "derivative: payoffs must be finite and nonnegative"},
            )
        return Derivative(payoffs=payoffs)
    if keys == {"kind", "strike"}:
        if not isinstance(loaded.generated, DiscretizedBsm):
            raise CliError(
                EXIT_PARSE,
                {
                    "error": "derivative: kind/strike form requires a "
                    "generated market"
                },
            )
        kind = data["kind"]
        if kind not in ("call", "put"):
            raise CliError(
                EXIT_PARSE, {"error": f"derivative: unknown kind {kind!r}"}
            )
        try:
            strike = float(data["strike"])
        except (TypeError, ValueError):
            raise CliError(EXIT_PARSE, {"error": "derivative: bad strike"})
        if strike < 0:
            raise CliError(EXIT_PARSE, {"error": "derivative: negative strike"})
        builder = call_payoff if kind == "call" else put_payoff
        return builder(loaded.generated, strike)
    raise CliError(
        EXIT_PARSE,
        {
            "error": "derivative JSON must have exactly the keys "
            "{payoffs} or {kind, strike}"
        },
    )


def _measure_dict(measure) -> dict:
    return {
        "weights": [float(w) for w in measure.weights],
        "residual_inf": measure.residual_inf,
        "min_weight": measure.min_weight,
    }


def _certificate_dict(cert: ArbitrageCertificate) -> dict:
    return {
        "portfolio": [float(v) for v in cert.portfolio],
        "present_value": cert.present_value,
        "future_values": [float(v) for v in cert.future_values],
    }


def _simplex_bound(ps, derivative, sense: str) -> tuple[float, dict]:
    sol = simplex_solve(ps, derivative, sense)
    if sol.status != OPTIMAL:
        raise CliError(
            EXIT_SOLVER,
            {"error": "solver-failure", "status": sol.status, "sense": sense},
        )
    return sol.objective, sol.to_dict()


def cmd_price(args) -> int:
    loaded = _load_market(args.market)
    ps = loaded.price_system
    derivative = _load_derivative(args.derivative, loaded)
    verdict = detect_arbitrage(ps)
    if isinstance(verdict, ArbitrageCertificate):
        raise CliError(
            EXIT_INFEASIBLE,
            {"error": "arbitrage", "certificate": _certificate_dict(verdict)},
        )
    out: dict = {"method": args.method}
    if args.method == "pinv":
        try:
            price, report = pinv_price(ps, derivative)
        except NotLeastSquaresMarketError as exc:
            raise CliError(
                EXIT_PINV,
                {
                    "error": "not-least-squares-market",
                    "report": {
                        "residual": exc.report.residual,
                        "min_entry": exc.report.min_entry,
                        "gamma": exc.report.gamma,
                        "kappa": exc.report.kappa,
                        "rank": exc.report.rank,
                        "is_complete": exc.report.is_complete,
                    },
                },
            )
        out["price"] = price
        out["detail"] = {
            "gamma": report.gamma,
            "kappa": report.kappa,
            "rank": report.rank,
            "residual": report.residual,
            "min_entry": report.min_entry,
            "is_complete": report.is_complete,
        }
        print(json.dumps(out, indent=2))
        return 0
    bounds = ("min", "max") if args.bound == "both" else (args.bound,)
    detail: dict = {}
    try:
        for sense in bounds:
            if args.method == "simplex":
                price, info = _simplex_bound(ps, derivative, sense)
            else:
                result = price_absolute(
                    ps,
                    derivative,
                    sense=sense,
                    eps=args.eps,
                    seed=args.seed,
                    t_max=_CLI_T_MAX,
                    sample_max=_CLI_SAMPLE_MAX,
                    check_arbitrage=False,
                )
                price, info = result.price, result.to_dict()
            out[sense] = price
            detail[sense] = info
    except (
        IterationLimitError,
        InternalInconsistencyError,
        SingularBasisError,
        PrecisionFloorError,
    ) as exc:
        raise CliError(
            EXIT_SOLVER, {"error": "solver-failure", "detail": str(exc)}
        )
    out["detail"] = detail
    print(json.dumps(out, indent=2))
    return 0


def cmd_arbitrage(args) -> int:
    loaded = _load_market(args.market)
    verdict = detect_arbitrage(loaded.price_system)
    if isinstance(verdict, ArbitrageCertificate):
        print(
            json.dumps(
                {
                    "verdict": "arbitrage",
                    "certificate": _certificate_dict(verdict),
                },
                indent=2,
            )
        )
        return EXIT_INFEASIBLE
    print(
        json.dumps(
            {"verdict": "no-arbitrage", "measure": _measure_dict(verdict)},
            indent=2,
        )
    )
    return 0


def cmd_advantage(args) -> int:
    try:
        report = quantum_advantage_report(
            args.n, args.k, args.eps, args.rho, args.xi_l0
        )
    except ValueError as exc:
        raise CliError(EXIT_PARSE, {"error": str(exc)})
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _parse_grid(text: str, points: int | None) -> list[float]:
    """Grid syntax: "a,b,c" explicit; "lo:hi" log-spaced (20 points);
    "lo..hi" linear (11 points); --points overrides the count."""
    try:
        if "," in text:
            return [float(t) for t in text.split(",")]
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            n = points if points is not None else 11
            return [float(v) for v in np.linspace(float(lo_s), float(hi_s), n)]
        if ":" in text:
            lo_s, hi_s = text.split(":", 1)
            lo, hi = float(lo_s), float(hi_s)
            if lo <= 0 or hi <= 0:
                raise CliError(
                    EXIT_PARSE,
                    {"error": "log grid endpoints must be positive"},
                )
            n = points if points is not None else 20
            return [float(v) for v in np.geomspace(lo, hi, n)]
        return [float(text)]
    except ValueError:
        raise CliError(EXIT_PARSE, {"error": f"cannot parse grid {text!r}"})


def _parse_experiment_spec(text: str | None) -> dict:
    base = {
        "pi": 10.0,
        "mu": 1.0,
        "sigma": 1.0,
        "k0": 50,
        "strike": 10.0,
        "kind": "call",
        "half_sigma_sign": "-",
        "eta": None,
    }
    if text is None:
        return base
    try:
        data = json.loads(_read_arg(text))
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, {"error": f"spec: invalid JSON: {exc}"})
    if not isinstance(data, dict):
        raise CliError(EXIT_PARSE, {"error": "spec must be a JSON object"})
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        raise CliError(EXIT_PARSE, {"error": f"spec: unknown keys {sorted(unknown)}"})
    base.update(data)
    return base


def _experiment_point(task: dict) -> dict:
    """Evaluate one grid point; never raises, failures land in status."""
    row = {
        "scan_var": task["scan"],
        "value": task["value"],
        "eta": task["eta"],
        "solver": task["solver"],
        "lp_min": None,
        "lp_max": None,
        "analytic_discrete": None,
        "analytic_closed": None,
        "seed": task["seed"],
        "status": "optimal",
        "runtime_ms": 0.0,
    }
    started = time.perf_counter()
    try:
        params = task["params"]
        spec = BsmSpec(
            pi=params["pi"],
            mu=params["mu"],
            sigma=params["sigma"],
            k0=params["k0"],
            half_sigma_sign=params["half_sigma_sign"],
        )
        m = build(spec)
        builder = call_payoff if params["kind"] == "call" else put_payoff
        derivative = builder(m, params["strike"])
        ref = analytic_price(m, params["kind"], params["strike"])
        row["analytic_discrete"] = ref["discrete"]
        row["analytic_closed"] = ref["closed_form"]
        if task["solver"] == "simplex":
            if task["eta"] is not None:
                interval = rn_price_interval(m, derivative, task["eta"])
                if interval.status != OPTIMAL:
                    row["status"] = interval.status
                else:
                    row["lp_min"] = interval.min_price
                    row["lp_max"] = interval.max_price
            else:
                lo = simplex_solve(m.price_system, derivative, "min")
                hi = simplex_solve(m.price_system, derivative, "max")
                if lo.status != OPTIMAL or hi.status != OPTIMAL:
                    row["status"] = (
                        lo.status if lo.status != OPTIMAL else hi.status
                    )
                else:
                    row["lp_min"] = lo.objective
                    row["lp_max"] = hi.objective
        else:
            common = dict(
                eps=task["eps"],
                seed=task["seed"],
                t_max=_CLI_T_MAX,
                sample_max=_CLI_SAMPLE_MAX,
            )
            row["lp_min"] = price_absolute(
                m.price_system, derivative, sense="min", **common
            ).price
            row["lp_max"] = price_absolute(
                m.price_system, derivative, sense="max", **common
            ).price
    except InfeasibleMarketError:
        row["status"] = "infeasible"
        row["lp_min"] = None
        row["lp_max"] = None
    except Exception as exc:  # per-point failure stays in its row
        row["status"] = "error"
        row["lp_min"] = None
        row["lp_max"] = None
        row.setdefault("note", str(exc))
    row["runtime_ms"] = (time.perf_counter() - started) * 1e3
    return row


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def cmd_experiment(args) -> int:
    params = _parse_experiment_spec(args.spec)
    if args.eta is not None:
        params["eta"] = args.eta
    if params["kind"] not in ("call", "put"):
        raise CliError(EXIT_PARSE, {"error": f"spec: unknown kind {params['kind']!r}"})
    if args.solver == "zsg" and args.scan == "eta":
        raise CliError(
            EXIT_PARSE,
            {
                "error": "the sampling solver prices the unregularized "
                "problem only; scan eta with the simplex solver"
            },
        )
    if args.solver == "zsg" and params["eta"] is not None:
        raise CliError(
            EXIT_PARSE,
            {"error": "regularization requires the simplex solver"},
        )
    grid = _parse_grid(args.grid, args.points)
    if not grid:
        raise CliError(EXIT_PARSE, {"error": "empty grid"})
    tasks = []
    for value in grid:
        point = dict(params)
        eta = params["eta"]
        if args.scan == "eta":
            eta = value
        elif args.scan == "spot":
            point["pi"] = value
        else:
            point[args.scan] = value
        tasks.append(
            {
                "scan": args.scan,
                "value": value,
                "eta": eta,
                "params": point,
                "solver": args.solver,
                "eps": args.eps,
                "seed": args.seed,
            }
        )
    env_threads = os.environ.get("MARTINPRICE_THREADS")
    if env_threads:
        try:
            max_workers = max(1, int(env_threads))
        except ValueError:
            raise CliError(
                EXIT_PARSE, {"error": f"bad MARTINPRICE_THREADS: {env_threads!r}"}
            )
    else:
        max_workers = min(8, os.cpu_count() or 1)
    max_workers = min(max_workers, len(tasks))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(_experiment_point, tasks))
    out = sys.stdout if args.out == "-" else open(
        args.out, "w", newline="", encoding="utf-8"
    )
    try:
        writer = csv.writer(out)
        writer.writerow(CSV_V1_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row["scan_var"],
                    _fmt_cell(float(row["value"])),
                    _fmt_cell(
                        float(row["eta"]) if row["eta"] is not None else None
                    ),
                    row["solver"],
                    _fmt_cell(row["lp_min"]),
                    _fmt_cell(row["lp_max"]),
                    _fmt_cell(row["analytic_discrete"]),
                    _fmt_cell(row["analytic_closed"]),
                    str(row["seed"]),
                    row["status"],
                    "%.3f" % row["runtime_ms"],
                ]
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="martinprice",
        description="Arbitrage-free derivative pricing in one-period markets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="price a derivative")
    p_price.add_argument("--market", required=True, help="market JSON or @file")
    p_price.add_argument(
        "--derivative", required=True, help="derivative JSON or @file"
    )
    p_price.add_argument(
        "--method", choices=("simplex", "zsg", "pinv"), default="simplex"
    )
    p_price.add_argument("--bound", choices=("min", "max", "both"), default="both")
    p_price.add_argument("--eps", type=float, default=0.01)
    p_price.add_argument("--seed", type=int, default=0)
    p_price.set_defaults(func=cmd_price)

    p_arb = sub.add_parser("arbitrage", help="arbitrage check")
    p_arb.add_argument("--market", required=True, help="market JSON or @file")
    p_arb.set_defaults(func=cmd_arbitrage)

    p_exp = sub.add_parser("experiment", help="parameter scan to CSV")
    p_exp.add_argument(
        "--scan",
        required=True,
        choices=("eta", "mu", "sigma", "strike", "spot"),
    )
    p_exp.add_argument(
        "--grid",
        required=True,
        help='grid: "a,b,c" | "lo:hi" (log, 20 pts) | "lo..hi" (linear, 11 pts)',
    )
    p_exp.add_argument("--points", type=int, default=None)
    p_exp.add_argument("--spec", default=None, help="base parameters JSON or @file")
    p_exp.add_argument("--solver", choices=("simplex", "zsg"), default="simplex")
    p_exp.add_argument("--eps", type=float, default=0.01)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument(
        "--eta", type=float, default=None, help="regularization for non-eta scans"
    )
    p_exp.add_argument("--out", required=True, help="CSV path or - for stdout")
    p_exp.set_defaults(func=cmd_experiment)

    p_adv = sub.add_parser("advantage", help="query-count comparison report")
    p_adv.add_argument("--n", type=int, required=True, help="risky assets")
    p_adv.add_argument("--k", type=int, required=True, help="events")
    p_adv.add_argument("--eps", type=float, required=True)
    p_adv.add_argument("--rho", type=float, required=True)
    p_adv.add_argument("--xi-l0", type=float, required=True, dest="xi_l0")
    p_adv.set_defaults(func=cmd_advantage)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps(exc.payload, indent=2))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
