"""Command-line front end.

    fixedbudget quantities --problem p.json
    fixedbudget bounds --problem p.json --format json
    fixedbudget simulate --problem p.json --strategy sr --budgets 200,400,800
    fixedbudget simulate --config run.json
    fixedbudget flip --problem pair.json --budgets 8,16,32 --replications 100000
    fixedbudget verify --seed 7

Exit codes: 0 success, 1 validation or usage error, 2 property failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

from .bounds import encode_floats, evaluate_bounds
from .dist_model import BanditProblem, load_problem
from .info_geometry import linf, pair_rate
from .simulation import ConfigError, ExperimentConfig, flip_prob_experiment, run_experiment
from .strategies import canonical_kind
from .verify import run_properties

EXIT_OK, EXIT_INVALID, EXIT_PROPERTY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(value) -> str:
    """Seven significant digits for table output."""
    if isinstance(value, float):
        if math.isinf(value):
            return "-inf" if value < 0 else "+inf"
        return f"{value:.7g}"
    return str(value)


def render_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(header)] + [[fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def csv_cell(value) -> str:
    """Full precision for finite floats, "-inf"/"+inf" otherwise."""
    if isinstance(value, float):
        return fmt(value) if math.isinf(value) else repr(value)
    return str(value)


def dump_json(data) -> str:
    return json.dumps(encode_floats(data), indent=2, sort_keys=True) + "\n"


def _parse_budgets(text: Optional[str]) -> list[int]:
    if not text:
        return []
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"--budgets must be a comma-separated list of integers, got {text!r}") from None
    return values


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BAI_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"BAI_SEED must be an integer, got {env!r}") from None


def _problem(args) -> BanditProblem:
    if not args.problem:
        raise ValueError("--problem is required")
    return load_problem(args.problem)


def quantities(problem: BanditProblem) -> dict:
    """Means, gaps, constrained infima against the best arm, and pair rates."""
    best = problem.best_arm
    best_arm = problem.arms[best]
    rows = []
    for a, arm in enumerate(problem.arms):
        row = {"arm": a, "mean": arm.mean, "gap": problem.gaps[a]}
        if a != best:
            row["linf_best_below_mean"] = linf(best_arm, arm.mean, "below", False).value
            row["linf_arm_above_best"] = linf(arm, best_arm.mean, "above", False).value
            if arm.mean < best_arm.mean:
                row["pair_rate_vs_best"] = pair_rate(arm, best_arm).value
            else:
                row["pair_rate_vs_best"] = 0.0
        rows.append(row)
    return {"best_arm": best, "generic": problem.generic, "model": problem.model, "arms": rows}


def _cmd_quantities(args) -> str:
    data = quantities(_problem(args))
    if args.format == "json":
        return dump_json(data)
    cols = ["arm", "mean", "gap", "linf_best_below_mean", "linf_arm_above_best", "pair_rate_vs_best"]
    rows = [[r.get(c, "-") for c in cols] for r in data["arms"]]
    if args.format == "csv":
        return "".join(",".join(csv_cell(v) for v in r) + "\n" for r in [cols] + rows)
    return f"best arm: {data['best_arm']}  generic: {data['generic']}\n" + render_table(cols, rows)


def _cmd_bounds(args) -> str:
    budgets = _parse_budgets(args.budgets)
    report = evaluate_bounds(_problem(args), T=max(budgets) if budgets else None)
    if args.format == "json":
        return report.to_json() + "\n"
    rows = [["upper", k, v] for k, v in sorted(report.upper.items())]
    rows += [["lower", k, v] for k, v in sorted(report.lower.items())]
    if args.format == "csv":
        return "".join(",".join(csv_cell(v) for v in r) + "\n" for r in [["side", "name", "value"]] + rows)
    text = render_table(["side", "bound", "value"], rows)
    for name, note in sorted(report.caveats.items()):
        text += f"note [{name}]: {note}\n"
    return text


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        config = ExperimentConfig.from_json(text, os.path.dirname(os.path.abspath(args.config)))
        if args.seed is not None:
            config.seed = args.seed
    else:
        data = {
            "problem": os.path.abspath(args.problem) if args.problem else None,
            "strategy": args.strategy,
            "budgets": _parse_budgets(args.budgets),
            "replications": args.replications,
            "seed": _seed(args),
        }
        if data["problem"] is None:
            raise ConfigError("--problem or --config is required")
        config = ExperimentConfig.from_dict(data)
    config.workers = args.workers
    return config


def _cmd_simulate(args) -> str:
    report = run_experiment(_experiment_config(args))
    if args.format == "json":
        return report.to_json() + "\n"
    if args.format == "csv":
        return report.to_csv()
    rows = [[t, p, s, report.replications] for t, p, s in zip(report.budgets, report.p_hat, report.stderr)]
    text = render_table(["T", "p_hat", "stderr", "R"], rows)
    if report.slope is not None:
        text += f"slope {fmt(report.slope)} +/- {fmt(report.half_width)} (tol_stat {fmt(report.tol_stat)})\n"
    for key, verdict in sorted(report.verdicts.items()):
        text += f"{key}: {verdict}\n"
    for note in report.notes:
        text += f"note: {note}\n"
    return text


def _cmd_flip(args) -> str:
    problem = _problem(args)
    if problem.K != 2:
        raise ValueError("flip needs a problem with exactly two arms")
    worse, better = sorted(problem.arms, key=lambda d: d.mean)
    n_grid = _parse_budgets(args.budgets)
    if not n_grid:
        raise ValueError("--budgets (the N grid) must be non-empty")
    rep = flip_prob_experiment(worse, better, n_grid, args.replications, _seed(args), args.workers)
    data = {k: getattr(rep, k) for k in rep.__dataclass_fields__}
    if args.format == "json":
        return dump_json(data)
    rows = [[n, p, s, r] for n, p, s, r in zip(rep.n_grid, rep.p_hat, rep.stderr, rep.log_rate)]
    if args.format == "csv":
        return "N,p_hat,stderr,log_p_over_N\n" + "".join(
            ",".join(csv_cell(v) for v in row) + "\n" for row in rows)
    text = render_table(["N", "p_hat", "stderr", "ln(p)/N"], rows)
    text += f"-pair_rate {fmt(-rep.pair_rate)}\n"
    if rep.slope is not None:
        text += f"slope {fmt(rep.slope)} +/- {fmt(rep.half_width)}\n"
    if rep.note:
        text += f"note: {rep.note}\n"
    return text


def _cmd_verify(args) -> tuple[str, bool]:
    results = run_properties(_seed(args))
    ok = all(r.passed for r in results)
    if args.format == "json":
        return dump_json([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]), ok
    text = "".join(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}\n" for r in results)
    return text, ok


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fixedbudget", description="Fixed-budget best-arm identification toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, table_default="table"):
        p.add_argument("--problem", help="problem JSON file")
        p.add_argument("--format", choices=["json", "csv", "table"], default=table_default)
        p.add_argument("--seed", type=int, default=None, help="master seed (falls back to $BAI_SEED)")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    common(sub.add_parser("quantities", help="means, gaps, constrained infima, pair rates"))
    b = common(sub.add_parser("bounds", help="all applicable rate bounds"))
    b.add_argument("--budgets", help="budget list; the largest sets T for finite-T bounds")
    for name, help_text in (("simulate", "Monte Carlo error estimates and verdicts"),
                            ("flip", "flip probability of two sample means")):
        p = common(sub.add_parser(name, help=help_text))
        p.add_argument("--strategy", default="sr")
        p.add_argument("--budgets", help="comma-separated budgets (sample sizes for flip)")
        p.add_argument("--replications", type=int, default=10000)
        p.add_argument("--workers", type=int, default=1)
        if name == "simulate":
            p.add_argument("--config", help="experiment config JSON")
    common(sub.add_parser("verify", help="run the seeded property suite"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID

    code = EXIT_OK
    try:
        if getattr(args, "strategy", None):
            canonical_kind(args.strategy)
        if getattr(args, "workers", 1) < 1:
            raise ValueError("--workers must be >= 1")
        if args.command == "verify":
            text, ok = _cmd_verify(args)
            code = EXIT_OK if ok else EXIT_PROPERTY
        else:
            handler = {"quantities": _cmd_quantities, "bounds": _cmd_bounds,
                       "simulate": _cmd_simulate, "flip": _cmd_flip}[args.command]
            text = handler(args)
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID

    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
