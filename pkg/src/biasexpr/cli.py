"""Command-line front end.

    biasexpr bias --resources demo.json --target 0
    biasexpr bias --resources demo.json --target k=2
    biasexpr expressivity --resources demo.json --weights 0.3,0.7
    biasexpr estimate --resources demo.json --target 0 --n 100 --epsilon 0.2 --trials 10000
    biasexpr figure2 --inf-bias -0.5
    biasexpr table --n 4 --k 2 --format csv
    biasexpr verify --seed 7 --out report.json

Exit codes: 0 success (all checks passed), 1 a verification check failed,
2 usage, input or I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, replace

import numpy as np

from . import bias_metrics as bm
from . import expressivity as ex
from .errors import BiasExprError
from .reporting import BOUND_CHECK_COLUMNS, bound_check, to_csv, to_json, write_atomic
from .search import (
    AlgorithmSpec,
    TargetFunction,
    enumerate_targets,
    load_resource_set,
    mix_strategies,
    per_query_success,
    resolve_strategies,
)
from .verify import VerifyConfig, figure2_rows, quick_config, verify_all

TABLE_COLUMNS = ("eps", "expected_mass_on_target", "lower_bits", "upper_bits")
FIGURE2_COLUMNS = ("p", "m", "bound")
BIAS_COLUMNS = ("target", "k", "p", "bias", "per_resource_success")


class UsageError(Exception):
    pass


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_target(spec: str, n: int) -> list[TargetFunction]:
    """``"0,2"`` names one target; ``"k=2"`` means every 2-hot target."""
    spec = spec.strip()
    if spec.startswith("k="):
        try:
            k = int(spec[2:])
        except ValueError:
            raise UsageError(f"bad target spec {spec!r}") from None
        return list(enumerate_targets(n, k))
    try:
        idx = [int(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad target spec {spec!r}") from None
    return [TargetFunction.of(n, idx)]


def _load(args):
    doc = load_resource_set(args.resources)
    weights = parse_floats(args.weights) if args.weights else None
    d = doc.distribution(weights)
    strategies = resolve_strategies(doc.resource_set, args.algorithm, args.runs, args.seed)
    return d, strategies


def cmd_bias(args) -> dict:
    d, strategies = _load(args)
    n = d.resource_set.space_size
    mix = mix_strategies(d, strategies)
    rows = []
    for t in parse_target(args.target, n):
        rows.append({
            "target": list(t.indices),
            "k": t.k,
            "p": t.p,
            "bias": bm.bias(d, strategies, t),
            "per_resource_success": {rid: per_query_success(t, s) for rid, s in strategies.items()},
        })
    out = {"omega_size": n, "weights": d.weights.tolist(), "mixture": mix.mass.tolist(), "targets": rows}
    if len(rows) == 1:
        out.update({k: rows[0][k] for k in ("bias", "p", "k", "per_resource_success")})
    else:
        k = rows[0]["k"]
        ext = bm.bias_extrema(mix, k)
        out.update({
            "k": k,
            "p": rows[0]["p"],
            "bias_sum": math.fsum(r["bias"] for r in rows),
            "sup_bias": ext.sup_bias,
            "inf_bias": ext.inf_bias,
            "theorem1_bound": ext.theorem1_bound,
        })
    return out


def cmd_expressivity(args) -> dict:
    d, strategies = _load(args)
    mix = mix_strategies(d, strategies)
    h = ex.entropy_bits(mix)
    eh = ex.expected_entropy(d, strategies)
    return {
        "omega_size": d.resource_set.space_size,
        "weights": d.weights.tolist(),
        "entropic_expressivity": h,
        "kl_to_uniform": ex.kl_to_uniform(mix),
        "expected_entropy": eh,
        "jensen_gap": h - eh,
        "tradeoff_bias_upper": ex.tradeoff_bias_upper(mix),
        "expected_expressivity_bias_upper": ex.expected_expressivity_bias_upper(d, strategies),
    }


def cmd_estimate(args) -> dict:
    d, strategies = _load(args)
    targets = parse_target(args.target, d.resource_set.space_size)
    if len(targets) != 1:
        raise UsageError("estimate needs a single target, not k=<int>")
    t = targets[0]
    res = bm.hoeffding_experiment(d, strategies, t, args.n, args.epsilon, args.trials, args.seed)
    out = asdict(res)
    out["passed"] = res.exceedance_frequency <= res.bound
    return out


def cmd_figure2(args) -> list[dict]:
    grid = parse_floats(args.p_grid) if args.p_grid else np.round(np.linspace(0.05, 0.95, 19), 10)
    return [asdict(r) for r in figure2_rows(args.inf_bias, grid)]


def cmd_table(args) -> list[dict]:
    rows = []
    for r in ex.table_of_ranges(args.n, args.k):
        rows.append({
            "eps": r.eps,
            "expected_mass_on_target": r.p_plus_eps,
            "lower_bits": r.lower,
            "upper_bits": r.upper,
        })
    return rows


def verify_config(args) -> VerifyConfig:
    cfg = quick_config() if args.quick else VerifyConfig()
    overrides = {"seed": args.seed, "workers": args.workers}
    if args.only:
        overrides["only"] = tuple(args.only)
    if args.grid_n:
        overrides["grid_n"] = tuple(int(x) for x in parse_floats(args.grid_n))
    return replace(cfg, **overrides)


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biasexpr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", help="write output here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    def resources(p, target=True):
        p.add_argument("--resources", required=True, help="JSON resource-set file")
        if target:
            p.add_argument("--target", required=True, help="comma-separated indices or k=<int>")
        p.add_argument("--weights", help="comma-separated resource weights (default: file or uniform)")
        p.add_argument("--algorithm", type=AlgorithmSpec.parse, default=AlgorithmSpec("epsilon-greedy", 0.5),
                       help="searcher for fitness resources: uniform-sampler | epsilon-greedy:<gamma>")
        p.add_argument("--runs", type=int, default=200, help="search runs per fitness resource")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bias", help="bias of a resource set on a target")
    resources(p)
    common(p)
    p.set_defaults(func=cmd_bias, columns=BIAS_COLUMNS)

    p = sub.add_parser("expressivity", help="entropic expressivity of a resource set")
    resources(p, target=False)
    common(p)
    p.set_defaults(func=cmd_expressivity, columns=None)

    p = sub.add_parser("estimate", help="sampled bias vs its concentration bound")
    resources(p)
    p.add_argument("--n", type=int, default=100, help="resources per sample")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_estimate, columns=None)

    p = sub.add_parser("figure2", help="bias upper bound as p varies")
    p.add_argument("--inf-bias", type=float, default=-0.5)
    p.add_argument("--p-grid", help="comma-separated p values in (0, 1)")
    common(p)
    p.set_defaults(func=cmd_figure2, columns=FIGURE2_COLUMNS)

    p = sub.add_parser("table", help="expressivity ranges at minimum, zero and maximum bias")
    p.add_argument("--n", type=int, required=True, help="search space size")
    p.add_argument("--k", type=int, required=True, help="target size")
    common(p)
    p.set_defaults(func=cmd_table, columns=TABLE_COLUMNS)

    p = sub.add_parser("verify", help="re-verify every result and write a report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", action="append", help="check-name glob (repeatable); bare words match substrings")
    p.add_argument("--grid-n", help="restrict search-space grids to these sizes, e.g. 4")
    p.add_argument("--quick", action="store_true", help="small sample sizes")
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=None)
    return parser


def _render(result, fmt: str, columns) -> str:
    if fmt == "json":
        return to_json(result)
    if columns is BIAS_COLUMNS:
        return to_csv(result["targets"], columns)
    if isinstance(result, list):
        return to_csv(result, columns)
    if "bound" in result:
        inputs = {k: result[k] for k in ("sample_size", "epsilon", "trials")}
        row = bound_check("hoeffding", inputs, result["exceedance_frequency"], result["bound"], result["passed"])
        return to_csv([row], BOUND_CHECK_COLUMNS)
    rows = [{"quantity": k, "value": v} for k, v in result.items() if not isinstance(v, (list, dict))]
    return to_csv(rows, ("quantity", "value"))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            report = verify_all(verify_config(args))
            text = report.to_csv() if args.format == "csv" else report.to_json()
            _emit(text, args.out)
            failed = [c.name for c in report.checks if not c.passed]
            print(f"{len(report.checks) - len(failed)}/{len(report.checks)} checks passed"
                  + (f"; failed: {', '.join(failed)}" if failed else ""), file=sys.stderr)
            return 0 if not failed else 1
        result = args.func(args)
        _emit(_render(result, args.format, args.columns), args.out)
        return 0
    except (BiasExprError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
