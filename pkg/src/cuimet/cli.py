"""Command-line interface: analyze, simulate, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import (
    AnalysisRequest,
    bootstrap_table_csv,
    resolve_models,
    resolve_weights,
    run_analysis,
    utility_table_csv,
)
from .bootstrap import BootstrapConfig, FitFailurePolicy
from .errors import CuimetError, InvalidRequest
from .simulation import (
    BUILTIN_SCENARIOS,
    builtin_scenario,
    read_scenario,
    realized_rates,
    simulate_dataset,
)
from .trial_data import parse_dataset


def _parse_pairs(text: str, what: str) -> dict[str, str]:
    """Parse 'Name=value,Name=value' flag syntax."""
    result = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise InvalidRequest(f"bad {what} entry '{chunk}', expected Name=value")
        name, _, value = chunk.partition("=")
        result[name.strip()] = value.strip()
    return result


def _build_request(dataset, args) -> AnalysisRequest:
    if args.models:
        models = resolve_models(dataset, _parse_pairs(args.models, "--models"))
    else:
        models = resolve_models(dataset, {})
    if args.weights:
        if "=" in args.weights:
            weights = resolve_weights(
                dataset,
                {k: float(v) for k, v in _parse_pairs(args.weights, "--weights").items()},
            )
        else:
            weights = resolve_weights(
                dataset, [float(v) for v in args.weights.split(",")]
            )
    else:
        weights = resolve_weights(dataset, None)
    boot = None
    if args.bootstrap:
        boot = BootstrapConfig(
            replicates=args.bootstrap,
            alpha=args.alpha,
            seed=args.seed,
            fit_failure_policy=FitFailurePolicy(args.policy),
        )
    return AnalysisRequest(
        models=models,
        weights=weights,
        metric=args.metric,
        bootstrap=boot,
        curve_grid_points=args.grid_points,
    )


def cmd_analyze(args) -> int:
    csv_text = Path(args.csv_path).read_text(encoding="utf-8")
    dataset = parse_dataset(csv_text)
    report = run_analysis(dataset, _build_request(dataset, args))
    payload = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    if args.tables:
        Path(args.tables + "_utility.csv").write_text(
            utility_table_csv(report), encoding="utf-8"
        )
        if report.bootstrap is not None:
            Path(args.tables + "_bootstrap.csv").write_text(
                bootstrap_table_csv(report), encoding="utf-8"
            )
    return 0


def cmd_simulate(args) -> int:
    name = args.scenario.strip()
    if name.lower() in BUILTIN_SCENARIOS:
        spec = builtin_scenario(name, seed=args.seed)
    else:
        spec = read_scenario(Path(name).read_text(encoding="utf-8"))
        if args.seed is not None:
            from dataclasses import replace
            spec = replace(spec, seed=args.seed)
    dataset = simulate_dataset(spec)
    Path(args.out).write_text(dataset.to_csv(), encoding="utf-8")
    summary = {
        "out": args.out,
        "doses": list(dataset.dose_levels),
        "per_dose_counts": list(dataset.per_dose_counts),
        "endpoints": list(dataset.endpoint_names()),
        "realized_rates": realized_rates(dataset),
        "seed": spec.seed,
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host = os.environ.get("CUIMET_HOST", args.host)
    port = int(os.environ.get("CUIMET_PORT", args.port))
    app = create_app(persist_dir=args.data_dir)
    uvicorn.run(app, host=host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuimet",
        description="Clinical-utility dose optimization: analyze trial CSVs, "
                    "simulate datasets, or serve the JSON API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze a trial CSV")
    analyze.add_argument("csv_path", help="input CSV (ID, Dose, Toxicity, Efficacy, ...)")
    analyze.add_argument("--models", default="",
                         help="per-endpoint models, e.g. Toxicity=exponential,"
                              "Efficacy=logit_quadratic:mono (default: empirical)")
    analyze.add_argument("--weights", default="",
                         help="raw weights 0-5: '0.2,0.5,0.3' in endpoint order "
                              "or 'Efficacy=2.5,...' (default: 1 each)")
    analyze.add_argument("--metric", choices=("um", "uwm"), default="uwm")
    analyze.add_argument("--bootstrap", type=int, default=0, metavar="B",
                         help="bootstrap replicates (0 = off)")
    analyze.add_argument("--seed", type=int, default=0)
    analyze.add_argument("--alpha", type=float, default=0.05)
    analyze.add_argument("--policy", default="fallback_empirical",
                         choices=[p.value for p in FitFailurePolicy])
    analyze.add_argument("--grid-points", type=int, default=100)
    analyze.add_argument("--out", default="", help="write the JSON report here")
    analyze.add_argument("--tables", default="",
                         help="prefix for CSV table exports")
    analyze.set_defaults(func=cmd_analyze)

    simulate = sub.add_parser("simulate", help="generate a synthetic trial CSV")
    simulate.add_argument("scenario",
                          help=f"builtin name ({', '.join(BUILTIN_SCENARIOS)}) "
                               "or a scenario file path")
    simulate.add_argument("--out", required=True, help="output CSV path")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.set_defaults(func=cmd_simulate)

    serve = sub.add_parser("serve", help="run the JSON service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--data-dir", default=None,
                       help="optional directory for persisted uploads")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CuimetError as exc:
        print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
