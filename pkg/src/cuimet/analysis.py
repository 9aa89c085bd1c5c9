"""Analysis pipeline shared by the CLI and the JSON service.

``run_analysis`` fits every endpoint, builds the utility table, runs the
optional bootstrap, and assembles plot-ready series (empirical points,
model curves on a dose grid, UM/UWM lines, CI ribbons).  Reports
serialize to a deterministic JSON-able dict; CSV exports mirror the
usual per-dose summary layouts.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import BootstrapConfig, BootstrapResult, run_bootstrap
from .errors import InvalidRequest
from .estimation import (
    DEFAULT_FIT_CONFIG,
    FitConfig,
    MarginalFit,
    ModelKind,
    ModelVariant,
    fit_endpoint,
    predict_curve,
)
from .trial_data import TrialDataset, raw_event_rate
from .utility import UtilityTable, WeightScheme, build_utility_table


@dataclass(frozen=True)
class AnalysisRequest:
    """Inputs for one analysis: models, weights, metric, optional bootstrap."""

    models: tuple[ModelKind, ...]
    weights: WeightScheme
    metric: str = "uwm"
    bootstrap: BootstrapConfig | None = None
    curve_grid_points: int = 100
    fit_config: FitConfig = DEFAULT_FIT_CONFIG

    def __post_init__(self):
        if self.metric not in ("um", "uwm"):
            raise InvalidRequest(f"metric must be 'um' or 'uwm', got '{self.metric}'")
        if self.curve_grid_points < 2:
            raise InvalidRequest("curve_grid_points must be >= 2")


@dataclass(frozen=True)
class EndpointReport:
    name: str
    is_toxicity: bool
    model: ModelKind
    fit: MarginalFit
    raw_event_rates: tuple[float, ...]
    empirical_rates: tuple[float, ...]
    curve_doses: tuple[float, ...] | None
    curve_probs: tuple[float, ...] | None


@dataclass(frozen=True)
class AnalysisReport:
    dose_levels: tuple[int, ...]
    endpoints: tuple[EndpointReport, ...]
    utility: UtilityTable
    bootstrap: BootstrapResult | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return report_to_dict(self)


def default_models(dataset: TrialDataset) -> tuple[ModelKind, ...]:
    return tuple(ModelKind(ModelVariant.EMPIRICAL) for _ in dataset.endpoints)


def default_weights(dataset: TrialDataset) -> WeightScheme:
    return WeightScheme(raw_weights=tuple(1.0 for _ in dataset.endpoints))


def resolve_models(dataset: TrialDataset, by_name: dict[str, str]) -> tuple[ModelKind, ...]:
    """Map endpoint-name -> model-string settings onto the dataset order.

    Endpoints not mentioned default to the empirical estimator.
    """
    names = {ep.name: k for k, ep in enumerate(dataset.endpoints)}
    kinds = list(default_models(dataset))
    for name, text in by_name.items():
        if name not in names:
            raise InvalidRequest(
                f"unknown endpoint '{name}'; dataset has {sorted(names)}"
            )
        kinds[names[name]] = ModelKind.from_string(text)
    return tuple(kinds)


def resolve_weights(dataset: TrialDataset, weights) -> WeightScheme:
    """Accept a positional list or an endpoint-name mapping of raw weights."""
    if weights is None:
        return default_weights(dataset)
    if isinstance(weights, dict):
        names = {ep.name: k for k, ep in enumerate(dataset.endpoints)}
        raw = [1.0] * dataset.n_endpoints
        for name, value in weights.items():
            if name not in names:
                raise InvalidRequest(
                    f"unknown endpoint '{name}'; dataset has {sorted(names)}"
                )
            raw[names[name]] = float(value)
        return WeightScheme(raw_weights=tuple(raw))
    raw = tuple(float(v) for v in weights)
    if len(raw) != dataset.n_endpoints:
        raise InvalidRequest(
            f"{len(raw)} weights for {dataset.n_endpoints} endpoints"
        )
    return WeightScheme(raw_weights=raw)


def run_analysis(dataset: TrialDataset, request: AnalysisRequest) -> AnalysisReport:
    """Fit, score, select, and (optionally) bootstrap one dataset."""
    if len(request.models) != dataset.n_endpoints:
        raise InvalidRequest(
            f"{len(request.models)} models for {dataset.n_endpoints} endpoints"
        )
    doses = dataset.doses()
    grid = np.linspace(doses.min(), doses.max(), request.curve_grid_points)

    endpoint_reports = []
    marginals = np.empty((dataset.n_doses, dataset.n_endpoints))
    for k, ep in enumerate(dataset.endpoints):
        fit = fit_endpoint(dataset, k, request.models[k], request.fit_config)
        marginals[:, k] = fit.fitted_probs
        if fit.model.variant is ModelVariant.EMPIRICAL:
            curve_doses = curve_probs = None
        else:
            curve_doses = tuple(float(d) for d in grid)
            curve_probs = predict_curve(fit, grid)
        endpoint_reports.append(
            EndpointReport(
                name=ep.name,
                is_toxicity=ep.is_toxicity,
                model=request.models[k],
                fit=fit,
                raw_event_rates=tuple(
                    raw_event_rate(dataset, k, d) for d in dataset.dose_levels
                ),
                empirical_rates=tuple(float(v) for v in dataset.empirical_rates(k)),
                curve_doses=curve_doses,
                curve_probs=curve_probs,
            )
        )

    utility = build_utility_table(
        dataset.dose_levels, marginals, request.weights, request.metric
    )
    boot = None
    if request.bootstrap is not None:
        boot = run_bootstrap(
            dataset, list(request.models), request.weights, request.bootstrap,
            request.fit_config,
        )
    return AnalysisReport(
        dose_levels=dataset.dose_levels,
        endpoints=tuple(endpoint_reports),
        utility=utility,
        bootstrap=boot,
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def _bootstrap_to_dict(boot: BootstrapResult) -> dict:
    return {
        "dose_levels": list(boot.dose_levels),
        "um_ci": [list(ci) for ci in boot.um_ci],
        "uwm_ci": [list(ci) for ci in boot.uwm_ci],
        "pct_obd_um": list(boot.pct_obd_um),
        "pct_obd_uwm": list(boot.pct_obd_uwm),
        "fallback_count": boot.fallback_count,
        "excluded_count": boot.excluded_count,
        "n_replicates": boot.n_replicates,
        "n_included": boot.n_included,
    }


def report_to_dict(report: AnalysisReport) -> dict:
    """Deterministic JSON-able representation of a full report."""
    doses = list(report.dose_levels)
    endpoints = []
    for ep in report.endpoints:
        entry = {
            "name": ep.name,
            "is_toxicity": ep.is_toxicity,
            "model": ep.model.to_string(),
            "converged": ep.fit.converged,
            "fallback_used": ep.fit.fallback_used,
            "params": {k: float(v) for k, v in ep.fit.params.items()},
            "marginals": list(ep.fit.fitted_probs),
            "raw_event_rates": list(ep.raw_event_rates),
            "empirical_rates": list(ep.empirical_rates),
        }
        if ep.is_toxicity:
            entry["event_probs"] = [1.0 - p for p in ep.fit.fitted_probs]
        endpoints.append(entry)

    u = report.utility
    result = {
        "dose_levels": doses,
        "endpoints": endpoints,
        "utility": {
            "marginals": [list(row) for row in u.marginals],
            "um": list(u.um),
            "uwm": list(u.uwm),
            "weights": list(u.weights.weights),
            "metric": u.metric,
            "ranking": list(u.ranking),
            "obd": u.obd,
            "tie": u.tie,
        },
        "plot": _plot_series(report),
        "bootstrap": _bootstrap_to_dict(report.bootstrap) if report.bootstrap else None,
    }
    return result


def _plot_series(report: AnalysisReport) -> dict:
    series = {
        "endpoints": [
            {
                "name": ep.name,
                "points": {"doses": list(report.dose_levels),
                           "probs": list(ep.empirical_rates)},
                "curve": None if ep.curve_doses is None else {
                    "doses": list(ep.curve_doses),
                    "probs": list(ep.curve_probs),
                },
            }
            for ep in report.endpoints
        ],
        "um_line": {"doses": list(report.dose_levels), "values": list(report.utility.um)},
        "uwm_line": {"doses": list(report.dose_levels), "values": list(report.utility.uwm)},
    }
    if report.bootstrap is not None:
        series["um_ribbon"] = {
            "doses": list(report.dose_levels),
            "lower": [ci[0] for ci in report.bootstrap.um_ci],
            "upper": [ci[1] for ci in report.bootstrap.um_ci],
        }
        series["uwm_ribbon"] = {
            "doses": list(report.dose_levels),
            "lower": [ci[0] for ci in report.bootstrap.uwm_ci],
            "upper": [ci[1] for ci in report.bootstrap.uwm_ci],
        }
    return series


def utility_table_csv(report: AnalysisReport) -> str:
    """Per-dose marginal and utility summary, one row per dose."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["Dose"]
    for ep in report.endpoints:
        if ep.is_toxicity:
            header += [f"P({ep.name}=1)", f"1-P({ep.name}=1)"]
        else:
            header.append(f"P({ep.name}=1)")
    header += ["UM", "UWM"]
    writer.writerow(header)
    for j, dose in enumerate(report.dose_levels):
        row = [dose]
        for ep in report.endpoints:
            p = ep.fit.fitted_probs[j]
            if ep.is_toxicity:
                row += [f"{1.0 - p:.6f}", f"{p:.6f}"]
            else:
                row.append(f"{p:.6f}")
        row += [f"{report.utility.um[j]:.6f}", f"{report.utility.uwm[j]:.6f}"]
        writer.writerow(row)
    return buf.getvalue()


def bootstrap_table_csv(report: AnalysisReport) -> str:
    """Bootstrap CI and %OBD summary, one row per dose."""
    if report.bootstrap is None:
        raise InvalidRequest("report has no bootstrap block")
    boot = report.bootstrap
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([
        "Dose", "UM", "UM CI low", "UM CI high", "%OBD (UM)",
        "UWM", "UWM CI low", "UWM CI high", "%OBD (UWM)",
    ])
    for j, dose in enumerate(report.dose_levels):
        writer.writerow([
            dose,
            f"{report.utility.um[j]:.6f}",
            f"{boot.um_ci[j][0]:.6f}", f"{boot.um_ci[j][1]:.6f}",
            f"{boot.pct_obd_um[j]:.2f}",
            f"{report.utility.uwm[j]:.6f}",
            f"{boot.uwm_ci[j][0]:.6f}", f"{boot.uwm_ci[j][1]:.6f}",
            f"{boot.pct_obd_uwm[j]:.2f}",
        ])
    return buf.getvalue()
