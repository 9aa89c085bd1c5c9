"""JSON service exposing upload, analyze, and simulate endpoints.

Uploaded datasets are stored in memory keyed by content hash, with
optional directory persistence; analyses are pure functions of the
request body, so identical requests return identical responses.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .analysis import (
    AnalysisRequest,
    report_to_dict,
    resolve_models,
    resolve_weights,
    run_analysis,
)
from .bootstrap import BootstrapConfig, FitFailurePolicy
from .errors import CuimetError, InvalidRequest, UnknownDataset
from .simulation import (
    BUILTIN_SCENARIOS,
    builtin_scenario,
    read_scenario,
    realized_rates,
    simulate_dataset,
)
from .trial_data import TrialDataset, parse_dataset

DEFAULT_MAX_UPLOAD_BYTES = 5_000_000


class DatasetStore:
    """Content-addressed dataset store, in memory with optional spill dir."""

    def __init__(self, persist_dir: str | None = None):
        self._data: dict[str, tuple[str, TrialDataset]] = {}
        self._dir = Path(persist_dir) if persist_dir else None
        if self._dir:
            self._dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def content_id(csv_text: str) -> str:
        return hashlib.sha256(csv_text.encode("utf-8")).hexdigest()

    def put(self, csv_text: str) -> tuple[str, TrialDataset]:
        dataset_id = self.content_id(csv_text)
        if dataset_id not in self._data:
            dataset = parse_dataset(csv_text)
            self._data[dataset_id] = (csv_text, dataset)
            if self._dir:
                (self._dir / f"{dataset_id}.csv").write_text(csv_text, encoding="utf-8")
        return dataset_id, self._data[dataset_id][1]

    def get(self, dataset_id: str) -> TrialDataset:
        if dataset_id in self._data:
            return self._data[dataset_id][1]
        if self._dir:
            path = self._dir / f"{dataset_id}.csv"
            if path.exists():
                csv_text = path.read_text(encoding="utf-8")
                dataset = parse_dataset(csv_text)
                self._data[dataset_id] = (csv_text, dataset)
                return dataset
        raise UnknownDataset(f"no dataset with id '{dataset_id}'")


class BootstrapBody(BaseModel):
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    policy: str = "fallback_empirical"


class AnalyzeBody(BaseModel):
    dataset_id: str | None = None
    csv: str | None = None
    models: dict[str, str] = Field(default_factory=dict)
    weights: dict[str, float] | list[float] | None = None
    metric: str = "uwm"
    bootstrap: BootstrapBody | None = None
    curve_grid_points: int = 100


class SimulateBody(BaseModel):
    builtin: str | None = None
    scenario: str | None = None
    seed: int | None = None


def _error_response(exc: CuimetError, status: int) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": exc.to_dict()})


def create_app(max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
               persist_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="cuimet", version="0.1.0")
    store = DatasetStore(persist_dir)

    @app.exception_handler(CuimetError)
    async def handle_domain_error(_request, exc: CuimetError):
        status = 404 if isinstance(exc, UnknownDataset) else 400
        return _error_response(exc, status)

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/datasets")
    async def upload_dataset(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = next((v for v in form.values() if hasattr(v, "read")), None)
            if upload is None:
                raise InvalidRequest("multipart upload must contain a file field")
            body = await upload.read()
        else:
            body = await request.body()
        if len(body) > max_upload_bytes:
            return JSONResponse(
                status_code=413,
                content={"error": {
                    "code": "app-interface/UploadTooLarge",
                    "message": f"upload exceeds {max_upload_bytes} bytes",
                }},
            )
        csv_text = body.decode("utf-8")
        dataset_id, dataset = store.put(csv_text)
        return {
            "dataset_id": dataset_id,
            "endpoints": [
                {"name": ep.name, "is_toxicity": ep.is_toxicity}
                for ep in dataset.endpoints
            ],
            "dose_levels": list(dataset.dose_levels),
            "per_dose_counts": list(dataset.per_dose_counts),
            "n_total": dataset.n_total,
        }

    @app.post("/analyze")
    async def analyze(body: AnalyzeBody):
        if body.csv is not None:
            _, dataset = store.put(body.csv)
        elif body.dataset_id is not None:
            dataset = store.get(body.dataset_id)
        else:
            raise InvalidRequest("provide either 'dataset_id' or inline 'csv'")
        boot = None
        if body.bootstrap is not None:
            boot = BootstrapConfig(
                replicates=body.bootstrap.replicates,
                alpha=body.bootstrap.alpha,
                seed=body.bootstrap.seed,
                fit_failure_policy=FitFailurePolicy(body.bootstrap.policy),
            )
        request = AnalysisRequest(
            models=resolve_models(dataset, body.models),
            weights=resolve_weights(dataset, body.weights),
            metric=body.metric,
            bootstrap=boot,
            curve_grid_points=body.curve_grid_points,
        )
        report = run_analysis(dataset, request)
        return report_to_dict(report)

    @app.post("/simulate")
    async def simulate(body: SimulateBody):
        if body.builtin is not None:
            spec = builtin_scenario(body.builtin, seed=body.seed)
        elif body.scenario is not None:
            spec = read_scenario(body.scenario)
            if body.seed is not None:
                from dataclasses import replace
                spec = replace(spec, seed=body.seed)
        else:
            raise InvalidRequest(
                f"provide 'builtin' ({', '.join(BUILTIN_SCENARIOS)}) or 'scenario' text"
            )
        dataset = simulate_dataset(spec)
        return {
            "csv": dataset.to_csv(),
            "dose_levels": list(dataset.dose_levels),
            "per_dose_counts": list(dataset.per_dose_counts),
            "endpoints": list(dataset.endpoint_names()),
            "realized_rates": realized_rates(dataset),
            "seed": spec.seed,
        }

    return app
