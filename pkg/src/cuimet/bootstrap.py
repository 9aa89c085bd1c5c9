"""Stratified bootstrap for utility-score uncertainty and dose-selection
robustness.

Replicates resample patients with replacement within each dose arm, so
the per-arm sample sizes never change.  Replicate r draws from its own
Philox4x64 counter-based generator keyed by (seed, r); results are a
pure function of (dataset, models, weights, config) regardless of how
replicates are scheduled.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllReplicatesExcluded,
    BaselineFitFailed,
    CuimetError,
    DimensionMismatch,
    EmptySampleList,
    InvalidBootstrapConfig,
)
from .estimation import FitConfig, DEFAULT_FIT_CONFIG, ModelKind, fit_endpoint
from .trial_data import TrialDataset
from .utility import NormalizedWeights, WeightScheme, TIE_TOL, normalize_weights

_MASK64 = (1 << 64) - 1


class FitFailurePolicy(enum.Enum):
    FALLBACK_EMPIRICAL = "fallback_empirical"
    EXCLUDE_REPLICATE = "exclude_replicate"


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    fit_failure_policy: FitFailurePolicy = FitFailurePolicy.FALLBACK_EMPIRICAL

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidBootstrapConfig("replicates must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidBootstrapConfig("alpha must lie strictly between 0 and 1")
        if self.seed < 0:
            raise InvalidBootstrapConfig("seed must be a non-negative integer")


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile CIs per dose plus how often each dose won each metric."""

    dose_levels: tuple[int, ...]
    um_ci: tuple[tuple[float, float], ...]
    uwm_ci: tuple[tuple[float, float], ...]
    pct_obd_um: tuple[float, ...]
    pct_obd_uwm: tuple[float, ...]
    fallback_count: int
    excluded_count: int
    n_replicates: int
    n_included: int


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for one replicate: Philox keyed by (seed, replicate index).

    The key layout makes every replicate's stream independent of the
    total replicate count, so enlarging B extends rather than reshuffles
    the sequence.
    """
    key = ((seed & _MASK64) << 64) | (index & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def _resample_indices(counts, rng: np.random.Generator) -> list[np.ndarray]:
    """Within-arm resampling indices, one block per dose in dose order."""
    return [rng.integers(0, int(n), size=int(n)) for n in counts]


def resample_stratified(dataset: TrialDataset, rng: np.random.Generator) -> TrialDataset:
    """Resample patients with replacement within each dose level."""
    groups: dict[int, list] = {d: [] for d in dataset.dose_levels}
    for rec in dataset.records:
        groups[rec.dose_level].append(rec)
    records = []
    for dose, idx in zip(dataset.dose_levels, _resample_indices(dataset.per_dose_counts, rng)):
        arm = groups[dose]
        records.extend(arm[i] for i in idx)
    return TrialDataset(
        endpoints=dataset.endpoints,
        records=tuple(records),
        dose_levels=dataset.dose_levels,
        per_dose_counts=dataset.per_dose_counts,
    )


def percentile_ci(samples, alpha: float) -> tuple[float, float]:
    """Equal-tailed percentile interval (type-7 linear interpolation)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptySampleList("cannot form a percentile interval from no samples")
    if not 0.0 < alpha < 1.0:
        raise InvalidBootstrapConfig("alpha must lie strictly between 0 and 1")
    lo, hi = np.quantile(x, [alpha / 2.0, 1.0 - alpha / 2.0], method="linear")
    return float(lo), float(hi)


class _ResampledView:
    """Aggregate view of a resampled dataset, per-dose sums only.

    Every estimator consumes per-dose sufficient statistics, so replicate
    refits never materialize patient records.
    """

    def __init__(self, endpoints, dose_levels, y_matrix, counts):
        self.endpoints = endpoints
        self.dose_levels = dose_levels
        self._y = y_matrix
        self._n = counts

    def doses(self) -> np.ndarray:
        return np.asarray(self.dose_levels, dtype=float)

    def counts(self) -> np.ndarray:
        return self._n

    def positive_counts(self, endpoint: int) -> np.ndarray:
        return self._y[:, endpoint]

    def empirical_rates(self, endpoint: int) -> np.ndarray:
        return self._y[:, endpoint] / self._n


def _argmax_lowest(values: np.ndarray) -> int:
    """Index of the maximum; ties within TIE_TOL resolve to the first."""
    best = values.max()
    return int(np.flatnonzero(best - values <= TIE_TOL)[0])


def run_bootstrap(
    dataset: TrialDataset,
    models: list[ModelKind],
    scheme: WeightScheme,
    config: BootstrapConfig,
    fit_config: FitConfig = DEFAULT_FIT_CONFIG,
    workers: int = 1,
) -> BootstrapResult:
    """Bootstrap the utility metrics and dose selection.

    Each replicate refits every endpoint with its configured model; a
    replicate fit that raises or fails to converge is handled per the
    failure policy (empirical fallback, or dropping the replicate).
    """
    if len(models) != dataset.n_endpoints:
        raise DimensionMismatch(
            f"{len(models)} models for {dataset.n_endpoints} endpoints"
        )
    weights = normalize_weights(scheme)
    if len(weights.weights) != dataset.n_endpoints:
        raise DimensionMismatch(
            f"{len(weights.weights)} weights for {dataset.n_endpoints} endpoints"
        )

    # baseline analysis must succeed before any resampling happens
    try:
        for k in range(dataset.n_endpoints):
            fit_endpoint(dataset, k, models[k], fit_config)
    except CuimetError as exc:
        raise BaselineFitFailed(f"baseline fit failed: {exc}") from exc

    mats = dataset._dose_matrices()
    counts = dataset.counts().astype(float)
    w = np.asarray(weights.weights, dtype=float)
    n_doses = dataset.n_doses
    exclude = config.fit_failure_policy is FitFailurePolicy.EXCLUDE_REPLICATE

    def one_replicate(index: int):
        rng = replicate_rng(config.seed, index)
        idx_blocks = _resample_indices(dataset.per_dose_counts, rng)
        y = np.vstack([mats[j][idx].sum(axis=0) for j, idx in enumerate(idx_blocks)])
        view = _ResampledView(dataset.endpoints, dataset.dose_levels, y, counts)
        marginals = np.empty((n_doses, dataset.n_endpoints))
        fallbacks = 0
        for k in range(dataset.n_endpoints):
            fit = None
            try:
                fit = fit_endpoint(view, k, models[k], fit_config)
            except CuimetError:
                fit = None
            if fit is None or not fit.converged:
                if exclude:
                    return None
                marginals[:, k] = view.empirical_rates(k)
                fallbacks += 1
            else:
                marginals[:, k] = fit.fitted_probs
        um = marginals.mean(axis=1)
        uwm = marginals @ w
        return um, uwm, _argmax_lowest(um), _argmax_lowest(uwm), fallbacks

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_replicate, range(config.replicates)))
    else:
        results = [one_replicate(i) for i in range(config.replicates)]

    included = [r for r in results if r is not None]
    excluded_count = config.replicates - len(included)
    if not included:
        raise AllReplicatesExcluded(
            f"all {config.replicates} replicates were excluded by the failure policy"
        )
    um_samples = np.vstack([r[0] for r in included])
    uwm_samples = np.vstack([r[1] for r in included])
    obd_um = np.array([r[2] for r in included])
    obd_uwm = np.array([r[3] for r in included])
    fallback_count = int(sum(r[4] for r in included))

    n_inc = len(included)
    pct_um = tuple(
        100.0 * float(np.count_nonzero(obd_um == j)) / n_inc for j in range(n_doses)
    )
    pct_uwm = tuple(
        100.0 * float(np.count_nonzero(obd_uwm == j)) / n_inc for j in range(n_doses)
    )
    return BootstrapResult(
        dose_levels=dataset.dose_levels,
        um_ci=tuple(percentile_ci(um_samples[:, j], config.alpha) for j in range(n_doses)),
        uwm_ci=tuple(percentile_ci(uwm_samples[:, j], config.alpha) for j in range(n_doses)),
        pct_obd_um=pct_um,
        pct_obd_uwm=pct_uwm,
        fallback_count=fallback_count,
        excluded_count=excluded_count,
        n_replicates=config.replicates,
        n_included=n_inc,
    )
