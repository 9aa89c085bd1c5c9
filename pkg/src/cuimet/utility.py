"""Weighted clinical-utility scores per dose and optimal-dose selection.

Raw endpoint importances live on a 0-to-5 scale and are normalized to
sum to one.  The weighted mean of the per-endpoint positive-outcome
probabilities (UWM) is the dose's utility score; with equal weights it
reduces to the plain mean (UM).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroWeights, DimensionMismatch, InvalidWeight

WEIGHT_MIN = 0.0
WEIGHT_MAX = 5.0
TIE_TOL = 1e-12


@dataclass(frozen=True)
class WeightScheme:
    """Raw per-endpoint importances, each within [0, 5]."""

    raw_weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "raw_weights", tuple(float(w) for w in self.raw_weights))
        for w in self.raw_weights:
            if not WEIGHT_MIN <= w <= WEIGHT_MAX:
                raise InvalidWeight(
                    f"weight {w} outside the [{WEIGHT_MIN}, {WEIGHT_MAX}] slider range"
                )


@dataclass(frozen=True)
class NormalizedWeights:
    weights: tuple[float, ...]


@dataclass(frozen=True)
class ObdSelection:
    obd: int
    ranking: tuple[int, ...]
    tie: bool


@dataclass(frozen=True)
class UtilityTable:
    """Per-dose marginals and utility scores with the selected dose."""

    dose_levels: tuple[int, ...]
    marginals: tuple[tuple[float, ...], ...]  # rows = doses, cols = endpoints
    um: tuple[float, ...]
    uwm: tuple[float, ...]
    weights: NormalizedWeights
    metric: str  # "um" | "uwm"
    ranking: tuple[int, ...]
    obd: int
    tie: bool


def normalize_weights(scheme: WeightScheme) -> NormalizedWeights:
    """Scale raw weights so they sum to one."""
    total = sum(scheme.raw_weights)
    if total <= 0:
        raise AllZeroWeights("at least one endpoint weight must be positive")
    return NormalizedWeights(weights=tuple(w / total for w in scheme.raw_weights))


def compute_um(marginals) -> np.ndarray:
    """Unweighted mean positive-outcome probability per dose."""
    m = np.asarray(marginals, dtype=float)
    return m.mean(axis=1)


def compute_uwm(marginals, weights: NormalizedWeights) -> np.ndarray:
    """Weighted mean positive-outcome probability per dose."""
    m = np.asarray(marginals, dtype=float)
    w = np.asarray(weights.weights, dtype=float)
    if m.shape[1] != w.shape[0]:
        raise DimensionMismatch(
            f"{m.shape[1]} marginal columns vs {w.shape[0]} weights"
        )
    return m @ w


def select_obd(utilities, dose_levels=None) -> ObdSelection:
    """Pick the dose with the highest utility; ties go to the lowest dose.

    Doses within TIE_TOL of the maximum count as tied.  The ranking is
    descending by utility with tied doses ordered low to high.
    """
    u = np.asarray(utilities, dtype=float)
    if dose_levels is None:
        dose_levels = tuple(range(1, len(u) + 1))
    doses = tuple(int(d) for d in dose_levels)
    if len(doses) != len(u):
        raise DimensionMismatch(f"{len(u)} utilities vs {len(doses)} dose levels")
    best = u.max()
    tied = [d for d, v in zip(doses, u) if best - v <= TIE_TOL]
    order = sorted(range(len(u)), key=lambda i: (-u[i], doses[i]))
    return ObdSelection(
        obd=min(tied),
        ranking=tuple(doses[i] for i in order),
        tie=len(tied) > 1,
    )


def build_utility_table(dose_levels, marginals, scheme: WeightScheme,
                        metric: str = "uwm") -> UtilityTable:
    """Assemble the per-dose utility summary for one weight scheme."""
    if metric not in ("um", "uwm"):
        raise DimensionMismatch(f"metric must be 'um' or 'uwm', got '{metric}'")
    weights = normalize_weights(scheme)
    m = np.asarray(marginals, dtype=float)
    um = compute_um(m)
    uwm = compute_uwm(m, weights)
    chosen = um if metric == "um" else uwm
    selection = select_obd(chosen, dose_levels)
    return UtilityTable(
        dose_levels=tuple(int(d) for d in dose_levels),
        marginals=tuple(tuple(float(v) for v in row) for row in m),
        um=tuple(float(v) for v in um),
        uwm=tuple(float(v) for v in uwm),
        weights=weights,
        metric=metric,
        ranking=selection.ranking,
        obd=selection.obd,
        tie=selection.tie,
    )
