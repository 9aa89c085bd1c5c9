"""Synthetic trial data generation.

Correlated standard-normal latents are drawn per patient and compared
to per-endpoint thresholds: outcome = 1 when the latent falls below the
inverse normal CDF of the target probability, which calibrates each
marginal rate exactly under the latent model.  Toxicity targets are
event probabilities; generated datasets follow the raw input convention
and pass through the usual normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InvalidScenario,
    NotPositiveSemiDefinite,
    OutOfDomain,
    ScenarioFormatError,
)
from .trial_data import TrialDataset, dataset_from_raw, raw_event_rate

_MASK64 = (1 << 64) - 1

# Rational approximation coefficients for the normal quantile
# (Acklam's algorithm), refined below with one Newton step.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425
_P_HIGH = 1.0 - _P_LOW


def _normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def inverse_normal_cdf(p: float) -> float:
    """Standard normal quantile, absolute error below 1e-9.

    Rational approximation plus one Newton correction against the
    erfc-based CDF.  The correction is skipped in the extreme denormal
    tail where exp(x^2/2) would overflow.
    """
    if not 0.0 < p < 1.0:
        raise OutOfDomain(f"inverse normal CDF needs 0 < p < 1, got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            (((( _D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= _P_HIGH:
        q = p - 0.5
        r = q * q
        x = ((((( _A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            ((((( _B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            (((( _D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if x * x < 1400.0:
        u = (_normal_cdf(x) - p) * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
        x -= u
    return x


@dataclass(frozen=True)
class ScenarioSpec:
    """Generator inputs: design shape, target rates, and latent correlation."""

    doses: tuple[int, ...]
    n_per_dose: int
    endpoint_names: tuple[str, ...]
    target_probs: tuple[tuple[float, ...], ...]  # rows = doses, cols = endpoints
    correlation: tuple[tuple[float, ...], ...]
    seed: int = 0


def validate_scenario(spec: ScenarioSpec) -> None:
    doses = list(spec.doses)
    if len(doses) < 2 or len(set(doses)) != len(doses) or any(d < 1 for d in doses):
        raise InvalidScenario(f"doses must be >= 2 distinct positive integers, got {doses}")
    if doses != sorted(doses):
        raise InvalidScenario("dose levels must be listed in increasing order")
    if spec.n_per_dose < 1:
        raise InvalidScenario("n_per_dose must be >= 1")
    names = [n.strip() for n in spec.endpoint_names]
    if any((not n) or any(ch.isspace() for ch in n) for n in names):
        raise InvalidScenario("endpoint names must be non-empty single tokens")
    if len(set(n.lower() for n in names)) != len(names):
        raise InvalidScenario(f"endpoint names {names} are not unique")
    lowered = [n.lower() for n in names]
    if "toxicity" not in lowered or "Efficacy" not in names:
        raise InvalidScenario("scenarios must include Toxicity and Efficacy endpoints")
    k = len(names)
    probs = np.asarray(spec.target_probs, dtype=float)
    if probs.shape != (len(doses), k):
        raise InvalidScenario(
            f"target_probs shape {probs.shape} does not match {len(doses)} doses x {k} endpoints"
        )
    if np.any(probs <= 0.0) or np.any(probs >= 1.0):
        raise InvalidScenario("target probabilities must lie strictly inside (0, 1)")
    corr = np.asarray(spec.correlation, dtype=float)
    _check_correlation(corr, k)


def _check_correlation(corr: np.ndarray, k: int) -> None:
    if corr.shape != (k, k):
        raise InvalidScenario(f"correlation shape {corr.shape}, expected ({k}, {k})")
    if not np.allclose(corr, corr.T, atol=1e-10):
        raise NotPositiveSemiDefinite("correlation matrix is not symmetric")
    if not np.allclose(np.diag(corr), 1.0, atol=1e-10):
        raise NotPositiveSemiDefinite("correlation matrix must have a unit diagonal")
    if np.min(np.linalg.eigvalsh(0.5 * (corr + corr.T))) < -1e-8:
        raise NotPositiveSemiDefinite("correlation matrix has a negative eigenvalue")


def _factor(corr: np.ndarray) -> np.ndarray:
    """L with L @ L.T = corr; Cholesky, or eigen square root when singular."""
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(0.5 * (corr + corr.T))
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_mvn(correlation, count: int, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean unit-variance draws with the given correlation."""
    corr = np.asarray(correlation, dtype=float)
    _check_correlation(corr, corr.shape[0])
    factor = _factor(corr)
    z = rng.standard_normal((count, corr.shape[0]))
    return z @ factor.T


def _dose_rng(seed: int, dose_index: int) -> np.random.Generator:
    """Philox stream for one dose arm, keyed by (seed, dose index)."""
    key = ((seed & _MASK64) << 64) | (dose_index & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_dataset(spec: ScenarioSpec) -> TrialDataset:
    """Generate a trial dataset with the scenario's marginal targets."""
    validate_scenario(spec)
    corr = np.asarray(spec.correlation, dtype=float)
    thresholds = np.array(
        [[inverse_normal_cdf(p) for p in row] for row in spec.target_probs]
    )
    rows = []
    pid = 1
    for j, dose in enumerate(spec.doses):
        latents = sample_mvn(corr, spec.n_per_dose, _dose_rng(spec.seed, j))
        outcomes = (latents < thresholds[j]).astype(int)
        for i in range(spec.n_per_dose):
            rows.append((f"P{pid:04d}", int(dose), [int(v) for v in outcomes[i]]))
            pid += 1
    return dataset_from_raw(list(spec.endpoint_names), rows)


def realized_rates(dataset: TrialDataset) -> dict[str, list[float]]:
    """Observed per-dose rates on the raw scale (toxicity as event rate)."""
    return {
        ep.name: [
            raw_event_rate(dataset, k, dose) for dose in dataset.dose_levels
        ]
        for k, ep in enumerate(dataset.endpoints)
    }


# --------------------------------------------------------------------------
# Built-in scenarios
# --------------------------------------------------------------------------

_IDENTITY3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
_ENDPOINTS3 = ("Toxicity", "Efficacy", "Tolerability")

# Columns: Toxicity event rate, Efficacy, Tolerability.  Example 1 rises
# across all endpoints; example 2 plateaus in efficacy and tolerability;
# example 3 has concave efficacy and declining tolerability.
_BUILTIN_TARGETS = {
    "example1": (
        (0.038, 0.022, 0.147),
        (0.058, 0.119, 0.206),
        (0.106, 0.343, 0.280),
        (0.232, 0.568, 0.368),
        (0.533, 0.681, 0.466),
    ),
    "example2": (
        (0.095, 0.414, 0.285),
        (0.149, 0.568, 0.653),
        (0.224, 0.618, 0.760),
        (0.323, 0.642, 0.804),
        (0.442, 0.657, 0.828),
    ),
    "example3": (
        (0.105, 0.223, 0.705),
        (0.152, 0.387, 0.607),
        (0.233, 0.470, 0.500),
        (0.374, 0.442, 0.393),
        (0.583, 0.312, 0.295),
    ),
}

BUILTIN_SCENARIOS = tuple(sorted(_BUILTIN_TARGETS))


def builtin_scenario(name: str, seed: int | None = None) -> ScenarioSpec:
    """One of the packaged demo scenarios (example1, example2, example3)."""
    key = name.strip().lower()
    if key not in _BUILTIN_TARGETS:
        raise InvalidScenario(
            f"unknown builtin scenario '{name}', expected one of {BUILTIN_SCENARIOS}"
        )
    spec = ScenarioSpec(
        doses=(1, 2, 3, 4, 5),
        n_per_dose=30,
        endpoint_names=_ENDPOINTS3,
        target_probs=_BUILTIN_TARGETS[key],
        correlation=_IDENTITY3,
        seed=int(key[-1]),
    )
    if seed is not None:
        spec = replace(spec, seed=seed)
    return spec


# --------------------------------------------------------------------------
# Scenario files: "key = value" scalars plus bracketed matrix blocks
# --------------------------------------------------------------------------

def write_scenario(spec: ScenarioSpec) -> str:
    lines = [
        "doses = " + " ".join(str(d) for d in spec.doses),
        f"n_per_dose = {spec.n_per_dose}",
        f"seed = {spec.seed}",
        "endpoints = " + " ".join(spec.endpoint_names),
        "",
        "[target_probs]",
    ]
    for row in spec.target_probs:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append("")
    lines.append("[correlation]")
    for row in spec.correlation:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append("")
    return "\n".join(lines)


def read_scenario(text: str) -> ScenarioSpec:
    scalars: dict[str, str] = {}
    matrices: dict[str, list[list[float]]] = {}
    current: str | None = None
    for line_num, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            matrices[current] = []
            continue
        if current is None:
            if "=" not in line:
                raise ScenarioFormatError(f"line {line_num}: expected 'key = value', got '{line}'")
            key, _, value = line.partition("=")
            scalars[key.strip()] = value.strip()
        else:
            try:
                matrices[current].append([float(v) for v in line.replace(",", " ").split()])
            except ValueError:
                raise ScenarioFormatError(
                    f"line {line_num}: matrix row '{line}' is not numeric"
                ) from None

    for key in ("doses", "n_per_dose", "seed", "endpoints"):
        if key not in scalars:
            raise ScenarioFormatError(f"missing scalar '{key}'")
    for key in ("target_probs", "correlation"):
        if key not in matrices or not matrices[key]:
            raise ScenarioFormatError(f"missing matrix block '[{key}]'")
    try:
        doses = tuple(int(v) for v in scalars["doses"].replace(",", " ").split())
        n_per_dose = int(scalars["n_per_dose"])
        seed = int(scalars["seed"])
    except ValueError as exc:
        raise ScenarioFormatError(f"bad scalar value: {exc}") from None
    spec = ScenarioSpec(
        doses=doses,
        n_per_dose=n_per_dose,
        endpoint_names=tuple(scalars["endpoints"].replace(",", " ").split()),
        target_probs=tuple(tuple(row) for row in matrices["target_probs"]),
        correlation=tuple(tuple(row) for row in matrices["correlation"]),
        seed=seed,
    )
    validate_scenario(spec)
    return spec
