"""Patient-level trial dataset ingestion, validation, and normalization.

Input CSVs carry one row per patient with an ID column, an integer Dose
column, and one binary column per endpoint.  Internally every outcome
column is normalized to the positive-outcome convention (1 = desirable);
the toxicity column is stored flipped (1 - raw value) and flagged so the
raw event scale stays recoverable.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDoseLevel,
    DuplicateEndpointName,
    EmptyDataset,
    IndexOutOfRange,
    MissingColumn,
    NonBinaryValue,
)

TOXICITY_NAME = "Toxicity"
ID_COLUMN = "ID"
DOSE_COLUMN = "Dose"
REQUIRED_COLUMNS = (ID_COLUMN, DOSE_COLUMN, "Toxicity", "Efficacy")


@dataclass(frozen=True)
class EndpointSpec:
    """One binary endpoint, in positive-outcome convention.

    ``positive_is_event`` is False for the toxicity endpoint after the
    flip: its stored 1 means "no event".
    """

    name: str
    is_toxicity: bool = False
    positive_is_event: bool = True


@dataclass(frozen=True)
class PatientRecord:
    """A single patient; outcomes are stored in positive convention."""

    id: str
    dose_level: int
    outcomes: tuple[int, ...]


@dataclass(frozen=True)
class ParseOptions:
    required_columns: tuple[str, ...] = REQUIRED_COLUMNS
    warn_on_dose_gaps: bool = True


@dataclass(frozen=True)
class TrialDataset:
    """Validated, immutable patient-level dataset.

    ``records`` hold positive-convention outcomes; endpoint order is the
    toxicity endpoint first, then the remaining columns in input order.
    Numeric views used by the estimators are cached on first access.
    """

    endpoints: tuple[EndpointSpec, ...]
    records: tuple[PatientRecord, ...]
    dose_levels: tuple[int, ...]
    per_dose_counts: tuple[int, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # -- shape ---------------------------------------------------------------

    @property
    def n_endpoints(self) -> int:
        return len(self.endpoints)

    @property
    def n_doses(self) -> int:
        return len(self.dose_levels)

    @property
    def n_total(self) -> int:
        return len(self.records)

    def endpoint_names(self) -> tuple[str, ...]:
        return tuple(ep.name for ep in self.endpoints)

    # -- numeric views -------------------------------------------------------

    def doses(self) -> np.ndarray:
        """Distinct dose levels as a float covariate vector."""
        return np.asarray(self.dose_levels, dtype=float)

    def counts(self) -> np.ndarray:
        return np.asarray(self.per_dose_counts, dtype=np.int64)

    def _dose_matrices(self) -> list[np.ndarray]:
        """Per-dose (n_j x K) outcome matrices, positive convention."""
        if "mats" not in self._cache:
            by_dose: dict[int, list[tuple[int, ...]]] = {d: [] for d in self.dose_levels}
            for rec in self.records:
                by_dose[rec.dose_level].append(rec.outcomes)
            self._cache["mats"] = [
                np.asarray(by_dose[d], dtype=np.float64) for d in self.dose_levels
            ]
        return self._cache["mats"]

    def positive_counts(self, endpoint: int) -> np.ndarray:
        """Per-dose counts of positive outcomes for one endpoint."""
        self._check_endpoint(endpoint)
        return np.asarray(
            [mat[:, endpoint].sum() for mat in self._dose_matrices()], dtype=np.int64
        )

    def empirical_rates(self, endpoint: int) -> np.ndarray:
        """Per-dose observed positive-outcome rates for one endpoint."""
        self._check_endpoint(endpoint)
        return np.asarray(
            [mat[:, endpoint].mean() for mat in self._dose_matrices()], dtype=float
        )

    def _check_endpoint(self, endpoint: int) -> None:
        if not 0 <= endpoint < self.n_endpoints:
            raise IndexOutOfRange(
                f"endpoint index {endpoint} out of range (K={self.n_endpoints})"
            )

    # -- serialization -------------------------------------------------------

    def to_csv(self) -> str:
        """Emit the dataset in the raw input convention (toxicity re-flipped)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([ID_COLUMN, DOSE_COLUMN, *self.endpoint_names()])
        for rec in self.records:
            raw = [
                1 - v if ep.is_toxicity else v
                for v, ep in zip(rec.outcomes, self.endpoints)
            ]
            writer.writerow([rec.id, rec.dose_level, *raw])
        return buf.getvalue()


def _build_dataset(
    endpoints: tuple[EndpointSpec, ...],
    records: list[PatientRecord],
    warn_on_dose_gaps: bool = True,
) -> TrialDataset:
    """Validate shape invariants and assemble the immutable dataset."""
    if not records:
        raise EmptyDataset("dataset contains no patient rows")
    levels = sorted({rec.dose_level for rec in records})
    if len(levels) < 2:
        raise BadDoseLevel(
            f"at least 2 distinct dose levels are required for dose comparison, got {levels}"
        )
    if warn_on_dose_gaps and levels != list(range(levels[0], levels[-1] + 1)):
        warnings.warn(
            f"dose levels {levels} are not contiguous; numeric gaps are honored "
            "in model covariates",
            UserWarning,
            stacklevel=3,
        )
    counts = tuple(sum(1 for r in records if r.dose_level == d) for d in levels)
    return TrialDataset(
        endpoints=endpoints,
        records=tuple(records),
        dose_levels=tuple(levels),
        per_dose_counts=counts,
    )


def dataset_from_raw(
    endpoint_names: list[str],
    rows: list[tuple[str, int, list[int]]],
    warn_on_dose_gaps: bool = True,
) -> TrialDataset:
    """Build a dataset from raw-convention rows (toxicity coded 1 = event).

    ``rows`` are (patient id, dose level, raw outcomes aligned with
    ``endpoint_names``).  The toxicity column (matched case-insensitively)
    is reordered first and flipped to the positive convention.
    """
    lowered = [n.strip() for n in endpoint_names]
    if len(set(n.lower() for n in lowered)) != len(lowered):
        raise DuplicateEndpointName(f"endpoint names {lowered} are not unique")
    if any(not n for n in lowered):
        raise DuplicateEndpointName("endpoint names must be non-empty")
    tox_idx = [i for i, n in enumerate(lowered) if n.lower() == TOXICITY_NAME.lower()]
    if not tox_idx:
        raise MissingColumn(f"required endpoint column '{TOXICITY_NAME}' is absent")
    order = tox_idx + [i for i in range(len(lowered)) if i not in tox_idx]
    endpoints = tuple(
        EndpointSpec(
            name=lowered[i],
            is_toxicity=(i == tox_idx[0]),
            positive_is_event=(i != tox_idx[0]),
        )
        for i in order
    )
    records = []
    for pid, dose, raw in rows:
        outcomes = tuple(
            1 - raw[i] if i == tox_idx[0] else raw[i] for i in order
        )
        records.append(PatientRecord(id=pid, dose_level=dose, outcomes=outcomes))
    return _build_dataset(endpoints, records, warn_on_dose_gaps)


def parse_dataset(csv_text: str, options: ParseOptions | None = None) -> TrialDataset:
    """Parse and validate a trial CSV into a normalized TrialDataset.

    The header must contain ID, Dose, Toxicity, and Efficacy; any other
    column is treated as an extra binary endpoint named by its header.
    Toxicity is matched case-insensitively and flipped internally.
    """
    opts = options or ParseOptions()
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset("CSV input is empty") from None
    header = [h.strip() for h in header]

    for required in opts.required_columns:
        if required.lower() == TOXICITY_NAME.lower():
            present = any(h.lower() == required.lower() for h in header)
        else:
            present = required in header
        if not present:
            raise MissingColumn(f"required column '{required}' is absent from header {header}")

    id_pos = header.index(ID_COLUMN)
    dose_pos = header.index(DOSE_COLUMN)
    endpoint_pos = [i for i in range(len(header)) if i not in (id_pos, dose_pos)]
    endpoint_names = [header[i] for i in endpoint_pos]

    rows: list[tuple[str, int, list[int]]] = []
    for row_num, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise NonBinaryValue(
                f"data row {row_num} has {len(row)} cells, expected {len(header)}"
            )
        dose_text = row[dose_pos].strip()
        try:
            dose = int(dose_text)
        except ValueError:
            raise BadDoseLevel(
                f"data row {row_num}: dose value '{dose_text}' is not an integer"
            ) from None
        if dose < 1:
            raise BadDoseLevel(f"data row {row_num}: dose level {dose} must be >= 1")
        outcomes = []
        for pos, name in zip(endpoint_pos, endpoint_names):
            cell = row[pos].strip()
            if cell not in ("0", "1"):
                raise NonBinaryValue(
                    f"data row {row_num}, column '{name}': value '{cell}' is not 0 or 1"
                )
            outcomes.append(int(cell))
        rows.append((row[id_pos].strip(), dose, outcomes))

    if not rows:
        raise EmptyDataset("CSV contains a header but no data rows")
    return dataset_from_raw(endpoint_names, rows, opts.warn_on_dose_gaps)


def raw_event_rate(dataset: TrialDataset, endpoint: int, dose_level: int) -> float:
    """Observed mean of the original (unflipped) outcome at one dose."""
    dataset._check_endpoint(endpoint)
    if dose_level not in dataset.dose_levels:
        raise IndexOutOfRange(
            f"dose level {dose_level} not present in {dataset.dose_levels}"
        )
    j = dataset.dose_levels.index(dose_level)
    positive = dataset.empirical_rates(endpoint)[j]
    if dataset.endpoints[endpoint].is_toxicity:
        return float(1.0 - positive)
    return float(positive)
