"""Dataset ingestion, validation, and normalization."""

import numpy as np
import pytest

from cuimet import parse_dataset, raw_event_rate
from cuimet.errors import (
    BadDoseLevel,
    DuplicateEndpointName,
    EmptyDataset,
    IndexOutOfRange,
    MissingColumn,
    NonBinaryValue,
)

from conftest import make_outcome_dataset


def build_csv(n_doses=5, per_dose=30, extra=("Tolerability",)):
    header = ["ID", "Dose", "Toxicity", "Efficacy", *extra]
    lines = [",".join(header)]
    i = 0
    for dose in range(1, n_doses + 1):
        for _ in range(per_dose):
            outcomes = [(i + k) % 2 for k in range(2 + len(extra))]
            lines.append(",".join([f"p{i}", str(dose), *map(str, outcomes)]))
            i += 1
    return "\n".join(lines) + "\n"


class TestParsing:
    def test_shape_five_doses_three_endpoints(self):
        ds = parse_dataset(build_csv())
        assert ds.n_doses == 5
        assert ds.n_endpoints == 3
        assert ds.per_dose_counts == (30,) * 5
        assert ds.n_total == 150
        assert ds.dose_levels == (1, 2, 3, 4, 5)

    def test_single_dose_rejected(self):
        csv_text = "ID,Dose,Toxicity,Efficacy\np1,1,0,1\n"
        with pytest.raises(BadDoseLevel):
            parse_dataset(csv_text)

    def test_non_binary_cell_names_row_and_column(self):
        csv_text = "ID,Dose,Toxicity,Efficacy\np1,1,0,1\np2,2,0,2\n"
        with pytest.raises(NonBinaryValue, match=r"row 2.*Efficacy"):
            parse_dataset(csv_text)

    def test_missing_required_column(self):
        csv_text = "ID,Dose,Toxicity\np1,1,0\np2,2,1\n"
        with pytest.raises(MissingColumn, match="Efficacy"):
            parse_dataset(csv_text)

    def test_empty_inputs(self):
        with pytest.raises(EmptyDataset):
            parse_dataset("")
        with pytest.raises(EmptyDataset):
            parse_dataset("ID,Dose,Toxicity,Efficacy\n")

    def test_duplicate_endpoint_names(self):
        csv_text = "ID,Dose,Toxicity,Efficacy,Efficacy\np1,1,0,1,0\np2,2,0,1,1\n"
        with pytest.raises(DuplicateEndpointName):
            parse_dataset(csv_text)

    def test_bad_dose_values(self):
        with pytest.raises(BadDoseLevel, match="not an integer"):
            parse_dataset("ID,Dose,Toxicity,Efficacy\np1,1.5,0,1\np2,2,0,1\n")
        with pytest.raises(BadDoseLevel, match=">= 1"):
            parse_dataset("ID,Dose,Toxicity,Efficacy\np1,0,0,1\np2,2,0,1\n")

    def test_missing_cell_rejected(self):
        csv_text = "ID,Dose,Toxicity,Efficacy\np1,1,0,\np2,2,0,1\n"
        with pytest.raises(NonBinaryValue):
            parse_dataset(csv_text)

    def test_dose_gap_warns_but_keeps_numeric_value(self):
        csv_text = "ID,Dose,Toxicity,Efficacy\np1,1,0,1\np2,2,0,0\np3,4,1,1\n"
        with pytest.warns(UserWarning, match="not contiguous"):
            ds = parse_dataset(csv_text)
        assert ds.dose_levels == (1, 2, 4)
        assert list(ds.doses()) == [1.0, 2.0, 4.0]

    def test_toxicity_ordered_first_and_case_insensitive(self):
        csv_text = "ID,Dose,Efficacy,TOXICITY\np1,1,1,0\np2,2,0,1\n"
        ds = parse_dataset(csv_text)
        assert ds.endpoint_names() == ("TOXICITY", "Efficacy")
        assert ds.endpoints[0].is_toxicity
        assert not ds.endpoints[0].positive_is_event
        assert not ds.endpoints[1].is_toxicity


class TestNormalization:
    def test_toxicity_flip_complements_raw_rate(self):
        ds = parse_dataset(build_csv())
        for dose in ds.dose_levels:
            stored = ds.empirical_rates(0)[ds.dose_levels.index(dose)]
            raw = raw_event_rate(ds, 0, dose)
            assert stored + raw == pytest.approx(1.0, abs=1e-12)

    def test_non_toxicity_rates_unflipped(self):
        ds = parse_dataset(build_csv())
        for dose in ds.dose_levels:
            j = ds.dose_levels.index(dose)
            assert raw_event_rate(ds, 1, dose) == pytest.approx(
                ds.empirical_rates(1)[j]
            )

    def test_round_trip_identity(self):
        ds = parse_dataset(build_csv())
        again = parse_dataset(ds.to_csv())
        assert again == ds

    def test_round_trip_reorders_toxicity_consistently(self):
        csv_text = "ID,Dose,Efficacy,Toxicity\np1,1,1,0\np2,2,0,1\n"
        ds = parse_dataset(csv_text)
        assert parse_dataset(ds.to_csv()) == ds

    def test_per_dose_counts_match_records(self):
        ds = parse_dataset(build_csv())
        recomputed = tuple(
            sum(1 for r in ds.records if r.dose_level == d) for d in ds.dose_levels
        )
        assert recomputed == ds.per_dose_counts


class TestRawEventRate:
    def test_three_events_of_thirty(self):
        tox = [1] * 3 + [0] * 27 + [0] * 30
        eff = [0] * 60
        ds = make_outcome_dataset([1] * 30 + [2] * 30, [tox, eff])
        assert raw_event_rate(ds, 0, 1) == pytest.approx(0.1)
        assert raw_event_rate(ds, 0, 2) == 0.0

    def test_all_zero_dose_arm(self):
        ds = make_outcome_dataset([1, 1, 2, 2], [[0, 0, 0, 0], [0, 0, 1, 1]])
        assert raw_event_rate(ds, 1, 1) == 0.0

    def test_index_errors(self):
        ds = make_outcome_dataset([1, 2], [[0, 1], [1, 0]])
        with pytest.raises(IndexOutOfRange):
            raw_event_rate(ds, 5, 1)
        with pytest.raises(IndexOutOfRange):
            raw_event_rate(ds, 0, 9)
