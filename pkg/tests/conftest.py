"""Shared fixtures and dataset builders."""

from __future__ import annotations

import numpy as np
import pytest

from cuimet import builtin_scenario, dataset_from_raw, simulate_dataset


def make_counts_dataset(doses, events, totals, rng=None):
    """Dataset whose Efficacy column has the given per-dose event counts.

    The Toxicity column is all zeros (flipped to all ones internally) so
    estimation tests can target endpoint index 1 without interference.
    """
    rows = []
    pid = 0
    for dose, y, n in zip(doses, events, totals):
        order = list(range(n))
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            rows.append((f"p{pid}", int(dose), [0, 1 if i < y else 0]))
            pid += 1
    return dataset_from_raw(["Toxicity", "Efficacy"], rows)


def make_outcome_dataset(doses_per_patient, outcome_columns, names=None):
    """Dataset from explicit per-patient outcome columns (raw convention)."""
    names = names or ["Toxicity", "Efficacy"]
    rows = []
    for i, dose in enumerate(doses_per_patient):
        rows.append((f"p{i}", int(dose), [int(col[i]) for col in outcome_columns]))
    return dataset_from_raw(names, rows)


def random_binomial_dataset(rng, n_doses, n_min=15, n_max=40, p_low=0.2, p_high=0.8):
    """Random per-dose binomial dataset with no boundary cells."""
    while True:
        totals = rng.integers(n_min, n_max + 1, size=n_doses)
        probs = rng.uniform(p_low, p_high, size=n_doses)
        events = rng.binomial(totals, probs)
        if np.all(events > 0) and np.all(events < totals):
            return make_counts_dataset(range(1, n_doses + 1), events, totals)


@pytest.fixture(scope="session")
def example1_dataset():
    return simulate_dataset(builtin_scenario("example1", seed=11))


@pytest.fixture(scope="session")
def example1_csv(example1_dataset):
    return example1_dataset.to_csv()
