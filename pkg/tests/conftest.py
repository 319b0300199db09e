"""Shared fixtures: synthetic class-blob CSVs standing in for the benchmark
tables when no cached download is available."""

import csv
from pathlib import Path

import numpy as np
import pytest

from adcprune.data import CsvSchema, load_csv

# (samples, features, classes) of the public benchmark tables
BENCHMARK_SHAPES = {
    "balance": (625, 4, 3),
    "breast_cancer": (683, 9, 2),
    "cardio": (2126, 21, 3),
    "mammographic": (830, 4, 2),
    "seeds": (210, 7, 3),
    "vertebral": (310, 6, 3),
}


def write_blob_csv(path, n_samples, n_features, n_classes, seed, noise=0.1):
    """Class-conditional Gaussian blobs in raw (unnormalized) feature units."""
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-20.0, 20.0, n_features)
    span = rng.uniform(5.0, 200.0, n_features)
    means = rng.uniform(0.15, 0.85, (n_classes, n_features))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i in range(n_samples):
            c = i % n_classes
            x = np.clip(rng.normal(means[c], noise), 0.0, 1.0)
            w.writerow([f"{v:.5f}" for v in lo + x * span] + [f"class_{c}"])
    return Path(path)


@pytest.fixture
def blob_csv(tmp_path):
    def factory(name="blobs", n_samples=200, n_features=5, n_classes=3, seed=0, noise=0.1):
        return write_blob_csv(
            tmp_path / f"{name}.csv", n_samples, n_features, n_classes, seed, noise
        )

    return factory


@pytest.fixture
def blob_dataset(blob_csv):
    def factory(name="blobs", n_samples=200, n_features=5, n_classes=3, seed=0, noise=0.1):
        path = blob_csv(name, n_samples, n_features, n_classes, seed, noise)
        return load_csv(path, CsvSchema(label_column=-1), name=name)

    return factory
