from __future__ import annotations

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perfsentry.model import SeriesKey
from perfsentry.store import BundleResult, Store, TaskResultBundle

BASE_TIME = datetime(2026, 1, 5, tzinfo=timezone.utc)


def make_key(test="insert", project="sys-perf", variant="linux", task="bench",
             config="16", measurement="ops_per_sec") -> SeriesKey:
    return SeriesKey(project=project, variant=variant, task=task, test=test,
                     config=config, measurement=measurement)


def make_bundle(revision, order, values_by_test, project="sys-perf",
                variant="linux", task="bench", tags=(), direction="higher-is-better"):
    """One bundle with a single config/measurement per test."""
    return TaskResultBundle(
        project=project,
        variant=variant,
        task=task,
        revision=revision,
        order=order,
        timestamp=BASE_TIME + timedelta(hours=2 * order),
        results=tuple(
            BundleResult(test=test, config="16", measurement="ops_per_sec",
                         value=float(v), tags=tuple(tags), direction=direction)
            for test, v in sorted(values_by_test.items())
        ),
    )


def seeded_store(series_values: dict[str, np.ndarray], project="sys-perf") -> Store:
    """In-memory store with one commit per index and the given per-test series."""
    lengths = {len(v) for v in series_values.values()}
    assert len(lengths) == 1, "all series must share a length"
    length = lengths.pop()
    revisions = [f"rev{i:04d}" for i in range(length)]
    store = Store()
    store.import_commit_log(project, revisions)
    for i, rev in enumerate(revisions):
        store.ingest_bundle(
            make_bundle(rev, i + 1,
                        {test: vals[i] for test, vals in series_values.items()},
                        project=project)
        )
    return store


@pytest.fixture
def rng():
    return np.random.default_rng(20260105)
