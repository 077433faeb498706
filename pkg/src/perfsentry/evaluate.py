"""Detector quality metrics over a synthetic corpus.

Replays a corpus through the real ingestion + recompute pipeline and scores
the stored change points against the corpus truth file:

* detection rate: truth changes found within ``tolerance`` indices;
* mean index error: over those matches;
* false-positive rate: fraction of series reporting a change no truth
  point explains;
* detection delay: results after the change (counting the change itself)
  before the detector first reports that exact index, measured by replaying
  growing prefixes. With a minimum cluster size of N a change cannot be
  reported before N such results exist, so the minimum delay is a direct
  check of that mechanism.

Metrics are recomputable from the written artifacts alone.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from perfsentry.cpd import detect_change_points
from perfsentry.cpd.series import min_side
from perfsentry.errors import InputError
from perfsentry.model import SeriesKey
from perfsentry.pipeline import PipelineConfig, recompute_all, series_seed
from perfsentry.store import Store, load_bundles


def load_corpus(corpus_dir: str | Path) -> tuple[list, list[str], dict]:
    corpus = Path(corpus_dir)
    truth_path = corpus / "truth.json"
    commits_path = corpus / "commits.txt"
    bundles_path = corpus / "bundles.json"
    for path in (truth_path, commits_path, bundles_path):
        if not path.exists():
            raise InputError(f"corpus is missing {path.name}: {corpus}")
    bundles = load_bundles(bundles_path)
    revisions = [
        line.strip()
        for line in commits_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    with open(truth_path, "r", encoding="utf-8") as fh:
        truth = json.load(fh)
    return bundles, revisions, truth


def _detection_delay(
    values: np.ndarray, truth_index: int, config: PipelineConfig, seed: int
) -> int | None:
    """Results after the change (inclusive) before ``truth_index`` is first
    reported, or None if it never is."""
    first = truth_index + min_side(config.params.min_cluster_size)
    for length in range(first, values.size + 1):
        detected = detect_change_points(values[:length], config.params, seed)
        if any(d.index == truth_index for d in detected):
            return length - truth_index
    return None


def evaluate_corpus(
    corpus_dir: str | Path,
    config: PipelineConfig,
    tolerance: int = 2,
    measure_delay: bool = True,
) -> dict:
    bundles, revisions, truth = load_corpus(corpus_dir)
    project = truth["project"]

    store = Store()
    store.import_commit_log(project, revisions)
    for bundle in bundles:
        store.ingest_bundle(bundle)
    report = recompute_all(store, project, config)

    matched_errors: list[int] = []
    delays: list[int] = []
    truth_total = 0
    detected_total = 0
    matched_total = 0
    series_with_fp = 0
    undetected_delays = 0

    for series_id, entry in sorted(truth["series"].items()):
        key = SeriesKey.from_id(series_id)
        points = store.series_vector(key)
        index_of = {p.revision: i for i, p in enumerate(points)}
        detected = sorted(
            index_of[cp.revision] for cp in store.change_points(key)
        )
        truth_indices = sorted(entry["indices"])
        truth_total += len(truth_indices)
        detected_total += len(detected)

        remaining = list(detected)
        for t in truth_indices:
            near = [d for d in remaining if abs(d - t) <= tolerance]
            if near:
                best = min(near, key=lambda d: abs(d - t))
                remaining.remove(best)
                matched_total += 1
                matched_errors.append(abs(best - t))
        if remaining:
            series_with_fp += 1

        if measure_delay and truth_indices:
            values = np.asarray([p.value for p in points])
            seed = series_seed(config.seed, key.id, points[0].order if points else 0)
            for t in truth_indices:
                delay = _detection_delay(values, t, config, seed)
                if delay is None:
                    undetected_delays += 1
                else:
                    delays.append(delay)

    series_total = len(truth["series"])
    metrics = {
        "corpus": str(corpus_dir),
        "seed": config.seed,
        "tolerance": tolerance,
        "series_total": series_total,
        "truth_points_total": truth_total,
        "detected_points_total": detected_total,
        "detection_rate": (matched_total / truth_total) if truth_total else None,
        "mean_index_error": (
            float(np.mean(matched_errors)) if matched_errors else None
        ),
        "false_positive_rate": (series_with_fp / series_total) if series_total else None,
        "mean_detection_delay": float(np.mean(delays)) if delays else None,
        "min_detection_delay": int(min(delays)) if delays else None,
        "delays_unmeasured": undetected_delays,
        "recompute_wall_time_s": report.wall_time_s,
    }
    return metrics
