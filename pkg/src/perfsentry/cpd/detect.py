"""Hierarchical divisive detection with a permutation significance test.

The search repeatedly takes the strongest admissible split across the
current clusters, asks whether shuffling the values inside each cluster
could plausibly produce a statistic that large, and stops as soon as the
answer is yes. Each accepted split divides its cluster in two and the
search recurses over the refined partition.

Everything here is a pure function of its arguments: a fixed seed gives a
byte-identical result regardless of how many series run concurrently
elsewhere.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from perfsentry.cpd.divergence import as_observations
from perfsentry.cpd.params import DetectedPoint, DivergenceParams
from perfsentry.cpd.series import min_side, qhat_values


def subseed(seed: int, *parts: object) -> int:
    """Stable, cross-platform child seed derived from a parent seed."""
    material = ":".join([str(seed), *(str(p) for p in parts)])
    digest = hashlib.blake2b(material.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def significance_test(
    clusters: Sequence[Sequence[float]],
    observed_max_qhat: float,
    params: DivergenceParams,
    seed: int,
) -> float:
    """Permutation p-value for the best split over a cluster partition.

    Values are shuffled independently within each cluster (cluster
    boundaries are preserved) and the best admissible statistic across all
    clusters is recorded; the p-value is the add-one fraction of
    permutations reaching the observed maximum:

        p = (1 + #{best_perm >= observed}) / (1 + permutation_count)

    The add-one form can never report exactly zero. Deterministic for a
    fixed seed.
    """
    rng = np.random.default_rng(seed)
    arrays = [np.array(as_observations(c), copy=True) for c in clusters]
    exceed = 0
    for _ in range(params.permutation_count):
        best = -np.inf
        for arr in arrays:
            rng.shuffle(arr)
            vals = qhat_values(
                arr, params.alpha, params.min_cluster_size, params.size_weight
            )
            if vals.size:
                peak = float(vals.max())
                if peak > best:
                    best = peak
        if best >= observed_max_qhat:
            exceed += 1
    return (1 + exceed) / (1 + params.permutation_count)


def _best_split(
    z: np.ndarray, start: int, params: DivergenceParams
) -> tuple[int, float] | None:
    """Strongest admissible split of one cluster, as (global index, qhat).

    Ties go to the smallest index (argmax returns the first occurrence),
    which keeps detection deterministic and biases attribution earlier.
    """
    vals = qhat_values(z, params.alpha, params.min_cluster_size, params.size_weight)
    if not vals.size:
        return None
    k = int(np.argmax(vals))
    return start + min_side(params.min_cluster_size) + k, float(vals[k])


def detect_change_points(
    series: Sequence[float],
    params: DivergenceParams | None = None,
    seed: int = 0,
) -> list[DetectedPoint]:
    """All significant change points of a series, sorted by position.

    Short series are legal and return an empty list. Each returned point
    carries the 1-based order in which it was found and the p-value that
    admitted it; orders are contiguous from 1.
    """
    params = params or DivergenceParams()
    z = as_observations(series)

    # Clusters are half-open [start, end) index ranges over z, kept sorted.
    clusters: list[tuple[int, int]] = [(0, z.size)]
    best_cache: dict[tuple[int, int], tuple[int, float] | None] = {}
    found: list[DetectedPoint] = []

    while params.max_change_points is None or len(found) < params.max_change_points:
        best: tuple[int, float] | None = None
        for span in clusters:
            if span not in best_cache:
                start, end = span
                best_cache[span] = _best_split(z[start:end], start, params)
            candidate = best_cache[span]
            # Strict > keeps the earliest cluster's candidate on exact ties.
            if candidate is not None and (best is None or candidate[1] > best[1]):
                best = candidate
        if best is None:
            break

        p_value = significance_test(
            [z[s:e] for s, e in clusters],
            best[1],
            params,
            subseed(seed, len(found)),
        )
        if p_value >= params.p_threshold:
            break

        index, stat = best
        found.append(
            DetectedPoint(index=index, qhat=stat, order=len(found) + 1, p_value=p_value)
        )
        # Split the cluster containing the accepted index.
        for i, (start, end) in enumerate(clusters):
            if start <= index < end:
                clusters[i : i + 1] = [(start, index), (index, end)]
                best_cache.pop((start, end), None)
                break

    return sorted(found, key=lambda d: d.index)
