"""Synthetic benchmark corpora with known change points.

Generates the same artifacts a CI system would upload (a commit log and
per-revision result bundles) plus a truth file recording where the ground
truth changes sit, so the detector can be evaluated end to end. Everything
derives from the seed: the same spec writes byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from perfsentry.errors import InvalidParamsError

NOISE_KINDS = ("iid-normal", "ar1")

_EPOCH = datetime(2026, 1, 5, tzinfo=timezone.utc)
_CADENCE = timedelta(hours=2)


@dataclass(frozen=True)
class SynthSpec:
    """One synthetic series: segment means with changes at ``boundaries``.

    ``boundaries[j]`` is the index of the first observation drawn from
    ``segment_means[j+1]``. Noise is IID normal or lag-1 correlated (AR(1)
    with coefficient ``ar_coeff``, scaled to keep the marginal sigma).
    """

    length: int
    segment_means: tuple[float, ...]
    boundaries: tuple[int, ...] = ()
    sigma: float = 0.0
    noise: str = "iid-normal"
    ar_coeff: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise InvalidParamsError(f"length must be >= 1, got {self.length}")
        if len(self.boundaries) != len(self.segment_means) - 1:
            raise InvalidParamsError(
                f"{len(self.segment_means)} segment means need "
                f"{len(self.segment_means) - 1} boundaries, got {len(self.boundaries)}"
            )
        if any(b2 <= b1 for b1, b2 in zip(self.boundaries, self.boundaries[1:])):
            raise InvalidParamsError("boundaries must be strictly increasing")
        if self.boundaries and not (0 < self.boundaries[0] and self.boundaries[-1] < self.length):
            raise InvalidParamsError("boundaries must fall strictly inside the series")
        if self.sigma < 0:
            raise InvalidParamsError(f"sigma must be >= 0, got {self.sigma}")
        if self.noise not in NOISE_KINDS:
            raise InvalidParamsError(f"noise must be one of {NOISE_KINDS}, got {self.noise!r}")
        if not (-1.0 < self.ar_coeff < 1.0):
            raise InvalidParamsError(f"ar_coeff must be in (-1, 1), got {self.ar_coeff}")

    def to_doc(self) -> dict:
        return {
            "length": self.length,
            "segment_means": list(self.segment_means),
            "boundaries": list(self.boundaries),
            "sigma": self.sigma,
            "noise": self.noise,
            "ar_coeff": self.ar_coeff,
            "seed": self.seed,
        }


def _noise(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.sigma == 0.0:
        return np.zeros(spec.length)
    if spec.noise == "iid-normal":
        return rng.normal(0.0, spec.sigma, spec.length)
    phi = spec.ar_coeff
    innovations = rng.normal(0.0, spec.sigma * np.sqrt(1.0 - phi * phi), spec.length)
    out = np.empty(spec.length)
    out[0] = rng.normal(0.0, spec.sigma)
    for t in range(1, spec.length):
        out[t] = phi * out[t - 1] + innovations[t]
    return out


def synth_values(spec: SynthSpec, seed: int | None = None) -> np.ndarray:
    """Draw one series from the spec (``seed`` overrides the spec's own)."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    edges = [0, *spec.boundaries, spec.length]
    signal = np.empty(spec.length)
    for mean, start, end in zip(spec.segment_means, edges[:-1], edges[1:]):
        signal[start:end] = mean
    return signal + _noise(spec, rng)


def _revision(project: str, order: int, seed: int) -> str:
    material = f"{project}|{order}|{seed}".encode("utf-8")
    return hashlib.blake2b(material, digest_size=10).hexdigest()


def child_seed(seed: int, index: int) -> int:
    digest = hashlib.blake2b(f"{seed}|{index}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def build_corpus(
    out_dir: str | Path,
    spec: SynthSpec,
    count: int = 1,
    project: str = "synth",
    variant: str = "standalone",
    task: str = "bench",
    config: str = "1",
    measurement: str = "ops_per_sec",
) -> dict:
    """Write commits.txt, bundles.json, and truth.json for ``count`` series.

    Series share one commit log; series ``i`` is the test named ``test_i``
    drawn with a child seed of the spec seed. Returns a summary doc.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    revisions = [_revision(project, i + 1, spec.seed) for i in range(spec.length)]
    (out / "commits.txt").write_text("\n".join(revisions) + "\n", encoding="utf-8")

    all_values = [
        synth_values(spec, seed=child_seed(spec.seed, i)) for i in range(count)
    ]
    tests = [f"test_{i:03d}" for i in range(count)]

    bundles = []
    for t, rev in enumerate(revisions):
        bundles.append(
            {
                "project": project,
                "variant": variant,
                "task": task,
                "revision": rev,
                "order": t + 1,
                "timestamp": (_EPOCH + t * _CADENCE).isoformat().replace("+00:00", "Z"),
                "results": [
                    {
                        "test": tests[i],
                        "config": config,
                        "measurement": measurement,
                        "value": float(all_values[i][t]),
                    }
                    for i in range(count)
                ],
            }
        )
    with open(out / "bundles.json", "w", encoding="utf-8") as fh:
        json.dump(bundles, fh, indent=1, sort_keys=True)

    truth = {
        "seed": spec.seed,
        "project": project,
        "spec": spec.to_doc(),
        "series": {
            "/".join([project, variant, task, tests[i], config, measurement]): {
                "indices": list(spec.boundaries),
                "revisions": [revisions[b] for b in spec.boundaries],
            }
            for i in range(count)
        },
    }
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=1, sort_keys=True)

    return {
        "out": str(out),
        "seed": spec.seed,
        "series": count,
        "revisions": len(revisions),
        "truth_points_per_series": len(spec.boundaries),
    }
