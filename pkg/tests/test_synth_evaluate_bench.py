import json

import numpy as np
import pytest

from perfsentry.errors import InvalidParamsError
from perfsentry.evaluate import evaluate_corpus
from perfsentry.pipeline import PipelineConfig
from perfsentry.synth import SynthSpec, build_corpus, synth_values

CONFIG = PipelineConfig(seed=5)


def test_two_segment_spec_yields_one_truth_index(tmp_path):
    spec = SynthSpec(length=40, segment_means=(10.0, 5.0), boundaries=(20,), sigma=0.1, seed=3)
    build_corpus(tmp_path / "c", spec, count=2)
    truth = json.loads((tmp_path / "c" / "truth.json").read_text())
    assert all(entry["indices"] == [20] for entry in truth["series"].values())
    assert len(truth["series"]) == 2


def test_sigma_zero_is_exact_step():
    spec = SynthSpec(length=10, segment_means=(1.0, 2.0), boundaries=(4,), sigma=0.0)
    values = synth_values(spec)
    assert list(values) == [1.0] * 4 + [2.0] * 6


def test_same_seed_writes_identical_files(tmp_path):
    spec = SynthSpec(length=30, segment_means=(3.0, 9.0), boundaries=(15,), sigma=0.2, seed=11)
    build_corpus(tmp_path / "a", spec, count=2)
    build_corpus(tmp_path / "b", spec, count=2)
    for name in ("commits.txt", "bundles.json", "truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_ar1_noise_keeps_marginal_scale():
    spec = SynthSpec(length=4000, segment_means=(0.0,), sigma=2.0, noise="ar1", ar_coeff=0.7, seed=1)
    values = synth_values(spec)
    assert np.std(values) == pytest.approx(2.0, rel=0.15)
    # lag-1 correlation sits near the coefficient
    r = np.corrcoef(values[:-1], values[1:])[0, 1]
    assert r == pytest.approx(0.7, abs=0.1)


def test_spec_validation():
    with pytest.raises(InvalidParamsError):
        SynthSpec(length=10, segment_means=(1.0, 2.0), boundaries=())
    with pytest.raises(InvalidParamsError):
        SynthSpec(length=10, segment_means=(1.0, 2.0, 3.0), boundaries=(6, 4))
    with pytest.raises(InvalidParamsError):
        SynthSpec(length=10, segment_means=(1.0,), sigma=-1.0)


def test_evaluate_step_corpus(tmp_path):
    spec = SynthSpec(
        length=60, segment_means=(10.0, 5.0), boundaries=(30,), sigma=0.1, seed=21
    )
    build_corpus(tmp_path / "c", spec, count=5)
    metrics = evaluate_corpus(tmp_path / "c", CONFIG, tolerance=2)
    assert metrics["series_total"] == 5
    assert metrics["truth_points_total"] == 5
    assert metrics["detection_rate"] == 1.0
    assert metrics["mean_index_error"] <= 1.0
    assert metrics["min_detection_delay"] >= 3
    assert metrics["mean_detection_delay"] >= 3


def test_evaluate_constant_corpus_measures_fpr(tmp_path):
    spec = SynthSpec(length=50, segment_means=(5.0,), sigma=0.2, seed=8)
    build_corpus(tmp_path / "c", spec, count=6)
    metrics = evaluate_corpus(tmp_path / "c", CONFIG, tolerance=2)
    assert metrics["truth_points_total"] == 0
    assert metrics["detection_rate"] is None
    assert 0.0 <= metrics["false_positive_rate"] <= 0.5
    assert metrics["mean_detection_delay"] is None


def test_bench_rows_agree_and_speed_up():
    from perfsentry.bench import run_bench

    rows = run_bench([50, 80], repeat=2, seed=1)
    assert all(r.outputs_equal for r in rows)
    assert all(r.speedup > 1.0 for r in rows)
    docs = [r.to_doc() for r in rows]
    assert docs[0]["length"] == 50
