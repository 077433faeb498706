import json
import math
import re
import socket

import pytest

from perfsentry.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*args):
    return main(list(args))


def test_help_exits_zero(capsys):
    assert run("--help") == 0
    out = capsys.readouterr().out
    for command in ("ingest", "commits", "tickets", "recompute", "synth",
                    "evaluate", "bench", "serve"):
        assert command in out


def test_full_workflow_deterministic(workdir, capsys):
    assert run("synth", "--out", "corpus", "--length", "60", "--means", "10,5",
               "--boundaries", "30", "--sigma", "0.1", "--seed", "7",
               "--count", "2", "--project", "demo") == 0
    assert run("--db-path", "db.json", "commits", "corpus/commits.txt",
               "--project", "demo") == 0
    assert run("--db-path", "db.json", "ingest", "corpus/bundles.json") == 0
    out = capsys.readouterr().out
    assert "120 series updated" in out

    assert run("--db-path", "db.json", "recompute", "demo", "--seed", "3") == 0
    first = capsys.readouterr().out
    assert "seed: 3" in first
    hash1 = re.search(r"state hash: (\w+)", first).group(1)

    assert run("--db-path", "db.json", "recompute", "demo", "--seed", "3") == 0
    second = capsys.readouterr().out
    hash2 = re.search(r"state hash: (\w+)", second).group(1)
    assert hash1 == hash2


def test_reingest_reports_zero_updates(workdir, capsys):
    run("synth", "--out", "corpus", "--length", "20", "--means", "5",
        "--boundaries", "", "--seed", "1")
    run("--db-path", "db.json", "commits", "corpus/commits.txt", "--project", "synth")
    run("--db-path", "db.json", "ingest", "corpus/bundles.json")
    capsys.readouterr()
    assert run("--db-path", "db.json", "ingest", "corpus/bundles.json") == 0
    assert "0 series updated" in capsys.readouterr().out


def test_nan_bundle_exits_one(workdir, capsys):
    bundle = {
        "project": "demo", "variant": "v", "task": "t", "revision": "r1",
        "order": 1, "timestamp": "2026-01-05T00:00:00Z",
        "results": [{"test": "a", "config": "1", "measurement": "m", "value": math.nan}],
    }
    (workdir / "bad.json").write_text(json.dumps(bundle).replace("NaN", "null"))
    assert run("--db-path", "db.json", "ingest", "bad.json") == 1
    assert "non-finite" in capsys.readouterr().err


def test_empty_file_exits_one(workdir, capsys):
    (workdir / "empty.json").write_text("[]")
    assert run("--db-path", "db.json", "ingest", "empty.json") == 1
    assert "no records" in capsys.readouterr().err


def test_unregistered_project_exits_one(workdir, capsys):
    bundle = {
        "project": "ghost", "variant": "v", "task": "t", "revision": "r1",
        "order": 1, "timestamp": "2026-01-05T00:00:00Z",
        "results": [{"test": "a", "config": "1", "measurement": "m", "value": 1.0}],
    }
    (workdir / "b.json").write_text(json.dumps(bundle))
    assert run("--db-path", "db.json", "ingest", "b.json") == 1
    assert "unregistered project" in capsys.readouterr().err


def test_recompute_requires_project_or_all(workdir, capsys):
    assert run("--db-path", "db.json", "recompute") == 1
    assert run("--db-path", "db.json", "recompute", "--all") == 0
    out = capsys.readouterr().out
    assert '"series": 0' in out


def test_tickets_roundtrip(workdir, capsys):
    (workdir / "tickets.json").write_text(json.dumps([
        {"ticket_id": "PERF-1", "selectors": {"test": "*"},
         "first_failing_revision": "r1", "summary": "s"},
    ]))
    assert run("--db-path", "db.json", "tickets", "tickets.json") == 0
    assert "1 ticket(s)" in capsys.readouterr().out
    (workdir / "bad.json").write_text(json.dumps([{"ticket_id": "PERF-2"}]))
    assert run("--db-path", "db.json", "tickets", "bad.json") == 1


def test_evaluate_cli_writes_metrics(workdir, capsys):
    run("synth", "--out", "corpus", "--length", "40", "--means", "10,5",
        "--boundaries", "20", "--sigma", "0.1", "--seed", "2", "--count", "2")
    capsys.readouterr()
    assert run("evaluate", "corpus", "--seed", "2") == 0
    out = capsys.readouterr().out
    metrics = json.loads((workdir / "corpus" / "evaluation.json").read_text())
    assert metrics["detection_rate"] == 1.0
    assert metrics["seed"] == 2
    assert '"seed": 2' in out


def test_bench_cli(workdir, capsys):
    assert run("bench", "--lengths", "40,60", "--repeat", "1", "--seed", "4") == 0
    out = capsys.readouterr().out
    assert "active kernel" in out
    assert "seed 4" in out
    assert run("bench", "--lengths", "nope") == 1


def test_serve_rejects_busy_port(workdir, capsys):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    try:
        assert run("--db-path", "db.json", "serve", "--port", str(port)) == 1
        assert "cannot bind" in capsys.readouterr().err
    finally:
        blocker.close()


def test_internal_error_exits_two(workdir, capsys, monkeypatch):
    import perfsentry.cli as cli_mod

    def explode(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli_mod, "run_bench", explode)
    assert run("bench", "--lengths", "40") == 2
    assert "internal error" in capsys.readouterr().err
