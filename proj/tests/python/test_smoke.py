"""Smoke tests for the python module and the CLI binary."""

import json
import os
import pathlib
import subprocess

import pytest

import promptlog as pl

FIXTURES = pathlib.Path(os.environ["PROMPTLOG_FIXTURES"])
CLI = os.environ["PROMPTLOG_CLI"]

THREE_LOGS = [
    "Connection from 10.0.0.1 closed",
    "Took 2.5 seconds to deallocate network",
    "Failed to read block blk_4921 from node-17",
]


def test_format_controls():
    assert pl.input_control(["a"]) == "There are 1 logs, the logs begin: (1)a"
    assert pl.input_control(["a", "b"]).endswith("(1)a\n (2)b")
    directive = pl.answer_control("a parsed log template")
    assert "where x is a parsed log template and y is the reason." in directive


def test_prompt_builders_match_goldens():
    golden = (FIXTURES / "golden_prompts" / "simple_anomaly.txt").read_text()
    assert pl.build_simple_prompt("anomaly", THREE_LOGS).assembled() == golden.rstrip("\n")

    cot = pl.build_cot_prompt(THREE_LOGS, "explicit").assembled()
    assert "(d) Mark it abnormal when and only when" in cot

    pairs = [pl.LabelledPair("kernel panic", "1"), pl.LabelledPair("login ok", "0")]
    incontext = pl.build_incontext_prompt(THREE_LOGS, pairs, "anomaly").assembled()
    assert "Category: 1" in incontext and "Category: 0" in incontext


def test_parse_and_normalize():
    answers, diagnostics = pl.parse_numbered_answers(
        "(1) normal - fine\n(2) abnormal - kernel error", 2
    )
    assert diagnostics.format_valid()
    assert [a.answer for a in answers] == ["normal", "abnormal"]
    assert pl.normalize_verdict(answers[1].answer) == "abnormal"

    template = pl.normalize_template("send [*] bytes  to {*}")
    assert template.text == "send <*> bytes to <*>"


def test_metrics():
    report = pl.parsing_f1([("a <*> b", "a <*> b"), ("x y", "x <*>")])
    assert report.recall == pytest.approx(0.5)
    assert pl.rand_index(["t1", "t1", "t2"], ["g1", "g1", "g2"]) == 1.0

    stream = [
        pl.TemplateObservation(f"t{i}", i == 3, gold_abnormal=(i == 3)) for i in range(250)
    ]
    sessions = pl.group_sessions(stream, 100)
    assert [len(s) for s in sessions] == [100, 100, 50]
    assert sessions[0].predicted_abnormal and not sessions[1].predicted_abnormal

    mean, hip = pl.rating_summary([4, 4, 3, 5])
    assert mean == 4.0 and hip == pytest.approx(0.75)


def test_scripted_gateway_retry():
    prompt = pl.build_simple_prompt("anomaly", ["one log"])
    backend = pl.ScriptedBackend()
    backend.script(prompt.assembled(), ["bad", "bad", "(1) normal - quiet"])
    config = pl.BackendConfig()
    result = pl.query_with_retry(backend, config, prompt, 1, "anomaly")
    assert result.ok()
    assert [a.temperature for a in result.record.attempts] == [0.5, 0.9, 1.3]


def test_selection_from_fixture_pool():
    pool = pl.load_pool(FIXTURES / "pool" / "candidates.txt")
    assert [c.id for c in pool.candidates] == ["1", "2", "3", "4", "5"]


def test_cli_end_to_end(tmp_path):
    corpus = tmp_path / "corpus.tsv"
    rows = [
        ("Connection from 10.0.0.1 closed", "Connection from <*> closed"),
        ("Took 2.5 seconds to deallocate network", "Took <*> seconds to deallocate network"),
    ]
    corpus.write_text("".join(f"{c}\t{t}\n" for c, t in rows))

    prompt = pl.build_simple_prompt("parsing", [c for c, _ in rows])
    response = "".join(f"({i + 1}) {t} - v\n" for i, (_, t) in enumerate(rows))
    fixtures = tmp_path / "responses.json"
    fixtures.write_text(json.dumps({pl.prompt_digest(prompt.assembled()): response}))

    out_dir = tmp_path / "run"
    completed = subprocess.run(
        [
            CLI, "parse",
            "--corpus", str(corpus),
            "--format", "tsv:content,template",
            "--backend", "scripted",
            "--fixtures", str(fixtures),
            "--out", str(out_dir),
        ],
        capture_output=True,
        text=True,
    )
    assert completed.returncode == 0, completed.stderr
    report = json.loads((out_dir / "report.json").read_text())
    assert report[0]["f1"] == 1.0
    predictions = [
        json.loads(line)
        for line in (out_dir / "predictions.jsonl").read_text().splitlines()
    ]
    assert len(predictions) == 2
    assert predictions[0]["template"] == "Connection from <*> closed"
