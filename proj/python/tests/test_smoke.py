import json

import pytest

import lokg


def test_clean_text_and_hand_matrix():
    assert lokg.clean_text("Hello ### World!!") == "Hello World!"
    assert lokg.best_match_average([[1.0, 0.2], [0.3, 0.8]]) == 0.9


def test_errors_carry_their_code():
    with pytest.raises(lokg.LokgError, match="SchemaError"):
        lokg.filter("not json")


def test_small_pipeline_in_memory():
    doc, labels = lokg.generate(journeys=6, n_domains=2, overlap=0.0)
    assert labels["labels"]
    clean, report = lokg.filter(doc)
    assert report["counts"]["total"] == 0
    mined = lokg.mine(clean)
    assert mined["failures"] == 0
    assert mined["candidate_pairs"] >= len(mined["passed"]) > 0
    kg = lokg.build(clean, mined["passed"])
    assert json.loads(kg)["edges"]
    m = lokg.metrics(kg)
    rows = {r["metric"]: r for r in m["table"]}
    assert rows["adc"]["kg"] > rows["adc"]["hierarchy"]


def test_run_from_config(tmp_path):
    doc, _ = lokg.generate(journeys=6, n_domains=2)
    (tmp_path / "data.json").write_text(doc)
    (tmp_path / "run.ini").write_text("[dataset]\npath = data.json\n[output]\ndir = out\n")
    summaries = lokg.run(tmp_path / "run.ini")
    assert [s["stage"] for s in summaries][-1] == "report"
    first = (tmp_path / "out" / "report.json").read_text()
    lokg.run(tmp_path / "run.ini")
    assert (tmp_path / "out" / "report.json").read_text() == first
    assert "[tmp]" in lokg.default_config()
