import json

import pytest

from cstarkit import config
from cstarkit.errors import ExactnessError, ScopeError
from cstarkit.graph import parse_graph
from cstarkit.report import InputDigest, Report, VerdictModel, report_schema
from cstarkit.tracing import RunTrace
from cstarkit.verdict import Answer, Verdict

# ── Run traces ─────────────────────────────────────────────────────────────


def test_steps_are_timed_and_annotated():
    trace = RunTrace(command="analyze", inputs=["4,1;0,0"])
    with trace.step("lattice") as rec:
        rec.summary = "3 admissible pairs"
        rec.metadata = {"size": 3}
    trace.finish("analyze", 0)
    assert len(trace.steps) == 1
    step = trace.steps[0]
    assert step.name == "lattice"
    assert step.duration_s >= 0
    assert step.error is None
    assert trace.exit_code == 0 and trace.ended_at


def test_failed_step_keeps_the_error():
    trace = RunTrace(command="ideals")
    with pytest.raises(ScopeError):
        with trace.step("lattice"):
            raise ScopeError("too many vertices")
    assert trace.steps[0].error == "ScopeError: too many vertices"


def test_to_dict_and_save(tmp_path):
    trace = RunTrace(command="classify", inputs=["a", "b"])
    with trace.step("decide") as rec:
        rec.summary = "Yes"
    trace.finish("classify", 0)
    d = trace.to_dict()
    assert set(d) >= {"trace_id", "command", "inputs", "steps", "outcome", "exit_code", "duration_s"}
    assert d["steps"][0]["summary"] == "Yes"

    path = trace.save(str(tmp_path / "nested" / "t.json"))
    assert json.loads(open(path).read())["trace_id"] == trace.trace_id


def test_save_defaults_to_the_traces_dir(default_config, monkeypatch, tmp_path):
    monkeypatch.setattr(config, "TRACES_DIR", str(tmp_path / "traces"))
    trace = RunTrace(command="analyze")
    trace.finish("analyze", 0)
    path = trace.save()
    assert path.startswith(str(tmp_path / "traces"))
    assert trace.trace_id in path


def test_pretty_print(capsys):
    trace = RunTrace(command="stability", inputs=["0,inf;0,3"])
    with trace.step("graph trace") as rec:
        rec.summary = "exists"
    trace.finish("stability", 0)
    trace.pretty_print()
    out = capsys.readouterr().out
    assert "stability" in out
    assert "graph trace" in out
    assert "exit 0" in out


# ── Verdicts ───────────────────────────────────────────────────────────────


def test_verdicts_need_evidence():
    with pytest.raises(ExactnessError):
        Verdict(Answer.YES, "route")
    with pytest.raises(ExactnessError):
        Verdict(Answer.NO, "route")
    assert Verdict.unknown("bound").witness is None


def test_verdict_with_route():
    v = Verdict.no("Ext orbit", mismatch="ideal group").with_route("largest AF ideal: Ext orbit")
    assert v.route == "largest AF ideal: Ext orbit"
    assert v.obstruction == {"mismatch": "ideal group"}
    assert not Verdict.unknown("x").decided


# ── Reports ────────────────────────────────────────────────────────────────


def test_input_digest_is_canonical():
    g = parse_graph("vertices: v w\nedge v w 1\nedge v v 4\n")
    g2 = parse_graph("vertices: v w\n# same graph\nedge v v 4\nedge v w 1\n")
    assert InputDigest.of("a", g).sha256 == InputDigest.of("b", g2).sha256


def test_report_json_is_deterministic():
    v = VerdictModel.of(Verdict.yes("simple AF", stably="compact operators"))
    report = Report(command="classify", verdicts=[v], results={"b": 1, "a": 2})
    text = report.to_json()
    assert text == report.to_json()
    data = json.loads(text)
    assert list(data["results"]) == ["a", "b"]
    assert data["verdicts"][0]["answer"] == "Yes"
    assert data["verdicts"][0]["witness"] == {"stably": "compact operators"}


def test_report_rejects_unknown_commands():
    with pytest.raises(ValueError):
        Report(command="frobnicate")


def test_report_schema():
    schema = report_schema()
    assert schema["title"] == "Report"
    assert set(schema["properties"]) >= {"command", "inputs", "results", "verdicts", "exit_code"}
