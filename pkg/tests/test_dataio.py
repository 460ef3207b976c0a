import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crelab import dataio
from crelab.exceptions import DataError
from crelab.experiments import FigThreeConfig, run_fig3
from crelab.testkit import Verdict


def write(tmp_path, text, name="s.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_fixture_row():
    recs = dataio.load_studies(dataio.fixture_path())
    kt = recs[0]
    assert kt.study_id == "kt79" and kt.rho_ab == pytest.approx(0.80) and kt.rho_cd == pytest.approx(0.347, abs=1e-3)


def test_fixture_golden():
    table = dataio.classify_studies(dataio.load_studies(dataio.fixture_path()))
    golden = json.loads(dataio.golden_verdicts_path().read_text())
    assert dataio.verdict_vector(table) == golden


def test_empty_after_header(tmp_path):
    assert dataio.load_studies(write(tmp_path, "study_id,n_participants,rho_ab,rho_cd\n")) == []


def test_frequency_out_of_range(tmp_path):
    with pytest.raises(DataError, match="line 2"):
        dataio.load_studies(write(tmp_path, "study_id,n_participants,rho_ab,rho_cd\ns1,10,1.2,0.3\n"))


def test_malformed_row_line_number(tmp_path):
    text = "study_id,n_participants,k_ab,n_ab,k_cd,n_cd\na,10,1,10,2,10\nb,10,x,10,2,10\n"
    with pytest.raises(DataError, match="line 3"):
        dataio.load_studies(write(tmp_path, text))


def test_count_exceeds_n(tmp_path):
    with pytest.raises(DataError):
        dataio.load_studies(write(tmp_path, "study_id,n_participants,k_ab,n_ab,k_cd,n_cd\na,10,11,10,2,10\n"))


def test_bad_header(tmp_path):
    with pytest.raises(DataError):
        dataio.load_studies(write(tmp_path, "id,a,b\n"))


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        dataio.load_studies(tmp_path / "nope.csv")


def test_frequency_form_has_no_counts(tmp_path):
    recs = dataio.load_studies(write(tmp_path, "study_id,n_participants,rho_ab,rho_cd,source\ns,10,0.6,0.4,x\n"))
    assert not recs[0].has_counts and recs[0].source == "x"


def test_summary_csv_header(tmp_path):
    table = dataio.classify_studies(dataio.load_studies(dataio.fixture_path()))
    out = tmp_path / "t.csv"
    dataio.write_report(table, "csv", out)
    assert out.read_text().splitlines()[0] == "source,pr_a,pr_c,weak_cre_pct,strong_cre_pct,strong_rcre_pct,n"
    rows = dataio.read_summary_csv(out)
    row = table.rows[0]
    assert rows[0]["strong_cre_pct"] == float(f"{row.strong_cre_pct:.6g}") and rows[0]["n"] == row.n


def test_region_counts_json(tmp_path):
    rc = run_fig3(FigThreeConfig(replications=300))
    out = tmp_path / "r.json"
    dataio.write_report(rc, "json", out, {"seed": 0, "config": {"replications": 300}})
    data = dataio.read_report(out)
    assert set(data) == {"meta", "results"} and data["meta"]["tool_version"] == dataio.TOOL_VERSION
    assert sum(data["results"]["strong"].values()) == 300


def test_unwritable(tmp_path):
    with pytest.raises(OSError):
        dataio.write_report({"a": 1}, "json", tmp_path / "missing" / "x.json")


def test_ci_column():
    table = dataio.classify_studies(dataio.load_studies(dataio.fixture_path()), ci_level=0.95)
    assert 0 <= table.rows[0].ci_cre_pct <= 100


def test_weighting_option():
    recs = dataio.load_studies(dataio.fixture_path())
    a = dataio.classify_studies(recs).rows[0]
    b = dataio.classify_studies(recs, weighting="participants").rows[0]
    assert a.pr_a != b.pr_a and a.strong_cre_pct == b.strong_cre_pct


def test_empty_records():
    with pytest.raises(DataError):
        dataio.classify_studies([])


def test_convert_external(tmp_path):
    src = write(tmp_path, "Study,N,PA,PC\nz1,50,0.7,0.4\n", "ext.csv")
    out = tmp_path / "conv.csv"
    cols = {"study_id": "Study", "n_participants": "N", "rho_ab": "PA", "rho_cd": "PC"}
    assert dataio.convert_external(src, out, cols, source="ext") == 1
    rec = dataio.load_studies(out)[0]
    assert (rec.rho_ab, rec.rho_cd, rec.source) == (0.7, 0.4, "ext")


records = st.lists(
    st.tuples(st.integers(1, 500), st.integers(0, 40), st.integers(0, 40)), min_size=1, max_size=12
)


@given(records)
def test_round_trip(rows):
    import tempfile
    from pathlib import Path

    recs = [
        dataio.StudyRecord(f"s{i}", n, k1 / 40, k2 / 40, "src", k1, 40, k2, 40)
        for i, (n, k1, k2) in enumerate(rows)
    ]
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "s.csv"
        dataio.write_studies(recs, path)
        back = dataio.load_studies(path)
    assert back == recs


@given(st.floats(0, 1), st.floats(0, 1), st.integers(1, 8))
def test_identical_records_extreme_prevalence(ab, cd, k):
    recs = [dataio.StudyRecord(f"s{i}", 10, ab, cd, "x") for i in range(k)]
    row = dataio.classify_studies(recs).rows[0]
    for v in (row.weak_cre_pct, row.strong_cre_pct, row.strong_rcre_pct, row.weighted_violation_pct):
        assert v in (0.0, 100.0)


@given(st.integers(1, 1000), st.integers(1, 1000))
def test_weighting_monotone(n_eu, n_cre):
    cre = dataio.StudyRecord("c", n_cre, 0.8, 0.3, "x")
    eu = dataio.StudyRecord("e", n_eu, 0.8, 0.7, "x")
    before = dataio.classify_studies([cre, eu]).rows[0].weighted_violation_pct
    doubled = dataio.StudyRecord("c", 2 * n_cre, 0.8, 0.3, "x")
    after = dataio.classify_studies([doubled, eu]).rows[0].weighted_violation_pct
    assert after > before
