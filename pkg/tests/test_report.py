import json
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from evlab.report import (CSV_COLUMNS, REPORT_KEYS, atomic_write, dumps, loads, make_report, plain, records_csv,
                          window_pair, without_timing, write_report)

finite = st.floats(allow_nan=False, allow_infinity=False)
record = st.fixed_dictionaries({
    "mu": finite, "lower_margin": st.none() | finite, "upper_margin": st.none() | finite,
    "c_hat": st.none() | finite, "classification": st.sampled_from(["strong_positive", "mixed"]),
})


@settings(max_examples=50, deadline=None)
@given(st.lists(record, max_size=5), st.integers())
def test_report_round_trips_losslessly(records, seed):
    doc = make_report("scan", {"seed": seed}, records=records, timing={"elapsed_seconds": 0.1})
    assert list(doc) == list(REPORT_KEYS)
    back = loads(dumps(doc))
    assert back == doc
    assert dumps(back) == dumps(doc)


def test_plain_converts_numpy_types():
    out = plain({"a": np.float64(1.5), "b": np.arange(3), "c": (np.int64(2), np.bool_(True))})
    assert out == {"a": 1.5, "b": [0, 1, 2], "c": [2, True]}
    assert json.dumps(out)


def test_nonfinite_values_survive():
    doc = make_report("refine", {"x": math.inf})
    assert loads(dumps(doc))["config"]["x"] == math.inf


def test_window_pair_sorts():
    assert window_pair(None) is None
    assert window_pair((-0.01, -0.5)) == [-0.5, -0.01]


def test_csv_header_and_blanks():
    text = records_csv([{"mu": 0.5, "lower_margin": None, "upper_margin": None, "c_hat": None,
                         "classification": "skipped_near_spectrum"}])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "0.5,,,,skipped_near_spectrum"


def test_write_report_is_atomic(tmp_path):
    doc = make_report("scan", {}, records=[{"mu": 1.0, "classification": "mixed"}])
    written = write_report(tmp_path / "out" / "r.json", doc, with_csv=True)
    assert sorted(p.name for p in written) == ["r.csv", "r.json"]
    assert loads((tmp_path / "out" / "r.json").read_text()) == doc
    assert not [p for p in (tmp_path / "out").iterdir() if p.name.endswith(".tmp")]


def test_failed_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / "r.json"
    target.write_text("old")

    class Boom:
        def __str__(self):
            raise RuntimeError

    try:
        atomic_write(target, Boom())
    except TypeError:
        pass
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]


def test_without_timing():
    doc = make_report("check", {}, timing={"elapsed_seconds": 3})
    assert "timing" not in without_timing(doc)
