import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hillspec.report import ReportEnvelope, emit, normalize, parse

finite = st.floats(allow_nan=False, width=64)
scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(-(2**53), 2**53),
    finite,
    st.builds(complex, finite, finite),
    st.text(max_size=12),
)
keys = st.text(alphabet="abcdefghij_", min_size=1, max_size=6).filter(lambda k: k not in ("re", "im"))
values = st.recursive(scalars, lambda inner: st.one_of(st.lists(inner, max_size=4), st.dictionaries(keys, inner, max_size=4)), max_leaves=12)


@st.composite
def row_tables(draw):
    cols = draw(st.lists(keys, min_size=1, max_size=5, unique=True))
    col_values = {c: draw(st.sampled_from([scalars, st.builds(complex, finite, finite), finite, st.text(max_size=8)])) for c in cols}
    n = draw(st.integers(0, 5))
    return [{c: draw(col_values[c]) for c in cols} for _ in range(n)]


@st.composite
def envelopes(draw):
    payload = draw(st.dictionaries(keys.filter(lambda k: k != "rows"), values, max_size=4))
    if draw(st.booleans()):
        payload["rows"] = draw(row_tables())
    warnings = draw(st.lists(st.text(max_size=20), max_size=3))
    return ReportEnvelope("test", {"z": complex(1, -2), "n": 3}, payload, warnings, timestamp="2026-01-01T00:00:00+00:00")


@settings(max_examples=200, deadline=None)
@given(envelopes(), st.sampled_from(["json", "csv"]))
def test_round_trip(env, fmt):
    assert parse(emit(env, fmt), fmt) == env


def test_complex_encoding():
    env = ReportEnvelope("x", {}, {"rows": [{"lam": 1 + 2j, "n": 4}]}, timestamp="t")
    doc = json.loads(emit(env, "json"))
    assert doc["payload"]["rows"][0]["lam"] == {"re": 1.0, "im": 2.0}
    csv_text = emit(env, "csv")
    header = [line for line in csv_text.splitlines() if not line.startswith("#")][0]
    assert header == "lam_re,lam_im,n"


def test_normalize_numpy_and_dataclasses():
    from hillspec.basic_eq import SpectralTriple

    out = normalize({"a": np.float64(1.5), "b": np.arange(3), "c": SpectralTriple.from_roots(3, 0, 0.5, "series")})
    assert out["b"] == [0, 1, 2] and isinstance(out["a"], float)
    assert out["c"]["lambda_plus"] == 9.5
    with pytest.raises(TypeError):
        normalize({"f": object()})


def test_non_dict_payload():
    env = ReportEnvelope("x", {}, [1, 2, 3j], timestamp="t")
    for fmt in ("json", "csv"):
        assert parse(emit(env, fmt), fmt) == env


@pytest.mark.parametrize("text", ["\r", "a\rb", "\x00", "line\nbreak"])
def test_csv_control_characters(text):
    env = ReportEnvelope("x", {}, {"rows": [{"s": text, "n": 1}]}, timestamp="t")
    assert parse(emit(env, "csv"), "csv") == env
