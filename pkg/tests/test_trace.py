import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windcosim.errors import TraceAxisMismatchError, TraceError, UnknownChannelError
from windcosim.trace import TraceSet, read_csv, write_csv


def _trace(n=5, names=("a", "b")):
    t = np.arange(n) * 0.5
    return TraceSet(time=t, channels={k: np.linspace(0, 1, n) + i
                                      for i, k in enumerate(names)})


def test_channel_length_mismatch_rejected():
    with pytest.raises(TraceError):
        TraceSet(time=np.arange(4.0), channels={"a": np.zeros(3)})


def test_unknown_channel():
    with pytest.raises(UnknownChannelError):
        _trace()["nope"]


def test_axis_mismatch():
    a = _trace(5)
    b = _trace(6)
    with pytest.raises(TraceAxisMismatchError):
        a.require_same_axis(b)


def test_axis_same_values_ok():
    a = _trace(5)
    b = TraceSet(time=a.time.copy(), channels={"a": np.zeros(5)})
    a.require_same_axis(b)


def test_csv_roundtrip_bytes(tmp_path):
    tr = _trace(16, names=("x", "grid.v_pcc"))
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_csv(tr, p1)
    back = read_csv(p1)
    write_csv(back, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(back.time, tr.time)
    for k in tr.channels:
        assert np.array_equal(back[k], tr[k])


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=1, max_size=30))
def test_csv_roundtrip_preserves_exact_floats(tmp_path_factory, values):
    tmp = tmp_path_factory.mktemp("csv")
    t = np.arange(len(values), dtype=float)
    tr = TraceSet(time=t, channels={"ch": np.array(values)})
    path = tmp / "t.csv"
    write_csv(tr, path)
    back = read_csv(path)
    # repr serialization is exact, including signed zero and subnormals
    assert np.array_equal(back["ch"], tr["ch"])
    assert np.array_equal(np.signbit(back["ch"]), np.signbit(tr["ch"]))


def test_csv_header_and_layout(tmp_path):
    tr = _trace(3, names=("p", "q"))
    path = tmp_path / "t.csv"
    write_csv(tr, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "time,p,q"
    assert len(lines) == 4
    assert path.read_text().endswith("\n")


def test_read_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("zeit,a\n0.0,1.0\n")
    with pytest.raises(TraceError):
        read_csv(path)


def test_read_rejects_ragged_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,a\n0.0,1.0\n1.0\n")
    with pytest.raises(TraceError):
        read_csv(path)
