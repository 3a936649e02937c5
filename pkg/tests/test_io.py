import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from sicklesplit.errors import DecodeError, EmptySequenceError, InvalidLabelError
from sicklesplit.io import (
    frame_name,
    list_frames,
    read_label_map,
    write_label_map,
)


def test_read_all_background(tmp_path):
    p = tmp_path / "m.png"
    write_label_map(np.zeros((4, 4), np.uint8), p)
    labels = read_label_map(p, class_count=2)
    assert labels.shape == (4, 4)
    assert (labels == 0).all()


def test_read_roundtrip_paper_encoding(tmp_path):
    p = tmp_path / "m.png"
    src = np.array([[0, 1], [2, 1]], np.uint8)
    write_label_map(src, p)
    assert (read_label_map(p, 2) == src).all()


def test_invalid_label_reports_location(tmp_path):
    p = tmp_path / "m.png"
    arr = np.zeros((2, 2), np.uint8)
    arr[1, 0] = 7
    write_label_map(arr, p)
    with pytest.raises(InvalidLabelError) as exc:
        read_label_map(p, 2)
    assert exc.value.value == 7
    assert (exc.value.row, exc.value.col) == (1, 0)


def test_never_clamps(tmp_path):
    p = tmp_path / "m.png"
    arr = np.full((3, 3), 3, np.uint8)
    write_label_map(arr, p)
    with pytest.raises(InvalidLabelError):
        read_label_map(p, 2)
    assert (read_label_map(p, 3) == 3).all()


def test_decode_error_on_garbage(tmp_path):
    p = tmp_path / "junk.png"
    p.write_bytes(b"not a png at all")
    with pytest.raises(DecodeError):
        read_label_map(p)


def test_decode_error_on_rgb_labelmap(tmp_path):
    p = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 4, 3), np.uint8), mode="RGB").save(p)
    with pytest.raises(DecodeError):
        read_label_map(p)


def test_write_into_missing_directory_raises(tmp_path):
    with pytest.raises(OSError):
        write_label_map(np.zeros((2, 2), np.uint8), tmp_path / "nope" / "m.png")


@settings(max_examples=25, deadline=None)
@given(
    h=st.integers(1, 40),
    w=st.integers(1, 40),
    seed=st.integers(0, 2**32 - 1),
)
def test_roundtrip_random_maps(tmp_path_factory, h, w, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, (h, w)).astype(np.uint8)
    p = tmp_path_factory.mktemp("rt") / "m.png"
    write_label_map(labels, p)
    assert (read_label_map(p, 2) == labels).all()


def test_roundtrip_large_map(tmp_path):
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 3, (1000, 1000)).astype(np.uint8)
    p = tmp_path / "big.png"
    write_label_map(labels, p)
    assert (read_label_map(p, 2) == labels).all()


def _touch_frames(d, indices):
    for i in indices:
        write_label_map(np.zeros((2, 2), np.uint8), d / frame_name(i))


def test_list_frames_times_at_4fps(tmp_path):
    _touch_frames(tmp_path, [0, 1, 2])
    recs = list_frames(tmp_path, fps=4.0)
    assert [r.frame_index for r in recs] == [0, 1, 2]
    assert [r.time_s for r in recs] == [0.0, 0.25, 0.5]


def test_list_frames_single(tmp_path):
    _touch_frames(tmp_path, [0])
    recs = list_frames(tmp_path)
    assert len(recs) == 1 and recs[0].time_s == 0.0


def test_list_frames_gap_warns(tmp_path, caplog):
    _touch_frames(tmp_path, [0, 5])
    with caplog.at_level(logging.WARNING):
        recs = list_frames(tmp_path)
    assert [r.frame_index for r in recs] == [0, 5]
    assert any("gap" in rec.message for rec in caplog.records)


def test_list_frames_order_independent_of_fs(tmp_path):
    # indices written out of order; zero padding keeps sort stable
    _touch_frames(tmp_path, [10, 2, 7, 0])
    recs = list_frames(tmp_path)
    assert [r.frame_index for r in recs] == [0, 2, 7, 10]


def test_list_frames_empty_raises(tmp_path):
    with pytest.raises(EmptySequenceError):
        list_frames(tmp_path)
