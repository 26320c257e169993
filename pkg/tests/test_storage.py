import json
import logging

import numpy as np
import pytest

from storage.data_storage import (
    JsonLinesWriter,
    dumps_canonical,
    list_images,
    read_caption,
    read_json_lines,
    read_truth,
    sidecar_path,
    write_caption,
    write_truth,
)
from storage.logger import setup_logging


class TestCanonicalJson:
    def test_sorted_and_rounded(self):
        assert dumps_canonical({"b": 1 / 3, "a": [2.0000004, 1]}) == '{"a": [2.0, 1], "b": 0.333333}'

    def test_numpy_values(self):
        text = dumps_canonical({"n": np.int64(3), "x": np.float32(0.5), "ok": np.bool_(True), "v": np.arange(2)})
        assert json.loads(text) == {"n": 3, "x": 0.5, "ok": True, "v": [0, 1]}

    def test_negative_zero(self):
        assert dumps_canonical(-0.0000001) == "0.0"

    def test_reserialising_is_stable(self):
        text = dumps_canonical({"score": 0.1 + 0.2, "nested": {"z": [1.23456789]}})
        assert dumps_canonical(json.loads(text)) == text

    @pytest.mark.parametrize("value", [float("nan"), float("inf")])
    def test_non_finite(self, value):
        with pytest.raises(ValueError):
            dumps_canonical({"x": value})


class TestJsonLines:
    def test_write_and_read(self, tmp_path):
        path = tmp_path / "out" / "records.jsonl"
        with JsonLinesWriter(path) as writer:
            writer.write({"k": 1})
            writer.write({"k": 2})
        assert writer.records_written == 2
        assert list(read_json_lines(path)) == [{"k": 1}, {"k": 2}]

    def test_append(self, tmp_path):
        path = tmp_path / "records.jsonl"
        with JsonLinesWriter(path) as writer:
            writer.write({"k": 1})
        with JsonLinesWriter(path, append=True) as writer:
            writer.write({"k": 2})
        assert len(list(read_json_lines(path))) == 2

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text('{"k": 1}\n\n   \n{"k": 2}\n')
        assert [r["k"] for r in read_json_lines(path)] == [1, 2]

    def test_bad_line_reports_its_number(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text('{"k": 1}\n{oops\n')
        with pytest.raises(ValueError, match=":2:"):
            list(read_json_lines(path))


class TestSidecars:
    def test_paths(self, tmp_path):
        assert sidecar_path(tmp_path / "a.pgm", ".truth.json") == tmp_path / "a.truth.json"

    def test_caption_and_truth(self, tmp_path):
        image = tmp_path / "fig.png"
        assert read_caption(image) is None
        assert read_truth(image) is None
        write_caption(image, "A plot")
        write_truth(image, {"kind": "plot", "x": 0.1234567})
        assert read_caption(image) == "A plot"
        assert read_truth(image) == {"kind": "plot", "x": 0.123457}

    def test_list_images(self, tmp_path):
        for name in ("b.pgm", "a.PNG", "notes.txt"):
            (tmp_path / name).write_bytes(b"")
        extra = tmp_path / "extra.pgm"
        assert list_images([tmp_path, extra]) == [tmp_path / "a.PNG", tmp_path / "b.pgm", extra]


class TestLogging:
    def test_run_header_in_log_file(self, tmp_path):
        root = setup_logging(log_dir=str(tmp_path), log_level=logging.ERROR, run_label="extract seed=42")
        logging.getLogger("plotminer.test").info("first record")
        logging.getLogger("plotminer.test").info("second record")
        for handler in root.handlers:
            handler.flush()
        text = (tmp_path / "plotminer.log").read_text()
        assert text.count("RUN: extract seed=42") == 1
        assert "second record" in text

    def test_console_only(self):
        root = setup_logging(log_dir=None)
        assert [type(h) for h in root.handlers] == [logging.StreamHandler]
