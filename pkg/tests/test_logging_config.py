"""로그 설정 테스트 - JSON 포매터의 문서 필드, stderr 출력, 레벨 처리."""

import io
import json
import logging
import sys

import pytest

from src.logging_config import JsonFormatter, setup_logging


@pytest.fixture()
def restore_root():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    root.handlers[:] = handlers
    root.setLevel(level)


def _record(msg: str = "hello %s", args=("world",), **extra) -> logging.LogRecord:
    record = logging.LogRecord("tlex.test", logging.WARNING, __file__, 1, msg, args, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestJsonFormatter:
    def test_basic_fields(self):
        entry = json.loads(JsonFormatter().format(_record()))
        assert entry["level"] == "WARNING"
        assert entry["logger"] == "tlex.test"
        assert entry["message"] == "hello world"
        assert "doc_id" not in entry
        assert "process" not in entry

    def test_document_fields(self):
        entry = json.loads(JsonFormatter().format(_record(doc_id="wsj_0006", source="a.tml")))
        assert entry["doc_id"] == "wsj_0006"
        assert entry["source"] == "a.tml"

    def test_none_fields_omitted(self):
        entry = json.loads(JsonFormatter().format(_record(doc_id=None, source="a.tml")))
        assert "doc_id" not in entry

    def test_worker_process_name(self):
        entry = json.loads(JsonFormatter().format(_record(processName="SpawnProcess-2")))
        assert entry["process"] == "SpawnProcess-2"

    def test_non_ascii_kept(self):
        line = JsonFormatter().format(_record("비일관 %s", ("ei1⁻",)))
        assert "비일관 ei1⁻" in line

    def test_exception(self):
        try:
            raise ValueError("boom")
        except ValueError:
            record = _record()
            record.exc_info = sys.exc_info()
        entry = json.loads(JsonFormatter().format(record))
        assert "ValueError: boom" in entry["exception"]


class TestSetupLogging:
    def test_json_to_stream(self, restore_root):
        stream = io.StringIO()
        setup_logging(level="debug", json_format=True, stream=stream)
        logging.getLogger("tlex.pipeline").info("처리", extra={"doc_id": "d1"})
        entry = json.loads(stream.getvalue().strip())
        assert entry["doc_id"] == "d1"
        assert restore_root.level == logging.DEBUG

    def test_text_format(self, restore_root):
        stream = io.StringIO()
        setup_logging(stream=stream)
        logging.getLogger("tlex.cli").warning("경고")
        assert "[WARNING] tlex.cli: 경고" in stream.getvalue()

    def test_unknown_level_falls_back(self, restore_root):
        setup_logging(level="chatty", stream=io.StringIO())
        assert restore_root.level == logging.INFO

    def test_replaces_handlers(self, restore_root):
        handler = setup_logging(stream=io.StringIO())
        assert restore_root.handlers == [handler]

    def test_defaults_to_stderr(self, restore_root, capsys):
        setup_logging()
        logging.getLogger("tlex.cli").error("stderr only")
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "stderr only" in captured.err

    def test_quiets_access_log(self, restore_root):
        setup_logging(stream=io.StringIO())
        assert logging.getLogger("uvicorn.access").level == logging.WARNING
