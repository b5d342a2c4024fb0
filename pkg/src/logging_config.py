"""로그 설정 - 보고서는 stdout, 로그는 stderr.

문서 단위 로그는 `extra={"doc_id": ..., "source": ...}`로 문서 정보를 붙인다.
JSON 포매터는 이 필드와 작업 프로세스 이름을 함께 기록한다.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import TextIO

# LogRecord에 extra로 실려 오는 문서 필드
DOCUMENT_FIELDS = ("doc_id", "source")

_NOISY_LOGGERS = ("uvicorn.access", "httpx", "httpcore")


class JsonFormatter(logging.Formatter):
    """로그를 JSON 한 줄씩 출력하는 포매터.

    코퍼스 배치 실행 로그를 jq 등으로 문서별로 바로 걸러낼 수 있다.
    """

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for name in DOCUMENT_FIELDS:
            value = getattr(record, name, None)
            if value is not None:
                log_entry[name] = value
        # --jobs > 1 이면 작업 프로세스에서 온 로그
        if record.processName and record.processName != "MainProcess":
            log_entry["process"] = record.processName

        if record.exc_info and record.exc_info[0] is not None:
            log_entry["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False)


def setup_logging(
    level: str = "INFO",
    json_format: bool = False,
    stream: TextIO | None = None,
) -> logging.Handler:
    """루트 로거를 설정하고 설치한 핸들러를 돌려준다.

    Args:
        level: 로그 레벨 이름. 알 수 없는 이름이면 INFO.
        json_format: True이면 JsonFormatter.
        stream: 기본은 sys.stderr.
    """
    root = logging.getLogger()
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    root.handlers.clear()

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    if json_format:
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        ))
    root.addHandler(handler)

    for name in _NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
    return handler
