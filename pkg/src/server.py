"""FastAPI 서버 - TimeML 문서를 받아 일관성 검사 / 타임라인 추출 결과를 돌려준다."""

from __future__ import annotations

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Query, Request

from src.config import settings
from src.logging_config import setup_logging
from src.pipeline import DocumentResult, PipelineOptions, process_graph
from src.report import check_to_dict, document_to_dict
from src.timeline import IndeterminacyMode
from src.timeml_model import TlexError
from src.timeml_parser import parse_graph

logger = logging.getLogger(__name__)

VERSION = "0.1.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """서버 시작 시 로깅 설정을 초기화한다."""
    setup_logging(level=settings.log_level, json_format=settings.log_format == "json")
    logger.info(
        "tlex 서버 시작 (alinks=%s, indeterminacy=%s, reachability=%s)",
        settings.include_alinks, settings.indeterminacy_mode, settings.reachability_mode,
    )
    yield
    logger.info("tlex 서버 종료")


app = FastAPI(
    title="tlex-engine",
    description="TimeML 줄기-가지 타임라인 추출기",
    version=VERSION,
    lifespan=lifespan,
)


@app.get("/health")
async def health():
    return {
        "status": "ok",
        "version": VERSION,
        "include_alinks": settings.include_alinks,
        "drop_self_loops": settings.drop_self_loops,
        "indeterminacy_mode": settings.indeterminacy_mode,
        "reachability_mode": settings.reachability_mode,
        "section_rule_version": settings.section_rule_version,
    }


async def _process(
    request: Request,
    tlinks_only: bool,
    keep_self_loops: bool,
    indeterminacy: IndeterminacyMode | None,
    doc_id: str | None,
) -> DocumentResult:
    body = await request.body()
    if not body.strip():
        raise HTTPException(
            status_code=422,
            detail={"error": "EmptyBody", "message": "TimeML 본문이 비어 있습니다"},
        )

    options = PipelineOptions.from_settings(
        settings,
        include_alinks=settings.include_alinks and not tlinks_only,
        drop_self_loops=settings.drop_self_loops and not keep_self_loops,
        indeterminacy_mode=indeterminacy or IndeterminacyMode(settings.indeterminacy_mode),
    )
    try:
        graph = parse_graph(body, options.graph_options, doc_id=doc_id)
        return process_graph(graph, options)
    except (TlexError, ValueError) as e:
        logger.warning(
            "요청 처리 실패 (%s: %s)", type(e).__name__, e,
            extra={"doc_id": getattr(e, "doc_id", None) or doc_id},
        )
        detail = {"error": type(e).__name__, "message": str(e)}
        raise HTTPException(status_code=422, detail=detail) from e


@app.post("/check")
async def check_document(
    request: Request,
    tlinks_only: bool = Query(False),
    keep_self_loops: bool = Query(False),
    doc_id: str | None = Query(None),
):
    """일관성 판정과 MLIC만 돌려준다."""
    result = await _process(request, tlinks_only, keep_self_loops, IndeterminacyMode.NONE, doc_id)
    return check_to_dict(result)


@app.post("/extract")
async def extract_document(
    request: Request,
    tlinks_only: bool = Query(False),
    keep_self_loops: bool = Query(False),
    indeterminacy: IndeterminacyMode | None = Query(None),
    doc_id: str | None = Query(None),
):
    """줄기-가지 타임라인 전체 JSON (비일관 문서는 MLIC)."""
    result = await _process(request, tlinks_only, keep_self_loops, indeterminacy, doc_id)
    return document_to_dict(result)
