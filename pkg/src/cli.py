"""tlex 명령행 도구 - check / extract / stats / gen / serve.

종료 코드: 입력/파싱 오류가 하나라도 있으면 2, 비일관 문서가 있으면 1, 그 외 0.
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
from collections import Counter
from pathlib import Path

from src.config import settings
from src.logging_config import setup_logging
from src.oracle import Fault, generate_random_graph
from src.pipeline import (
    DocumentFailure,
    DocumentResult,
    PipelineOptions,
    collect_inputs,
    process_many,
    row,
)
from src.report import (
    check_to_dict,
    document_to_dict,
    dumps,
    failure_to_dict,
    render_failure,
    render_mlic,
    render_stats,
    render_text,
    stats_to_dict,
)
from src.timeline import IndeterminacyMode
from src.timeml_model import dumps_graph
from src.trunk_branch import corpus_stats

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INCONSISTENT = 1
EXIT_FAILURE = 2


def parse_anchors(path: str | Path) -> tuple[frozenset[str], frozenset[tuple[str, str]]]:
    """앵커 파일을 읽는다. 한 줄에 노드 id 하나, '#' 이후는 주석.

    "doc_id node_id" 형식의 줄은 해당 문서에만 적용된다.
    """
    global_anchors: set[str] = set()
    doc_anchors: set[tuple[str, str]] = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            global_anchors.add(parts[0])
        elif len(parts) == 2:
            doc_anchors.add((parts[0], parts[1]))
        else:
            raise ValueError(f"앵커 파일 형식 오류: {raw!r}")
    return frozenset(global_anchors), frozenset(doc_anchors)


def _options(args: argparse.Namespace, **overrides) -> PipelineOptions:
    anchors: frozenset[str] = frozenset()
    doc_anchors: frozenset[tuple[str, str]] = frozenset()
    if args.anchors:
        anchors, doc_anchors = parse_anchors(args.anchors)
    mode = args.indeterminacy or settings.indeterminacy_mode
    return PipelineOptions.from_settings(
        settings,
        drop_self_loops=not args.keep_self_loops and settings.drop_self_loops,
        include_alinks=not args.tlinks_only and settings.include_alinks,
        indeterminacy_mode=IndeterminacyMode(mode),
        anchors=anchors,
        doc_anchors=doc_anchors,
        **overrides,
    )


def _run(args: argparse.Namespace, **overrides) -> list[DocumentResult | DocumentFailure]:
    paths = collect_inputs(args.inputs)
    if not paths:
        logger.error("입력 문서가 없습니다: %s", " ".join(args.inputs))
    jobs = args.jobs or settings.jobs
    logger.info("문서 %d개 처리 (jobs=%d)", len(paths), jobs)
    return process_many(paths, _options(args, **overrides), jobs=jobs)


def _exit_code(outcomes: list[DocumentResult | DocumentFailure], paths_empty: bool = False) -> int:
    if paths_empty or any(isinstance(o, DocumentFailure) for o in outcomes):
        return EXIT_FAILURE
    if any(not o.consistent for o in outcomes):
        return EXIT_INCONSISTENT
    return EXIT_OK


def output_names(sources: list[str]) -> list[str]:
    """입력 경로를 공통 상위 디렉토리 기준 상대 경로로 바꿔 출력 파일 이름을 만든다.

    하위 디렉토리는 "__"로 이어 붙인다. 같은 디렉토리의 입력은 파일 stem 그대로다.
    """
    if not sources:
        return []
    paths = [Path(s).resolve() for s in sources]
    root = Path(os.path.commonpath([p.parent for p in paths]))
    names = ["__".join(p.relative_to(root).with_suffix("").parts) for p in paths]
    counts = Counter(names)
    # a.tml과 a.json처럼 확장자만 다른 입력
    return [
        f"{name}_{p.suffix.lstrip('.')}" if counts[name] > 1 else name
        for name, p in zip(names, paths)
    ]


def _emit(args: argparse.Namespace, outcomes, render_one, render_all) -> None:
    """--out이 있으면 문서별 파일로, 없으면 stdout으로 한 번에 출력한다."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        suffix = ".json" if args.format == "json" else ".txt"
        for outcome, name in zip(outcomes, output_names([o.source for o in outcomes])):
            (out / f"{name}{suffix}").write_text(render_one(outcome) + "\n", encoding="utf-8")
        logger.info("%d개 결과 저장: %s", len(outcomes), out)
        return
    sys.stdout.write(render_all(outcomes) + "\n")


def _emit_json(args: argparse.Namespace, outcomes, as_dict) -> None:
    _emit(
        args,
        outcomes,
        lambda o: dumps(as_dict(o)),
        lambda items: dumps(_envelope(items, as_dict)),
    )


def cmd_check(args: argparse.Namespace) -> int:
    outcomes = _run(args)

    def as_dict(o):
        if isinstance(o, DocumentFailure):
            return failure_to_dict(o)
        return check_to_dict(o)

    def as_text(o):
        if isinstance(o, DocumentFailure):
            return render_failure(o)
        if o.consistent:
            return f"== {o.doc_id}: CONSISTENT =="
        return f"== {o.doc_id}: INCONSISTENT ({len(o.mlic)} cycles) ==\n{render_mlic(o)}"

    if args.format == "json":
        _emit_json(args, outcomes, as_dict)
    else:
        _emit(args, outcomes, as_text, lambda items: "\n".join(as_text(o) for o in items))
    return _exit_code(outcomes, paths_empty=not outcomes)


def cmd_extract(args: argparse.Namespace) -> int:
    outcomes = _run(args)

    def as_dict(o):
        return failure_to_dict(o) if isinstance(o, DocumentFailure) else document_to_dict(o)

    def as_text(o):
        return render_failure(o) if isinstance(o, DocumentFailure) else render_text(o)

    if args.format == "json":
        _emit_json(args, outcomes, as_dict)
    else:
        _emit(args, outcomes, as_text, lambda items: "\n\n".join(as_text(o) for o in items))
    return _exit_code(outcomes, paths_empty=not outcomes)


def _envelope(outcomes, as_dict) -> dict:
    documents = [as_dict(o) for o in outcomes if not isinstance(o, DocumentFailure)]
    failures = [as_dict(o) for o in outcomes if isinstance(o, DocumentFailure)]
    return {
        "documents": documents,
        "failures": failures,
        "summary": {
            "documents": len(outcomes),
            "inconsistent": sum(1 for d in documents if not d["consistent"]),
            "failures": len(failures),
        },
    }


def cmd_stats(args: argparse.Namespace) -> int:
    outcomes = _run(args, compute_tlinks_only=True)
    results = [o for o in outcomes if isinstance(o, DocumentResult)]
    failures = len(outcomes) - len(results)
    stats = corpus_stats(row(r) for r in results)
    include_alinks = not args.tlinks_only and settings.include_alinks
    if args.format == "json":
        text = dumps(stats_to_dict(stats, failures, include_alinks))
    else:
        text = render_stats(stats, failures, include_alinks)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        name = "stats.json" if args.format == "json" else "stats.txt"
        (out / name).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_FAILURE if failures or not outcomes else EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base_seed = args.seed if args.seed is not None else 0
    picker = random.Random(base_seed)
    for k in range(args.count):
        seed = base_seed + k
        fault = Fault.INJECT_CYCLE if picker.random() < args.inject_cycle else Fault.NONE
        graph, injected = generate_random_graph(
            seed, args.intervals, args.density, args.slink_prob, fault,
        )
        (out / f"{graph.doc_id}.json").write_text(dumps_graph(graph) + "\n", encoding="utf-8")
        if injected:
            logger.info("%s: 사이클 주입 %s", graph.doc_id, ", ".join(injected))
    logger.info("합성 문서 %d개 생성: %s", args.count, out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("src.server:app", host=args.host, port=args.port)
    return EXIT_OK


def _fraction(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError("0과 1 사이의 값이어야 합니다")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlex",
        description="TimeML 문서에서 줄기-가지 타임라인을 추출하고 일관성을 검사합니다.",
    )
    parser.add_argument("--log-level", default=None, help="로그 레벨 (기본: TLEX_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("inputs", nargs="+", help=".tml/.xml/.json 파일 또는 디렉토리")
    corpus.add_argument("--format", choices=["json", "text"], default="text", help="출력 형식")
    corpus.add_argument(
        "--keep-self-loops", action="store_true", help="self-loop 링크를 제거하지 않음",
    )
    corpus.add_argument("--tlinks-only", action="store_true", help="ALINK를 제외하고 처리")
    corpus.add_argument(
        "--indeterminacy",
        choices=[m.value for m in IndeterminacyMode],
        default=None,
        help="비결정성 계산 방식 (기본: sections)",
    )
    corpus.add_argument("--anchors", metavar="FILE", help="메인 앵커 노드 목록 파일")
    corpus.add_argument("--out", metavar="DIR", help="문서별 결과를 저장할 디렉토리")
    corpus.add_argument("--jobs", type=int, default=None, help="프로세스 수 (기본: TLEX_JOBS)")

    check = sub.add_parser("check", parents=[corpus], help="일관성 검사 및 MLIC 출력")
    check.set_defaults(func=cmd_check)
    extract = sub.add_parser("extract", parents=[corpus], help="줄기-가지 타임라인 추출")
    extract.set_defaults(func=cmd_extract)
    sub.add_parser("stats", parents=[corpus], help="코퍼스 통계").set_defaults(func=cmd_stats)

    gen = sub.add_parser("gen", help="합성 코퍼스(JSON 그래프 덤프) 생성")
    gen.add_argument("--out", metavar="DIR", required=True)
    gen.add_argument("--count", type=int, default=385)
    gen.add_argument("--intervals", type=int, default=40)
    gen.add_argument("--density", type=_fraction, default=0.065, help="링크 생성 비율")
    gen.add_argument("--slink-prob", type=_fraction, default=0.05)
    gen.add_argument("--inject-cycle", type=_fraction, default=0.0, help="사이클 주입 문서 비율")
    gen.add_argument("--seed", type=int, default=None)
    gen.set_defaults(func=cmd_gen)

    serve = sub.add_parser("serve", help="HTTP 서버 실행")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(
        level=args.log_level or settings.log_level,
        json_format=settings.log_format == "json",
    )
    try:
        return args.func(args)
    except (OSError, ValueError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
