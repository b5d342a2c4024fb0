from __future__ import annotations

from typing import Literal

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # 실행
    jobs: int = 1  # --jobs 미지정 시 TLEX_JOBS
    log_level: str = "INFO"
    log_format: Literal["text", "json"] = "text"

    # 그래프 구성
    drop_self_loops: bool = True
    include_alinks: bool = True

    # 타임라인
    indeterminacy_mode: Literal["sections", "full", "none"] = "sections"
    reachability_mode: Literal["dfs", "closure"] = "dfs"
    section_rule_version: Literal["1"] = "1"  # SECTION_RULES 키

    # Breaking pair 단어 거리 근사 (문자 수 / 평균 단어 길이)
    average_word_length: float = 6.0

    # Oracle
    oracle_max_points: int = 12
    oracle_max_enumeration: int = 10**6

    model_config = {"env_prefix": "TLEX_", "env_file": ".env"}


settings = Settings()
