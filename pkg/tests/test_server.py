"""FastAPI 서버 테스트 - 상태 확인, 일관성 검사 / 타임라인 추출 엔드포인트."""

from pathlib import Path
from unittest.mock import patch

import pytest
from fastapi.testclient import TestClient

from src.server import VERSION, app

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture()
def client():
    return TestClient(app)


def _body(name: str) -> bytes:
    return (FIXTURES_DIR / name).read_bytes()


class TestHealthEndpoint:
    def test_health_returns_ok(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        data = resp.json()
        assert data["status"] == "ok"
        assert data["version"] == VERSION
        assert data["include_alinks"] is True
        assert "indeterminacy_mode" in data

    def test_health_reflects_settings(self, client):
        with patch("src.server.settings") as mock_settings:
            mock_settings.include_alinks = False
            mock_settings.drop_self_loops = True
            mock_settings.indeterminacy_mode = "full"
            mock_settings.reachability_mode = "closure"
            mock_settings.section_rule_version = "1"
            data = client.get("/health").json()
        assert data["include_alinks"] is False
        assert data["reachability_mode"] == "closure"


class TestCheckEndpoint:
    def test_consistent(self, client):
        resp = client.post("/check", content=_body("five_intervals.tml"))
        assert resp.status_code == 200
        assert resp.json() == {
            "doc_id": "five_intervals", "consistent": True, "mlic": [], "warnings": [],
        }

    def test_inconsistent(self, client):
        data = client.post("/check", content=_body("inconsistent_ab.tml")).json()
        assert data["consistent"] is False
        assert [link["lid"] for link in data["mlic"][0]["links"]] == ["l1", "l2"]
        assert "mlic_note" in data

    def test_tlinks_only_flag(self, client):
        body = _body("alink_conflict.tml")
        assert client.post("/check", content=body).json()["consistent"] is False
        assert client.post("/check?tlinks_only=true", content=body).json()["consistent"] is True

    def test_keep_self_loops_flag(self, client):
        data = client.post("/check?keep_self_loops=true", content=_body("monday.tml")).json()
        assert data["consistent"] is False
        assert [c["type"] for c in data["mlic"]] == ["type_i", "type_i"]

    def test_doc_id_query(self, client):
        xml = (
            b"<TimeML><TEXT><EVENT eid='e1'>ran</EVENT></TEXT>"
            b"<MAKEINSTANCE eiid='ei1' eventID='e1'/></TimeML>"
        )
        assert client.post("/check?doc_id=adhoc", content=xml).json()["doc_id"] == "adhoc"


class TestExtractEndpoint:
    def test_running_example(self, client):
        data = client.post("/extract", content=_body("running_example.tml")).json()
        assert data["trunk"]["length"] == 21
        assert [b["subgraph"] for b in data["branches"]] == [1, 2]

    def test_indeterminacy_mode(self, client):
        resp = client.post("/extract?indeterminacy=none", content=_body("five_intervals.tml"))
        data = resp.json()
        assert data["indeterminate_sections"] == []

    def test_invalid_mode(self, client):
        resp = client.post("/extract?indeterminacy=bogus", content=_body("five_intervals.tml"))
        assert resp.status_code == 422


class TestErrors:
    def test_empty_body(self, client):
        resp = client.post("/check", content=b"  ")
        assert resp.status_code == 422
        assert resp.json()["detail"]["error"] == "EmptyBody"

    def test_malformed(self, client):
        resp = client.post("/extract", content=_body("malformed.tml"))
        assert resp.status_code == 422
        assert resp.json()["detail"]["error"] == "XmlMalformed"

    def test_unknown_rel_type(self, client):
        resp = client.post("/check", content=_body("unknown_rel.tml"))
        assert resp.status_code == 422
        detail = resp.json()["detail"]
        assert detail["error"] == "UnknownRelType"
        assert "OVERLAPS" in detail["message"]
