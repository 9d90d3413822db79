#!/usr/bin/env python3
"""Dump /v1 API payloads for the frontend test suite.

Runs the replay-backed service in-process against fixtures/demo/ and
writes the JSON bodies the web UI renders, so the frontend tests assert
against real service output rather than handwritten approximations.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

from fastapi.testclient import TestClient

from litpipe.cassette import CassetteStore
from litpipe.llm import LlmGateway, ReplayBackend
from litpipe.pipeline import Pipeline, PipelineConfig, SessionStore
from litpipe.scholarly import ApiCredentials, OpenAlexClient, SemanticScholarClient
from litpipe.service import create_app
from litpipe.transport import ReplayTransport

FIXTURES = REPO_ROOT / "fixtures" / "demo"
OUT_DIR = REPO_ROOT / "frontend" / "tests" / "fixtures"


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    store = CassetteStore(FIXTURES)
    transport = ReplayTransport(store)
    credentials = ApiCredentials()
    with tempfile.TemporaryDirectory() as tmp:
        pipeline = Pipeline(
            LlmGateway(ReplayBackend(store)),
            SemanticScholarClient(credentials, transport=transport, sleep=lambda s: None),
            OpenAlexClient(credentials, transport=transport, sleep=lambda s: None),
            SessionStore(tmp),
            PipelineConfig().with_overrides(
                json.loads((FIXTURES / "config.json").read_text())
            ),
        )
        client = TestClient(create_app(pipeline))
        abstract = (FIXTURES / "abstract.txt").read_text().strip()
        plan = (FIXTURES / "plan.txt").read_text().strip()

        created = client.post("/v1/sessions", json={"abstract": abstract})
        assert created.status_code == 201, created.text
        session_id = created.json()["session_id"]

        papers_citations = client.get(
            f"/v1/sessions/{session_id}/papers", params={"sort": "citations"}
        )
        papers_year = client.get(f"/v1/sessions/{session_id}/papers", params={"sort": "year"})
        draft_plan = client.post(f"/v1/sessions/{session_id}/drafts", json={"plan": plan})
        assert draft_plan.status_code == 200, draft_plan.text
        error_409 = client.post(
            f"/v1/sessions/{session_id}/drafts",
            json={"plan": "Please generate 1 sentences. Cite [9] at line 1."},
        )
        error_422 = client.post(
            f"/v1/sessions/{session_id}/drafts",
            json={"plan": "Write five sentences please."},
        )

        dumps = {
            "session_created.json": created.json(),
            "papers_citations.json": papers_citations.json(),
            "papers_year.json": papers_year.json(),
            "draft_plan.json": draft_plan.json(),
            "error_409.json": error_409.json(),
            "error_422.json": error_422.json(),
        }
        for name, payload in dumps.items():
            (OUT_DIR / name).write_text(
                json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
            )
    print(f"wrote {len(dumps)} fixture payloads into {OUT_DIR}")


if __name__ == "__main__":
    main()
