"""Command-line front door.

Subcommands: run (full pipeline), search / rerank / generate (single
stages over files), serve (HTTP service), record (live run that writes
cassettes). `--replay DIR` forces the cassette backend everywhere, so
whole runs are reproducible offline.

Exit codes: 0 success, 1 user error, 2 upstream error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .cassette import CassetteStore
from .corpus import PaperRecord, SortKey
from .errors import (
    BudgetExceeded,
    CassetteMiss,
    DecodeError,
    LitPipeError,
    LlmTimeout,
    ProviderError,
    RateLimited,
    StageError,
    UpstreamError,
)
from .llm import LiveBackend, LlmGateway, RecordingBackend, ReplayBackend
from .pipeline import (
    Pipeline,
    PipelineConfig,
    read_session_file,
    SessionStore,
    write_session_file,
)
from .plan import parse_plan
from .query import QuerySpec
from .rerank import RankMethod, rerank_by_permutation
from .scholarly import ApiCredentials, OpenAlexClient, SemanticScholarClient
from .transport import LiveTransport, RecordingTransport, ReplayTransport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_UPSTREAM_ERROR = 2

_UPSTREAM_ERRORS = (
    RateLimited,
    UpstreamError,
    ProviderError,
    LlmTimeout,
    CassetteMiss,
    DecodeError,
)


class _Parser(argparse.ArgumentParser):
    # Flag mistakes are user errors (exit 1), not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="litpipe", description="Literature-review drafting pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--replay", metavar="DIR", help="serve all HTTP/LLM traffic from this cassette directory")
        p.add_argument("--json", action="store_true", help="emit one JSON document on stdout")
        p.add_argument("--config", metavar="FILE", help="JSON file with pipeline config overrides")
        p.add_argument("--sessions-dir", default="sessions", help="where session documents live")
        p.add_argument("--verbose", action="store_true")

    run = sub.add_parser("run", help="execute the full pipeline")
    add_common(run)
    run.add_argument("--abstract-file", metavar="FILE", help="file containing the user abstract")
    run.add_argument("--keywords", default="", help="comma-separated extra keywords")
    run.add_argument("--seed", action="append", default=[], help="seed paper id (repeatable)")
    run.add_argument("--plan", help="sentence plan text")
    run.add_argument("--out", metavar="FILE", help="also write the session document here")

    search = sub.add_parser("search", help="query the scholarly sources")
    add_common(search)
    search.add_argument("--query", required=True)
    search.add_argument("--source", choices=["s2", "openalex", "both"], default="both")
    search.add_argument("--limit", type=int, default=10)

    rerank = sub.add_parser("rerank", help="re-rank candidates from a session file")
    add_common(rerank)
    rerank.add_argument("--session", required=True, metavar="FILE")

    generate = sub.add_parser("generate", help="append a draft to a session file")
    add_common(generate)
    generate.add_argument("--session", required=True, metavar="FILE")
    generate.add_argument("--plan", help="sentence plan text (omit for zero-shot)")
    generate.add_argument("--sort", choices=[k.value for k in SortKey], help="re-sort the candidate view")

    serve = sub.add_parser("serve", help="start the HTTP service")
    add_common(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8787)
    serve.add_argument("--frontend", metavar="DIR", help="also serve this static UI build at /")

    record = sub.add_parser("record", help="run live and write cassettes")
    add_common(record)
    record.add_argument("--cassette-dir", required=True, metavar="DIR")
    record.add_argument("--abstract-file", metavar="FILE")
    record.add_argument("--keywords", default="")
    record.add_argument("--seed", action="append", default=[])
    record.add_argument("--plan")
    record.add_argument("--out", metavar="FILE")

    return parser


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig()
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        config = config.with_overrides(overrides)
    return config


def _build_pipeline(args, config: PipelineConfig, record_dir: str | None = None) -> Pipeline:
    credentials = ApiCredentials(
        user_agent=os.environ.get("LITPIPE_USER_AGENT", "litpipe/0.1"),
        s2_api_key=os.environ.get("S2_API_KEY"),
        contact_email=os.environ.get("LITPIPE_CONTACT_EMAIL"),
    )
    if getattr(args, "replay", None):
        store = CassetteStore(args.replay)
        transport = ReplayTransport(store)
        backend = ReplayBackend(store)
    elif record_dir:
        store = CassetteStore(record_dir)
        transport = RecordingTransport(store, LiveTransport())
        backend = RecordingBackend(LiveBackend(), store)
    else:
        transport = LiveTransport()
        backend = LiveBackend()
    gateway = LlmGateway(backend)
    s2 = SemanticScholarClient(credentials, transport=transport)
    openalex = OpenAlexClient(credentials, transport=transport)
    return Pipeline(gateway, s2, openalex, SessionStore(args.sessions_dir), config)


def _emit(args, human_text: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    else:
        print(human_text)


def _read_abstract(args) -> str:
    if not getattr(args, "abstract_file", None):
        return ""
    return Path(args.abstract_file).read_text(encoding="utf-8").strip()


def _keywords(args) -> list[str]:
    return [k.strip() for k in (args.keywords or "").split(",") if k.strip()]


def _cmd_run(args, record_dir: str | None = None) -> int:
    config = _load_config(args)
    spec = QuerySpec(
        abstract_text=_read_abstract(args),
        user_keywords=_keywords(args),
        seed_ids=list(args.seed),
    )
    try:
        spec.validate()
    except ValueError:
        print(
            "usage: litpipe run --abstract-file FILE [--keywords \"a, b\"] [--seed ID]",
            file=sys.stderr,
        )
        raise
    plan = parse_plan(args.plan) if args.plan else None
    pipeline = _build_pipeline(args, config, record_dir=record_dir)
    session = pipeline.run(spec, plan=plan)
    if args.out:
        write_session_file(session, args.out)
    lines = [f"session {session.session_id}", f"query: {session.search_query}"]
    for i, paper in enumerate(session.candidates, start=1):
        lines.append(f"[{i}] {paper.title}")
    if session.drafts:
        lines.append("")
        lines.append(session.drafts[-1].text)
    _emit(args, "\n".join(lines), session.to_dict())
    return EXIT_OK


def _cmd_search(args) -> int:
    config = _load_config(args)
    pipeline = _build_pipeline(args, config)
    batches = []
    if args.source in ("s2", "both"):
        batches.append(("S2", pipeline.s2.search(args.query, args.limit)))
    if args.source in ("openalex", "both"):
        batches.append(("OpenAlex", pipeline.openalex.search(args.query, args.limit)))
    payload = {
        name: {
            "total": batch.total,
            "records": [r.to_dict() for r in batch.records],
        }
        for name, batch in batches
    }
    lines = []
    for name, batch in batches:
        lines.append(f"{name} (total: {batch.total}):")
        for record in batch.records:
            lines.append(f"  [{record.source_position}] {record.title}")
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK


def _cmd_rerank(args) -> int:
    config = _load_config(args)
    pipeline = _build_pipeline(args, config)
    session = read_session_file(args.session)
    ranked = rerank_by_permutation(
        pipeline.gateway,
        session.query_spec.abstract_text,
        session.candidates,
        model_name=session.config.rerank_model,
        temperature=session.config.rerank_temperature,
        max_output_tokens=session.config.rerank_max_tokens,
        max_rerank=session.config.max_rerank,
        abstract_char_cap=session.config.abstract_char_cap,
    )
    session.ranked = ranked
    session.audit.extend(pipeline.gateway.audit_since(0))
    write_session_file(session, args.session)
    order = " > ".join(f"[{i}]" for i in ranked.order)
    _emit(args, f"ranking: {order}", ranked.to_dict())
    return EXIT_OK


def _cmd_generate(args) -> int:
    config = _load_config(args)
    pipeline = _build_pipeline(args, config)
    session = read_session_file(args.session)
    plan = parse_plan(args.plan) if args.plan else None
    sort = SortKey(args.sort) if args.sort else None
    session = pipeline.regenerate_session(session, plan=plan, sort=sort)
    write_session_file(session, args.session)
    draft = session.drafts[-1] if session.drafts else None
    text = draft.text if draft else "(no draft)"
    _emit(args, text, {"session_id": session.session_id, "drafts": len(session.drafts)})
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_config(args)
    pipeline = _build_pipeline(args, config)
    app = create_app(pipeline, static_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "search":
            return _cmd_search(args)
        if args.command == "rerank":
            return _cmd_rerank(args)
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "record":
            return _cmd_run(args, record_dir=args.cassette_dir)
        raise AssertionError(f"unhandled command {args.command}")
    except _UPSTREAM_ERRORS as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UPSTREAM_ERROR
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        upstream = isinstance(exc.cause, _UPSTREAM_ERRORS)
        return EXIT_UPSTREAM_ERROR if upstream else EXIT_USER_ERROR
    except (LitPipeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
