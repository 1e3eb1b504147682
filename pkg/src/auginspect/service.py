"""HTTP API for the inspection UI and for scripts.

A thin, stateless facade over one Session: every response is reproducible
from session state, and nothing mutates except the marks/undo endpoints
(which funnel through the session's single-writer event log). Errors use a
stable envelope {"error": {"code", "message", "detail"}} so clients can
branch on codes. Mutation endpoints are idempotent under retry with the same
X-Request-Id header.
"""

from __future__ import annotations

import re
from collections import OrderedDict
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .corpus import GENERATED
from .features import display_for, feature_registry
from .guidance import GuidanceCache, GuidanceResult, LlmProvider, predict_batch
from .session import FilterSpec, GroupKey, MarkState, Session, SessionError
from .store import SessionStore
from .transforms import CATEGORIES, TransformKind


class ApiError(Exception):
    STATUS = {
        "bad_request": 400,
        "not_found": 404,
        "conflict": 409,
        "upstream_unavailable": 502,
        "internal": 500,
    }

    def __init__(self, code: str, message: str, detail: Any = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail

    def envelope(self) -> dict:
        return {"error": {"code": self.code, "message": self.message, "detail": self.detail}}


_METRIC_TERM = re.compile(r"^(fluency|grammaticality|alignment)(<=|>=|<|>)(-?\d+(?:\.\d+)?)$")
_VALID_SORTS = ("id", "fluency", "grammaticality", "alignment")


def parse_filter(expr: str | None, sort: str = "id", direction: str = "asc") -> FilterSpec:
    """Parse the query mini-language: comma-separated terms like
    transform:WordDeletion, feature:rule:negation, mark:high_quality,
    consistency:false, origin:generated, fluency>=0.5."""
    if sort not in _VALID_SORTS:
        raise ApiError("bad_request", f"unknown sort key {sort!r}", {"valid": _VALID_SORTS})
    if direction not in ("asc", "desc"):
        raise ApiError("bad_request", f"sort direction must be asc or desc, got {direction!r}")
    spec = {
        "sort_by": sort,
        "descending": direction == "desc",
        "metric_ranges": [],
    }
    for raw_term in (expr or "").split(","):
        term = raw_term.strip()
        if not term:
            continue
        metric = _METRIC_TERM.match(term)
        if metric:
            name, op, value = metric.group(1), metric.group(2), float(metric.group(3))
            lo, hi = (value, float("inf")) if op in (">", ">=") else (float("-inf"), value)
            spec["metric_ranges"].append((name, lo, hi))
            continue
        key, _, value = term.partition(":")
        if not value:
            raise ApiError("bad_request", f"cannot parse filter term {term!r}")
        if key == "transform":
            if value not in TransformKind.__members__:
                raise ApiError("bad_request", f"unknown transform {value!r}",
                               {"valid": sorted(TransformKind.__members__)})
            spec["transform"] = value
        elif key == "feature":
            spec["feature"] = value
        elif key == "mark":
            if value not in MarkState.__members__:
                raise ApiError("bad_request", f"unknown mark state {value!r}")
            spec["mark"] = MarkState(value)
        elif key == "consistency":
            if value not in ("true", "false"):
                raise ApiError("bad_request", "consistency filter takes true or false")
            spec["consistency"] = value == "true"
        elif key == "origin":
            if value not in ("original", "generated"):
                raise ApiError("bad_request", f"unknown origin {value!r}")
            spec["origin"] = value
        else:
            raise ApiError("bad_request", f"unknown filter key {key!r}")
    spec["metric_ranges"] = tuple(spec["metric_ranges"])
    return FilterSpec(**spec)


class _IdempotencyCache:
    def __init__(self, capacity: int = 1024):
        self.capacity = capacity
        self._entries: OrderedDict[str, Any] = OrderedDict()

    def get(self, key: str):
        return self._entries.get(key)

    def put(self, key: str, value) -> None:
        self._entries[key] = value
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)


def create_app(
    session: Session,
    store: SessionStore | None = None,
    provider: LlmProvider | None = None,
    guidance_cache: GuidanceCache | None = None,
    guidance_concurrency: int = 4,
) -> FastAPI:
    app = FastAPI(title="auginspect")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    replies = _IdempotencyCache()

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        return JSONResponse(status_code=ApiError.STATUS[exc.code], content=exc.envelope())

    def check_writer() -> None:
        if store is not None and not store.holds_writer():
            raise ApiError("conflict", "another writer holds this session")

    def row_for(instance_id: str) -> dict:
        inst = session.dataset.get(instance_id)
        scores = session.scores.get(instance_id)
        verdict = session.verdicts.get(instance_id)
        state, source = session._state_of(instance_id)
        chain = session.chains.get(instance_id)
        return {
            "id": inst.id,
            "text": inst.text,
            "label": inst.label,
            "origin": inst.origin,
            "parent_id": inst.parent_id,
            "mark": state,
            "mark_source": source,
            "scores": None if scores is None else {
                "fluency": scores.fluency,
                "grammaticality": scores.grammaticality,
                "alignment": scores.alignment,
            },
            "verdict": None if verdict is None else {
                "predicted_label": verdict.predicted_label,
                "explanation": verdict.explanation,
                "consistent": verdict.consistent,
                "provider": verdict.provider,
            },
            "transforms": sorted(k.value for k in chain.kinds()) if chain else [],
            "highlights": [list(span) for span in session.highlights(instance_id)],
        }

    def summary_payload(summary) -> dict:
        return {
            "key": str(summary.key),
            "kind": summary.key.kind,
            "value": summary.key.value,
            "display": display_for(summary.key.value) if summary.key.kind == "feature" else summary.key.value,
            "member_count": len(summary.member_ids),
            "inspected": summary.inspected,
            "high_quality": summary.high_quality,
            "examples": summary.examples,
        }

    @app.get("/api/dataset")
    def get_dataset(
        filter: str | None = None,
        sort: str = "id",
        dir: str = "asc",
        page: int = 1,
        page_size: int = 50,
    ):
        if page < 1 or page_size < 1:
            raise ApiError("bad_request", "page and page_size must be >= 1")
        spec = parse_filter(filter, sort, dir)
        ids = session.filter(spec)
        start = (page - 1) * page_size
        return {
            "rows": [row_for(i) for i in ids[start:start + page_size]],
            "total": len(ids),
            "page": page,
            "page_size": page_size,
        }

    @app.post("/api/selection/groups")
    def selection_groups(body: dict):
        ids = body.get("ids", [])
        kind = body.get("kind", "transform")
        if kind not in ("transform", "feature"):
            raise ApiError("bad_request", f"kind must be transform or feature, got {kind!r}")
        try:
            summaries = session.groups_for_selection(ids, kind)
        except Exception as exc:
            raise ApiError("not_found", str(exc))
        return {"groups": [summary_payload(s) for s in summaries]}

    @app.post("/api/marks")
    def post_mark(body: dict, request: Request):
        request_id = request.headers.get("x-request-id")
        if request_id and (hit := replies.get(("mark", request_id))) is not None:
            return hit
        check_writer()
        instance_id = body.get("id")
        state = body.get("state")
        if state not in MarkState.__members__:
            raise ApiError("bad_request", f"unknown mark state {state!r}")
        try:
            stats = session.mark(instance_id, MarkState(state))
        except Exception as exc:
            raise ApiError("not_found", str(exc))
        reply = {"id": instance_id, "state": state, "stats": stats}
        if request_id:
            replies.put(("mark", request_id), reply)
        return reply

    @app.post("/api/marks/batch")
    def post_batch_mark(body: dict, request: Request):
        request_id = request.headers.get("x-request-id")
        if request_id and (hit := replies.get(("batch", request_id))) is not None:
            return hit
        check_writer()
        key_body = body.get("key") or {}
        state = body.get("state")
        scope = body.get("scope", "all_members")
        if state not in MarkState.__members__:
            raise ApiError("bad_request", f"unknown mark state {state!r}")
        try:
            key = GroupKey(key_body.get("kind", ""), key_body.get("value", ""))
        except SessionError as exc:
            raise ApiError("bad_request", str(exc))
        scope_filter = None
        if body.get("filter"):
            scope_filter = parse_filter(body["filter"])
        try:
            count = session.batch_mark(key, MarkState(state), scope=scope, scope_filter=scope_filter)
        except SessionError as exc:
            raise ApiError("bad_request", str(exc))
        reply = {"key": str(key), "count": count, "stats": session.stats()}
        if request_id:
            replies.put(("batch", request_id), reply)
        return reply

    @app.post("/api/undo")
    def post_undo(request: Request):
        request_id = request.headers.get("x-request-id")
        if request_id and (hit := replies.get(("undo", request_id))) is not None:
            return hit
        check_writer()
        undone = session.undo_last()
        if undone is None:
            raise ApiError("bad_request", "nothing to undo")
        reply = {"undone_seq": undone, "stats": session.stats()}
        if request_id:
            replies.put(("undo", request_id), reply)
        return reply

    @app.post("/api/guidance")
    def post_guidance(body: dict):
        ids = body.get("ids", [])
        unknown = [i for i in ids if i not in session.dataset.by_id]
        if unknown:
            raise ApiError("not_found", f"unknown instance ids: {unknown[:5]}")
        if provider is None:
            entries = [
                {"id": i, "error": {"code": "upstream_unavailable", "message": "guidance disabled"}}
                for i in ids
            ]
            return {"verdicts": entries}
        instances = [session.dataset.get(i) for i in ids]
        results = predict_batch(
            instances, session.dataset.label_set, provider, guidance_cache,
            concurrency=guidance_concurrency,
        )
        entries = []
        for result in results:
            if result.verdict is not None:
                session.verdicts[result.instance_id] = result.verdict
                entries.append({
                    "id": result.instance_id,
                    "predicted_label": result.verdict.predicted_label,
                    "explanation": result.verdict.explanation,
                    "consistent": result.verdict.consistent,
                    "provider": result.verdict.provider,
                })
            else:
                entries.append({
                    "id": result.instance_id,
                    "error": {"code": "upstream_unavailable", "message": result.error},
                })
        return {"verdicts": entries}

    @app.get("/api/export")
    def get_export():
        return Response(content=session.export_bytes(), media_type="application/x-ndjson")

    @app.get("/api/stats")
    def get_stats():
        return session.stats()

    @app.get("/api/meta")
    def get_meta():
        return {
            "dataset": session.dataset.name,
            "label_set": list(session.dataset.label_set),
            "transforms": {k.value: CATEGORIES[k] for k in TransformKind},
            "features": feature_registry(),
            "counts": session.stats(),
        }

    return app
