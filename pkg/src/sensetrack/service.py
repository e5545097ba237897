"""HTTP/JSON front end: one engine session per handle, turns serialized.

Sessions are held in memory for the process lifetime.  Each session owns
a lock, so concurrent utterance posts to the same session queue up FIFO
while different sessions proceed in parallel.  The wire layer adds no
semantics: responses are computed by the same engine calls a library
user would make.
"""

from __future__ import annotations

import threading
import time
import uuid
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .engine import (
    OTHER,
    OWN,
    Session,
    SessionConfig,
    UnknownLabelError,
    Utterance,
)
from .vectors import EmptyUtteranceError, SenseInventory, VectorStore


class CreateSessionRequest(BaseModel):
    config: dict
    targets: list[str] = Field(default_factory=list)
    inventory: str = "default"
    snapshot: Optional[dict] = None  # resume an exported session instead


class UtteranceRequest(BaseModel):
    role: str
    text: str


class _Held:
    """A live session plus its serialization lock and projection basis."""

    def __init__(self, session: Session, projection: np.ndarray):
        self.session = session
        self.lock = threading.Lock()
        self.projection = projection  # (dim, 2), fixed at creation
        self.created_at = time.time()
        self.turns_processed = 0


def _projection_basis(inventory: SenseInventory, targets, dim: int) -> np.ndarray:
    """First two principal axes of the target sense vectors.

    Fixed at session creation so the scatter view is stable across turns.
    """
    vecs = []
    for label in targets:
        vecs.extend(v for _, v in inventory.senses(label))
    mat = np.array(vecs, dtype=float)
    centered = mat - mat.mean(axis=0)
    # right singular vectors = principal axes of the sense cloud
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    basis = np.zeros((dim, 2))
    for k in range(min(2, vt.shape[0])):
        basis[:, k] = vt[k]
    return basis


def create_app(store: VectorStore, inventories: dict[str, SenseInventory]) -> FastAPI:
    app = FastAPI(title="sense tracking service")
    held: dict[str, _Held] = {}
    registry_lock = threading.Lock()

    def _get(sid: str) -> _Held:
        h = held.get(sid)
        if h is None:
            raise HTTPException(status_code=404, detail=f"no session {sid!r}")
        return h

    def _handle(sid: str, h: _Held) -> dict:
        return {
            "id": sid,
            "created_at": h.created_at,
            "config": h.session.cfg.to_dict(),
            "turn": h.turns_processed,
        }

    def _confidences(h: _Held) -> dict[str, dict[str, float]]:
        return {
            label: dict(h.session.confidence(label).per_sense)
            for label in h.session.targets
        }

    @app.post("/sessions", status_code=201)
    def create_session_endpoint(body: CreateSessionRequest) -> dict:
        inventory = inventories.get(body.inventory)
        if inventory is None:
            raise HTTPException(
                status_code=404, detail=f"unknown inventory {body.inventory!r}"
            )
        try:
            if body.snapshot is not None:
                session = Session.from_snapshot(body.snapshot, store, inventory)
            else:
                cfg = SessionConfig.from_dict(body.config)
                session = Session(cfg, store, inventory, body.targets)
        except (TypeError, ValueError, UnknownLabelError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        basis = _projection_basis(inventory, session.targets, session.cfg.dim)
        h = _Held(session, basis)
        if body.snapshot is not None:
            h.turns_processed = session.turn + 1
        sid = uuid.uuid4().hex
        with registry_lock:
            held[sid] = h
        return _handle(sid, h)

    @app.post("/sessions/{sid}/utterances")
    def post_utterance(sid: str, body: UtteranceRequest) -> dict:
        h = _get(sid)
        if body.role not in (OWN, OTHER):
            raise HTTPException(
                status_code=422, detail=f"role must be {OWN!r} or {OTHER!r}"
            )
        tokens = body.text.split()
        if not tokens:
            raise HTTPException(status_code=422, detail="empty utterance")
        with h.lock:  # FIFO: concurrent posts to one session queue here
            utt = Utterance(body.role, tokens, h.turns_processed)
            try:
                h.session.process_turn(utt)
            except EmptyUtteranceError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            h.turns_processed += 1
            return {
                "turn": h.turns_processed,
                "confidences": _confidences(h),
                "best": h.session.best_assignments(),
            }

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str) -> dict:
        h = _get(sid)
        with h.lock:
            snap = h.session.snapshot()
        points = [
            list(np.array(p["context"]) @ h.projection) for p in snap["particles"]
        ]
        return {
            "handle": _handle(sid, h),
            "snapshot": snap,
            "particles_2d": [
                {"x": float(x), "y": float(y), "weight": p["weight"]}
                for (x, y), p in zip(points, snap["particles"])
            ],
        }

    @app.get("/sessions/{sid}/confidences")
    def get_confidences(sid: str, label: Optional[str] = Query(default=None)) -> dict:
        h = _get(sid)
        with h.lock:
            if label is not None:
                if label not in h.session.targets:
                    raise HTTPException(
                        status_code=404, detail=f"label {label!r} not tracked"
                    )
                per = {label: dict(h.session.confidence(label).per_sense)}
            else:
                per = _confidences(h)
        return {"turn": h.turns_processed, "confidences": per}

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str) -> dict:
        with registry_lock:
            if sid not in held:
                raise HTTPException(status_code=404, detail=f"no session {sid!r}")
            del held[sid]
        return {"deleted": sid}

    return app


def serve(
    store: VectorStore,
    inventories: dict[str, SenseInventory],
    host: str = "127.0.0.1",
    port: int = 8000,
) -> None:
    import uvicorn

    uvicorn.run(create_app(store, inventories), host=host, port=port)
