"""Local session service behind the interactive mesh-correction editor.

A session holds a source image and a working mesh; the client drags
vertices, watches warped previews, and finally exports the corrected image
plus the mesh and flow files.  Mutations (move-vertex, undo, redo) are
serialized per session and bump a monotone revision counter; previews and
exports read a consistent snapshot and run outside the mutation lock, so
the service stays responsive during a full-resolution export.

Every accepted mutation must keep the mesh quad-valid; an invalid drag is
rejected atomically with the offending cell indices.  Previews and exports
share one warp implementation: scale the mesh to the working resolution,
rasterize the flow, upsample it to the output size, backward-warp.  Because
the paths are identical, a preview at full resolution equals the export
bit-for-bit.

Wire protocol (see docs/PROTOCOL.md): JSON control bodies, PNG preview
bytes, base64-encoded PNG in the create request.
"""

from __future__ import annotations

import base64
import binascii
import os
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import Config
from .errors import DataError, DecodeError, FormatError
from .flow import write_flow
from .image import Image, decode_image_bytes, encode_png, resize_bilinear, save_image
from .mesh import Mesh, invalid_cells, mesh_from_text, mesh_to_text, rigid_mesh, scale_mesh
from .pipeline import full_resolution_flow
from .warp import backward_warp

UNDO_DEPTH = 100  # contract requires at least 50


@dataclass
class EditSession:
    id: str
    source: Image
    rig: Mesh
    mesh: Mesh
    revision: int = 0
    undo_stack: list[Mesh] = field(default_factory=list)
    redo_stack: list[Mesh] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot(self) -> tuple[Mesh, int]:
        with self.lock:
            return self.mesh, self.revision


class CreateSessionBody(BaseModel):
    image: str  # base64 PNG or JPEG bytes
    mesh: str | None = None  # optional mesh text to refine


class MoveVertexBody(BaseModel):
    i: int
    j: int
    m: float
    n: float


def _mesh_json(mesh: Mesh) -> dict:
    return {
        "cols": mesh.cols,
        "rows": mesh.rows,
        "width": mesh.width,
        "height": mesh.height,
        "vertices": mesh.vertices.tolist(),
    }


def create_app(data_dir: str = ".", config: Config | None = None, ui_dir: str | None = None) -> FastAPI:
    cfg = config or Config()
    app = FastAPI(title="tiltwarp mesh editor", docs_url=None, redoc_url=None)
    sessions: dict[str, EditSession] = {}
    registry_lock = threading.Lock()

    def _get(session_id: str) -> EditSession:
        with registry_lock:
            s = sessions.get(session_id)
        if s is None:
            raise LookupError(session_id)
        return s

    @app.exception_handler(LookupError)
    async def _unknown_session(request, exc):
        return JSONResponse(status_code=404, content={"detail": f"unknown session {exc}"})

    @app.exception_handler(DataError)
    async def _data_error(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        with registry_lock:
            n = len(sessions)
        return {"status": "ok", "sessions": n}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            blob = base64.b64decode(body.image, validate=True)
        except (binascii.Error, ValueError):
            raise DecodeError("image field is not valid base64")
        source = decode_image_bytes(blob)
        rig = rigid_mesh(source.width, source.height, cfg.mesh_cols, cfg.mesh_rows)
        if body.mesh is not None:
            try:
                mesh = mesh_from_text(body.mesh)
            except FormatError as e:
                raise DataError(f"bad initial mesh: {e}")
            if (mesh.width, mesh.height) != (source.width, source.height):
                raise DataError(
                    f"mesh frame {mesh.width}x{mesh.height} does not match "
                    f"image {source.width}x{source.height}"
                )
            bad = invalid_cells(mesh)
            if bad:
                raise DataError(f"initial mesh has invalid cells: {bad[:8]}")
            if (mesh.cols, mesh.rows) != (rig.cols, rig.rows):
                rig = rigid_mesh(source.width, source.height, mesh.cols, mesh.rows)
        else:
            mesh = rig
        session = EditSession(id=uuid.uuid4().hex, source=source, rig=rig, mesh=mesh)
        with registry_lock:
            sessions[session.id] = session
        return {
            "id": session.id,
            "revision": session.revision,
            "width": source.width,
            "height": source.height,
            "mesh": _mesh_json(mesh),
        }

    @app.get("/sessions/{session_id}/mesh")
    def get_mesh(session_id: str):
        s = _get(session_id)
        mesh, rev = s.snapshot()
        return {"revision": rev, "mesh": _mesh_json(mesh)}

    @app.post("/sessions/{session_id}/move-vertex")
    def move_vertex(session_id: str, body: MoveVertexBody):
        s = _get(session_id)
        if not (0 <= body.i <= s.mesh.cols and 0 <= body.j <= s.mesh.rows):
            raise DataError(f"vertex index ({body.i}, {body.j}) out of range")
        with s.lock:
            verts = s.mesh.vertices.copy()
            verts[body.j, body.i] = (body.m, body.n)
            candidate = Mesh(s.mesh.cols, s.mesh.rows, s.mesh.width, s.mesh.height, verts)
            bad = invalid_cells(candidate)
            if bad:
                return {
                    "accepted": False,
                    "revision": s.revision,
                    "invalid_cells": [[u, v] for u, v in bad],
                }
            s.undo_stack.append(s.mesh)
            if len(s.undo_stack) > UNDO_DEPTH:
                s.undo_stack.pop(0)
            s.redo_stack.clear()
            s.mesh = candidate
            s.revision += 1
            return {"accepted": True, "revision": s.revision}

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        s = _get(session_id)
        with s.lock:
            if not s.undo_stack:
                return {"undone": False, "revision": s.revision, "mesh": _mesh_json(s.mesh)}
            s.redo_stack.append(s.mesh)
            s.mesh = s.undo_stack.pop()
            s.revision += 1
            return {"undone": True, "revision": s.revision, "mesh": _mesh_json(s.mesh)}

    @app.post("/sessions/{session_id}/redo")
    def redo(session_id: str):
        s = _get(session_id)
        with s.lock:
            if not s.redo_stack:
                return {"redone": False, "revision": s.revision, "mesh": _mesh_json(s.mesh)}
            s.undo_stack.append(s.mesh)
            s.mesh = s.redo_stack.pop()
            s.revision += 1
            return {"redone": True, "revision": s.revision, "mesh": _mesh_json(s.mesh)}

    def _output_flow(mesh: Mesh, out_w: int, out_h: int):
        work = scale_mesh(mesh, cfg.work_width, cfg.work_height)
        return full_resolution_flow(out_w, out_h, work)

    def _corrected(s: EditSession, mesh: Mesh, out_w: int, out_h: int, flow=None) -> Image:
        if flow is None:
            flow = _output_flow(mesh, out_w, out_h)
        target = s.source
        if (out_w, out_h) != (s.source.width, s.source.height):
            target = resize_bilinear(s.source, out_w, out_h)
        return backward_warp(target, flow, cfg.boundary, cfg.fill)

    @app.get("/sessions/{session_id}/preview")
    def preview(session_id: str, max_dim: int = 512):
        s = _get(session_id)
        if max_dim < 16:
            raise DataError("max_dim must be at least 16")
        mesh, rev = s.snapshot()
        scale = min(1.0, max_dim / max(s.source.width, s.source.height))
        out_w = max(1, round(s.source.width * scale))
        out_h = max(1, round(s.source.height * scale))
        png = encode_png(_corrected(s, mesh, out_w, out_h))
        return Response(content=png, media_type="image/png", headers={"X-Revision": str(rev)})

    @app.post("/sessions/{session_id}/export")
    def export(session_id: str):
        s = _get(session_id)
        mesh, rev = s.snapshot()
        out_dir = os.path.join(data_dir, "exports", s.id, f"rev{rev:05d}")
        os.makedirs(out_dir, exist_ok=True)
        flow = _output_flow(mesh, s.source.width, s.source.height)
        corrected = _corrected(s, mesh, s.source.width, s.source.height, flow=flow)
        image_path = os.path.join(out_dir, "corrected.png")
        mesh_path = os.path.join(out_dir, "mesh.txt")
        flow_path = os.path.join(out_dir, "flow.twfl")
        tmp = image_path + ".partial"
        save_image(corrected, tmp)
        os.replace(tmp, image_path)
        with open(mesh_path + ".partial", "w", encoding="utf-8") as f:
            f.write(mesh_to_text(mesh))
        os.replace(mesh_path + ".partial", mesh_path)
        write_flow(flow, flow_path + ".partial")
        os.replace(flow_path + ".partial", flow_path)
        return {
            "revision": rev,
            "image_path": image_path,
            "mesh_path": mesh_path,
            "flow_path": flow_path,
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
