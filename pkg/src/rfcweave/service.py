"""HTTP service exposing pipeline run artifacts to the browser UI.

The service is read-only over a runs directory except for per-run layout
documents, which the UI may save and reload.  All data endpoints live under
/api; anything else is served from the optional static directory so a built
UI bundle can sit at the site root.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .graph import edge_id as make_edge_id

_RUN_FILES = ("manifest.json", "graph.json")


def _is_run_dir(path: Path) -> bool:
    return all((path / name).is_file() for name in _RUN_FILES)


class RunStore:
    """File-backed access to pipeline runs; reads go to disk on each request
    so freshly produced runs show up without a restart."""

    def __init__(self, runs_root: str | Path):
        self.root = Path(runs_root)

    def list_runs(self) -> list[dict]:
        if not self.root.is_dir():
            return []
        entries = []
        for child in sorted(self.root.iterdir()):
            if child.is_dir() and _is_run_dir(child):
                manifest = json.loads((child / "manifest.json").read_text(encoding="utf-8"))
                entries.append(
                    {
                        "run_id": manifest.get("run_id", child.name),
                        "rfc_id": manifest.get("rfc_id", ""),
                        "status": manifest.get("status", ""),
                        "generated_at": manifest.get("generated_at", ""),
                    }
                )
        return entries

    def run_dir(self, run_id: str) -> Path:
        # run ids come from manifests we wrote, but never trust path segments
        if "/" in run_id or "\\" in run_id or run_id in ("", ".", ".."):
            raise HTTPException(status_code=404, detail="unknown run")
        path = self.root / run_id
        if not (path.is_dir() and _is_run_dir(path)):
            raise HTTPException(status_code=404, detail="unknown run")
        return path

    def manifest(self, run_id: str) -> dict:
        return json.loads((self.run_dir(run_id) / "manifest.json").read_text(encoding="utf-8"))

    def graph(self, run_id: str) -> dict:
        return json.loads((self.run_dir(run_id) / "graph.json").read_text(encoding="utf-8"))

    def rfc_text(self, run_id: str) -> str:
        path = self.run_dir(run_id) / "rfc.txt"
        if not path.is_file():
            raise HTTPException(status_code=404, detail="run has no rfc text")
        return path.read_text(encoding="utf-8")

    def segments(self, run_id: str) -> list[dict]:
        path = self.run_dir(run_id) / "segments.jsonl"
        if not path.is_file():
            return []
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def layout_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "layout.json"


def create_app(runs_root: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    store = RunStore(runs_root)
    app = FastAPI(title="rfcweave", docs_url=None, redoc_url=None)

    def status_header(response: Response, run_id: str) -> None:
        response.headers["X-Run-Status"] = store.manifest(run_id).get("status", "")

    @app.get("/api/runs")
    def list_runs() -> list[dict]:
        return store.list_runs()

    @app.get("/api/runs/{run_id}/graph")
    def get_graph(run_id: str, response: Response) -> dict:
        graph = store.graph(run_id)
        for t in graph.get("transitions", []):
            t["edge_id"] = make_edge_id(t["source"], t["target"], t["event"])
        status_header(response, run_id)
        return graph

    @app.get("/api/runs/{run_id}/rfc")
    def get_rfc(run_id: str) -> PlainTextResponse:
        text = store.rfc_text(run_id)
        resp = PlainTextResponse(text)
        resp.headers["X-Run-Status"] = store.manifest(run_id).get("status", "")
        return resp

    @app.get("/api/runs/{run_id}/edges/{edge_id}/grounding")
    def get_grounding(run_id: str, edge_id: str, response: Response) -> dict:
        graph = store.graph(run_id)
        found = None
        for t in graph.get("transitions", []):
            if make_edge_id(t["source"], t["target"], t["event"]) == edge_id:
                found = t
                break
        if found is None:
            raise HTTPException(status_code=404, detail="unknown edge")
        segment_text = {s["segment_id"]: s.get("text", "") for s in store.segments(run_id)}
        provenance = []
        cited_ids = []
        for entry in found.get("provenance", []):
            sid = entry["segment_id"]
            cited_ids.append(sid)
            provenance.append(
                {
                    "segment_id": sid,
                    "spans": [
                        {
                            "span": list(sp["span"]),
                            "quote": sp["quote"],
                            "match_kind": sp["match_kind"],
                            "similarity": sp["similarity"],
                        }
                        for sp in entry.get("spans", [])
                    ],
                }
            )
        status_header(response, run_id)
        # document order, so a client stepping through spans walks the RFC
        # top to bottom
        flat_spans = sorted(
            (
                dict(sp, segment_id=p["segment_id"])
                for p in provenance
                for sp in p["spans"]
            ),
            key=lambda sp: (sp["span"][0], sp["span"][1]),
        )
        return {
            "edge_id": edge_id,
            "source": found["source"],
            "target": found["target"],
            "event": found["event"],
            "origin": found["origin"],
            "reasoning": found.get("reasoning", ""),
            "ungrounded": found.get("ungrounded", False),
            "conditions": found.get("conditions", []),
            "actions": found.get("actions", []),
            "spans": flat_spans,
            "provenance": provenance,
            "segments": [
                {"segment_id": sid, "text": segment_text.get(sid, "")}
                for sid in cited_ids
            ],
        }

    @app.get("/api/runs/{run_id}/layout")
    def get_layout(run_id: str) -> dict:
        path = store.layout_path(run_id)
        if not path.is_file():
            raise HTTPException(status_code=404, detail="no saved layout")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.put("/api/runs/{run_id}/layout")
    async def put_layout(run_id: str, request: Request) -> JSONResponse:
        path = store.layout_path(run_id)
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise HTTPException(status_code=400, detail="body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("positions"), dict):
            raise HTTPException(status_code=400, detail="expected object with 'positions'")
        graph = store.graph(run_id)
        known_states = {s["name"] for s in graph.get("states", [])}
        known_ids = known_states | {
            make_edge_id(t["source"], t["target"], t["event"])
            for t in graph.get("transitions", [])
        }
        unknown = sorted(set(body["positions"]) - known_states)
        if unknown:
            raise HTTPException(
                status_code=422, detail=f"unknown states: {', '.join(unknown)}"
            )
        positions = {}
        for name, pos in body["positions"].items():
            ok = (
                isinstance(pos, dict)
                and isinstance(pos.get("x"), (int, float))
                and isinstance(pos.get("y"), (int, float))
                and math.isfinite(pos["x"])
                and math.isfinite(pos["y"])
            )
            if not ok:
                raise HTTPException(
                    status_code=422, detail=f"bad position for state {name!r}"
                )
            positions[name] = {"x": float(pos["x"]), "y": float(pos["y"])}
        doc = {"run_id": run_id, "positions": positions}
        labels = body.get("labels")
        if labels is not None:
            if not isinstance(labels, dict):
                raise HTTPException(status_code=400, detail="'labels' must be an object")
            bad = sorted(set(labels) - known_ids)
            if bad:
                raise HTTPException(
                    status_code=422, detail=f"unknown ids in labels: {', '.join(bad)}"
                )
            doc["labels"] = {k: str(v) for k, v in labels.items()}
        if isinstance(body.get("view"), dict):
            doc["view"] = body["view"]
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, path)
        return JSONResponse(doc)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
