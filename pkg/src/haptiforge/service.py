"""HTTP service exposing the device runtime to the operator console.

JSON request/response endpoints plus a server-sent-event stream of state
revisions and trial prompts; see docs/protocol.md for the full contract.
Every mutating endpoint goes through the runtime's safety path; nothing
here can bypass pattern validation or the codec amplitude cap.
"""

from __future__ import annotations

import asyncio
import json

from fastapi import FastAPI, Request
from fastapi.responses import PlainTextResponse, JSONResponse, StreamingResponse

from .errors import BadParameter, HaptiforgeError, OutOfOrder
from .interaction import ContactEvent
from .runtime import DeviceRuntime
from .session import SessionConfig
from .stimulator import PulsePattern

STREAM_POLL_S = 0.02


def _field(doc: dict, name: str, cast):
    """Required body field with a typed error instead of a bare KeyError."""
    if not isinstance(doc, dict) or name not in doc:
        raise BadParameter(f"missing field {name!r}")
    try:
        return cast(doc[name])
    except (TypeError, ValueError) as exc:
        raise BadParameter(f"field {name!r}: {exc}") from exc


def create_app(runtime: DeviceRuntime) -> FastAPI:
    app = FastAPI(title="haptiforge service")

    @app.exception_handler(HaptiforgeError)
    async def _typed_error(request: Request, exc: HaptiforgeError):
        status = 409 if isinstance(exc, OutOfOrder) else 422
        return JSONResponse(status_code=status,
                            content={"error": exc.name, "detail": str(exc)})

    @app.get("/api/state")
    def get_state():
        return runtime.snapshot()

    @app.get("/api/layout")
    def get_layout():
        if runtime.layout_doc is None:
            return JSONResponse(status_code=404,
                                content={"error": "NoLayout",
                                         "detail": "serve started without a layout"})
        return runtime.layout_doc

    @app.get("/api/surface")
    def get_surface():
        return runtime.surface.to_dict()

    @app.get("/api/waveform")
    def get_waveform(duration_ms: float = 100.0, dt_us: float = 1.0):
        return runtime.waveform(duration_ms=duration_ms, dt_us=dt_us)

    @app.post("/api/events")
    def post_event(doc: dict):
        event = ContactEvent.from_dict(doc)
        return {"revision": runtime.apply_contact(event)}

    @app.post("/api/patterns")
    def post_pattern(doc: dict):
        snapshot = runtime.snapshot()
        pattern = PulsePattern(
            channel=_field(doc, "channel", int),
            frequency_hz=_field(doc, "frequency_hz", float),
            duty=_field(doc, "duty", float),
            amplitude_ma=float(doc.get("amplitude_ma",
                                       snapshot["calibrated_amplitude_ma"])),
            duration_ms=float(doc.get("duration_ms", 1000.0)),
        )
        return {"revision": runtime.submit_pattern(pattern)}

    @app.post("/api/stop")
    def post_stop(doc: dict):
        return {"revision": runtime.stop_channel(_field(doc, "channel", int))}

    @app.post("/api/stop_all")
    def post_stop_all():
        return {"revision": runtime.stop_all()}

    @app.post("/api/amplitude")
    def post_amplitude(doc: dict):
        return {"revision": runtime.set_amplitude(_field(doc, "amplitude_ma", float))}

    @app.post("/api/calibration/start")
    def post_calibration_start():
        return runtime.calibration_start()

    @app.post("/api/calibration/respond")
    def post_calibration_respond(doc: dict):
        return runtime.calibration_respond(_field(doc, "response", str))

    @app.post("/api/session/start")
    def post_session_start(doc: dict):
        config = SessionConfig.from_dict(doc.get("config", {}))
        prompt = runtime.session_start(config, path=doc.get("path"))
        return {"prompt": prompt, "state": runtime.snapshot()["session"]}

    @app.post("/api/session/advance")
    def post_session_advance():
        return {"prompt": runtime.session_advance()}

    @app.post("/api/session/rating")
    def post_session_rating(doc: dict):
        prompt = runtime.session_rate(_field(doc, "trial", int),
                                      _field(doc, "rating", int))
        return {"prompt": prompt, "state": runtime.snapshot()["session"]}

    @app.get("/api/session/export.csv")
    def get_session_csv():
        return PlainTextResponse(runtime.session_csv(), media_type="text/csv")

    @app.get("/api/stream")
    async def get_stream(request: Request, max_events: int = 0,
                         since: int = -1):
        async def gen():
            # default: subscribe from now; pass ?since=N to replay the log
            cursor = runtime.latest_event_seq() if since < 0 else since
            sent = 0
            yield "event: hello\ndata: " + json.dumps(
                {"revision": runtime.snapshot()["revision"]}) + "\n\n"
            while True:
                if await request.is_disconnected():
                    return
                for ev in runtime.events_since(cursor):
                    cursor = ev["seq"]
                    yield f"event: {ev['type']}\ndata: " + json.dumps(ev) + "\n\n"
                    sent += 1
                    if max_events and sent >= max_events:
                        return
                await asyncio.sleep(STREAM_POLL_S)

        return StreamingResponse(gen(), media_type="text/event-stream")

    return app
