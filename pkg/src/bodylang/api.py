"""Network surface of the platform: the endpoints behind the six client pages,
live performance status push, and append-only persistence.

Transport is plain HTTP with JSON bodies; live status is a server-sent-event
stream with a single consumer per attempt token. Every mutation funnels into
the engine's serialized command queue and lands in the event log, so the
full API-visible state can be rebuilt by replay.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path
from typing import Optional

import uvicorn
from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel

from .codec import canonical_dumps
from .domain import (
    ActionVocabulary,
    AttributeVocabulary,
    Camera,
    RequestConfig,
    RequestState,
    Review,
    SocialRequest,
)
from .engine import GameEngine
from .errors import (
    BadRequestError,
    ConflictError,
    GameError,
    NotFoundError,
    PresenceFailedError,
    UnavailableError,
)
from .eventlog import EventLog
from .presence import DEFAULT_GPS_RADIUS_M, BoundingBox, verify_presence
from .recognizer import ExternalBackend, SyntheticBackend, enacted_frame_ref
from .geometry import polygon_centroid
from .scoring import RecognitionOutput, ScoringParams, compute_score
from .synthetic import SyntheticParams


class LiveChannel:
    """Single-producer, single-consumer ordered status buffer for one attempt."""

    def __init__(self, token: str):
        self.token = token
        self._messages: list[dict] = []
        self._closed = False
        self._consumed = False
        self._cond = threading.Condition()

    def push(self, state: str, **payload) -> None:
        with self._cond:
            self._messages.append({"state": state, **payload})
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def claim(self) -> None:
        with self._cond:
            if self._consumed:
                raise ConflictError("live channel already consumed")
            self._consumed = True

    def stream(self):
        index = 0
        while True:
            with self._cond:
                while index >= len(self._messages) and not self._closed:
                    self._cond.wait(timeout=30.0)
                if index < len(self._messages):
                    message = self._messages[index]
                    index += 1
                else:
                    return
            yield f"data: {canonical_dumps(message)}\n\n"


class ServerState:
    """Everything one deployment owns: engine, log, recognizer, live channels."""

    def __init__(
        self,
        actions: Optional[ActionVocabulary] = None,
        attributes: Optional[AttributeVocabulary] = None,
        scoring_params: Optional[ScoringParams] = None,
        synthetic_params: Optional[SyntheticParams] = None,
        recognizer_endpoint: Optional[str] = None,
        recognizer_seed: int = 0,
        gps_radius_m: float = DEFAULT_GPS_RADIUS_M,
        log_path: Optional[Path] = None,
        simulation_mode: bool = False,
    ):
        self.actions = actions or ActionVocabulary()
        self.attributes = attributes or AttributeVocabulary()
        self.event_log = EventLog(log_path)
        self.engine = GameEngine(
            actions=self.actions,
            attributes=self.attributes,
            scoring_params=scoring_params,
            event_sink=self._sink,
        )
        if recognizer_endpoint:
            self.backend = ExternalBackend(recognizer_endpoint, self.actions, self.attributes)
        else:
            self.backend = SyntheticBackend(
                self.actions,
                self.attributes,
                synthetic_params or SyntheticParams(),
                rng_seed=recognizer_seed,
            )
        self.gps_radius_m = gps_radius_m
        self.simulation_mode = simulation_mode
        self.channels: dict[str, LiveChannel] = {}
        self._attempt_seq = 0
        self._channel_lock = threading.Lock()

    def _sink(self, actor: str, kind: str, data: dict) -> None:
        self.event_log.append(self.engine.now(), actor, kind, data)

    def new_channel(self) -> LiveChannel:
        with self._channel_lock:
            self._attempt_seq += 1
            channel = LiveChannel(f"a{self._attempt_seq:06d}")
            self.channels[channel.token] = channel
            return channel


# -- request bodies -------------------------------------------------------------


class PlayerBody(BaseModel):
    display_name: str


class FriendshipBody(BaseModel):
    player_id: str
    friend_id: str


class CameraBody(BaseModel):
    camera_id: str
    latitude: float
    longitude: float
    indoor: bool
    detection_zone: list[tuple[float, float]]
    frame_width: int
    frame_height: int


class PublishBody(BaseModel):
    action_index: int
    attribute_set: list[int]
    reward: int
    cameras: list[str]


class EnactedBody(BaseModel):
    action_index: int
    attributes: list[bool]


class BoxBody(BaseModel):
    x_min: float
    y_min: float
    x_max: float
    y_max: float


class PerformBody(BaseModel):
    request_id: str
    camera_id: str
    gps_latitude: float
    gps_longitude: float
    enacted: Optional[EnactedBody] = None
    frame_refs: Optional[list[str]] = None
    detected_box: Optional[BoxBody] = None


class ReviewBody(BaseModel):
    performance_id: str
    overall_score: int
    attribute_confirmed: bool
    action_confirmed: bool


class ClockBody(BaseModel):
    now_ms: int


def _request_summary(request: SocialRequest) -> dict:
    return {
        "request_id": request.request_id,
        "requester_id": request.requester_id,
        "config": request.config.to_payload(),
        "reward": request.reward,
        "state": request.state.value,
        "created_at": request.created_at,
        "allowed_cameras": sorted(request.allowed_cameras),
        "fulfilled_by": request.fulfilled_by,
    }


def create_app(state: ServerState, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="body-language game server")
    app.state.server = state
    engine = state.engine

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(GameError)
    async def game_error_handler(_: Request, exc: GameError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": exc.code, "detail": str(exc)},
        )

    def caller_id(x_player_id: Optional[str]) -> str:
        if not x_player_id:
            raise BadRequestError("missing X-Player-Id header")
        if x_player_id not in engine.players:
            raise NotFoundError(f"unknown player {x_player_id}")
        return x_player_id

    # -- registration and social graph --

    @app.post("/players", status_code=201)
    def register_player(body: PlayerBody):
        player = engine.register_player(body.display_name)
        return player.to_payload()

    @app.get("/players/{player_id}")
    def get_player(player_id: str):
        player = engine.players.get(player_id)
        if player is None:
            raise NotFoundError(f"unknown player {player_id}")
        return player.to_payload()

    @app.post("/players/{player_id}/allocation", status_code=201)
    def allocate(player_id: str):
        amount = engine.allocate_initial(player_id)
        return {"amount": amount, "ep_balance": engine.players[player_id].ep_balance}

    @app.post("/friendships", status_code=201)
    def add_friendship(body: FriendshipBody):
        added = engine.add_friend(body.player_id, body.friend_id)
        return {"added": added}

    @app.post("/cameras", status_code=201)
    def register_camera(body: CameraBody):
        camera = Camera(
            camera_id=body.camera_id,
            latitude=body.latitude,
            longitude=body.longitude,
            indoor=body.indoor,
            detection_zone=tuple((x, y) for x, y in body.detection_zone),
            frame_width=body.frame_width,
            frame_height=body.frame_height,
        )
        engine.register_camera(camera)
        return camera.to_payload()

    @app.get("/cameras")
    def list_cameras():
        return [c.to_payload() for c in engine.cameras.values()]

    # -- browsing --

    @app.get("/map")
    def get_map(x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        friends = engine.players[caller].friend_ids
        cameras = []
        for camera in engine.cameras.values():
            visible = [
                _request_summary(r)
                for r in engine.requests.values()
                if r.state is RequestState.OPEN
                and camera.camera_id in r.allowed_cameras
                and r.requester_id in friends
            ]
            visible.sort(key=lambda s: s["request_id"])
            cameras.append(
                {
                    "camera_id": camera.camera_id,
                    "latitude": camera.latitude,
                    "longitude": camera.longitude,
                    "indoor": camera.indoor,
                    "open_request_count": len(visible),
                    "requests": visible,
                }
            )
        return {"cameras": cameras}

    @app.get("/requests")
    def list_requests(
        camera: Optional[str] = None,
        state_filter: Optional[str] = None,
        x_player_id: Optional[str] = Header(default=None),
    ):
        caller = caller_id(x_player_id)
        friends = engine.players[caller].friend_ids
        out = []
        for request in engine.requests.values():
            mine = request.requester_id == caller
            visible = mine or (
                request.requester_id in friends and request.state is RequestState.OPEN
            )
            if not visible:
                continue
            if camera is not None and camera not in request.allowed_cameras:
                continue
            if state_filter is not None and request.state.value != state_filter:
                continue
            out.append(_request_summary(request))
        out.sort(key=lambda s: s["request_id"])
        return {"requests": out}

    @app.post("/requests", status_code=201)
    def publish_request(body: PublishBody, x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        config = RequestConfig(
            action_index=body.action_index, attribute_set=frozenset(body.attribute_set)
        )
        request = engine.publish_request(caller, config, body.reward, body.cameras)
        return _request_summary(request)

    @app.get("/requests/{request_id}")
    def get_request(request_id: str, x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        request = engine.requests.get(request_id)
        if request is None:
            raise NotFoundError(f"unknown request {request_id}")
        friends = engine.players[caller].friend_ids
        if request.requester_id != caller and request.requester_id not in friends:
            raise NotFoundError(f"unknown request {request_id}")
        return _request_summary(request)

    @app.delete("/requests/{request_id}")
    def cancel_request(request_id: str, x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        refund = engine.cancel_request(caller, request_id)
        return {"refund": refund, "ep_balance": engine.players[caller].ep_balance}

    # -- performing --

    def _synthesize_box(camera: Camera) -> BoundingBox:
        # the simulated detector plants the subject at the zone centroid
        cx, cy = polygon_centroid(camera.detection_zone)
        return BoundingBox(
            x_min=max(0.0, cx - 40.0),
            y_min=max(0.0, cy - 160.0),
            x_max=min(float(camera.frame_width), cx + 40.0),
            y_max=cy,
        )

    @app.post("/performances", status_code=201)
    def perform(body: PerformBody, x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        request = engine.requests.get(body.request_id)
        if request is None:
            raise NotFoundError(f"unknown request {body.request_id}")
        if caller not in engine.players[request.requester_id].friend_ids:
            raise NotFoundError(f"unknown request {body.request_id}")
        camera = engine.cameras.get(body.camera_id)
        if camera is None:
            raise NotFoundError(f"unknown camera {body.camera_id}")

        channel = state.new_channel()
        channel.push("DETECTING", request_id=body.request_id, camera_id=body.camera_id)
        try:
            within = (
                verify_presence(
                    body.gps_latitude, body.gps_longitude, camera, None, state.gps_radius_m
                ).within_radius
            )
            if body.detected_box is not None:
                box = BoundingBox(**body.detected_box.model_dump())
            elif within:
                box = _synthesize_box(camera)
            else:
                box = None
            presence = verify_presence(
                body.gps_latitude, body.gps_longitude, camera, box, state.gps_radius_m
            )
            if not presence.passed:
                raise PresenceFailedError(
                    f"within_radius={presence.within_radius}, in_zone={presence.in_zone}"
                )
            channel.push("DETECTED", box=box.to_payload() if box else None)
            channel.push("EVALUATING")

            if body.enacted is not None:
                frame_refs = [
                    enacted_frame_ref(body.enacted.action_index, body.enacted.attributes)
                ]
            elif body.frame_refs:
                frame_refs = body.frame_refs
            else:
                raise BadRequestError("either enacted ground truth or frame_refs required")
            rec = state.backend.recognize(channel.token, body.camera_id, frame_refs)
            performance = engine.attempt_performance(
                caller, body.request_id, body.camera_id, presence, rec
            )
        except GameError as exc:
            channel.push("FAILED", error=exc.code, detail=str(exc))
            channel.close()
            return JSONResponse(
                status_code=exc.http_status,
                content={"error": exc.code, "detail": str(exc), "live_token": channel.token},
            )
        result = compute_score(rec, request.config, engine.scoring_params)
        channel.push(
            "RESULT",
            performance_id=performance.performance_id,
            score=performance.score,
            verdict=performance.verdict.value,
        )
        channel.close()
        return {
            "performance": performance.to_payload(),
            "action_term": result.action_term,
            "attribute_term": result.attribute_term,
            "live_token": channel.token,
            "ep_balance": engine.players[caller].ep_balance,
        }

    @app.get("/live/{token}")
    def live_status(token: str):
        channel = state.channels.get(token)
        if channel is None:
            raise NotFoundError(f"unknown live channel {token}")
        channel.claim()
        return StreamingResponse(channel.stream(), media_type="text/event-stream")

    @app.get("/performances/{performance_id}")
    def get_performance(performance_id: str, x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        performance = engine.performances.get(performance_id)
        if performance is None:
            raise NotFoundError(f"unknown performance {performance_id}")
        request = engine.requests[performance.request_id]
        if caller not in (performance.performer_id, request.requester_id):
            raise NotFoundError(f"unknown performance {performance_id}")
        rec = RecognitionOutput(
            action_probs=performance.action_probs,
            attribute_probs=performance.attribute_probs,
        )
        result = compute_score(rec, request.config, engine.scoring_params)
        payload = performance.to_payload()
        payload["action_term"] = result.action_term
        payload["attribute_term"] = result.attribute_term
        return payload

    # -- reviewing and rankings --

    @app.post("/reviews", status_code=201)
    def submit_review(body: ReviewBody, x_player_id: Optional[str] = Header(default=None)):
        caller = caller_id(x_player_id)
        review = Review(
            overall_score=body.overall_score,
            attribute_confirmed=body.attribute_confirmed,
            action_confirmed=body.action_confirmed,
            reviewed_at=engine.now(),
        )
        medal_count = engine.submit_review(caller, body.performance_id, review)
        return {"medal_count": medal_count}

    @app.get("/leaderboard")
    def leaderboard():
        return {"entries": [e.to_payload() for e in engine.leaderboard()]}

    @app.get("/ledger")
    def ledger():
        snapshot = engine.ledger()
        payload = snapshot.to_payload()
        payload["conserved"] = snapshot.conserved
        return payload

    # -- operations --

    @app.get("/events", response_class=PlainTextResponse)
    def events(since: int = 0):
        lines = [r.to_line() for r in state.event_log.records(since)]
        return "\n".join(lines) + ("\n" if lines else "")

    @app.post("/clock")
    def set_clock(body: ClockBody):
        if not state.simulation_mode:
            raise ConflictError("logical clock only available in simulation mode")
        engine.set_clock(body.now_ms)
        return {"now_ms": engine.now()}

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "players": len(engine.players),
            "events": len(state.event_log),
            "recognizer": state.backend.descriptor.kind,
        }

    return app


class EmbeddedServer:
    """Uvicorn in a background thread; used by the simulator and tests."""

    def __init__(self, app: FastAPI, host: str = "127.0.0.1", port: int = 0):
        self._config = uvicorn.Config(app, host=host, port=port, log_level="warning")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self.host = host
        self.port = port

    def start(self, timeout_s: float = 10.0) -> "EmbeddedServer":
        self._thread.start()
        deadline = time.time() + timeout_s
        while not self._server.started:
            if time.time() > deadline:
                raise UnavailableError("embedded server failed to start")
            time.sleep(0.01)
        sock = self._server.servers[0].sockets[0]
        self.port = sock.getsockname()[1]
        return self

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)
