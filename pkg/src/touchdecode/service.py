"""Playground service: live decoding sessions over HTTP + WebSocket.

The browser sends intended keypresses; the service injects the user and
sensing error chain (a desk keyboard has no location noise, so the
uncertainty machinery is made observable synthetically), feeds the
decoder session, and streams back the literal text, the suggestion, the
top key likelihoods, and the observation's 1-sigma ellipse.

The service adds no decoding logic: replies are pure projections of the
decoder Session plus the sampled observation, so a scripted keystroke
sequence replays to an identical transcript given the same seed.

Wire format (schema "touchdecode-playground/1"):
  client -> {"type": "keydown", "key": "<char>"|"space"|"backspace"|
             "commit_literal", "client_time": seconds}
  server -> {"schema", "committed", "literal", "suggestion",
             "top_keys": [{"key", "loglik"} x5], "ellipse": {...}|null,
             "observation": {...}|null, "event": str}
Errors arrive as {"schema", "error": str} frames; the connection stays
open.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bundle import ModelBundle, build_models
from .decoder import DecoderConfig, Session, TouchObservation, key_likelihoods
from .gaussians import Gaussian2
from .losses import N_CLASSES, FrameDistribution
from .metrics import error_decomposition, words_per_minute
from .simulator import NoiseProfile, finger_for_key
from .streams import OBS_SCHEMA

WIRE_SCHEMA = "touchdecode-playground/1"
FRAME_STEP = 5  # frames advanced per keypress (30 Hz clock)


class DecoderParams(BaseModel):
    beam_width: int = Field(default=20, ge=1)
    lambda_omission: float = Field(default=-10.0, le=0.0)
    lambda_insertion: float = Field(default=-10.0, le=0.0)
    char_lm_weight: float = Field(default=1.0, ge=0.0)
    word_lm_weight: float = Field(default=1.0, ge=0.0)
    uncertainty_enabled: bool = True


class NoiseParams(BaseModel):
    """sigma_scale scales the entire injected error chain (user and
    sensing), so 0 makes every keypress land exactly on its key center."""

    sigma_scale: float = Field(default=1.0, ge=0.0)
    miss_rate: float = Field(default=0.0, ge=0.0, lt=1.0)
    confusion_rate: float = Field(default=0.0, ge=0.0, lt=1.0)
    calibration_scale: float = Field(default=1.0, gt=0.0)


class CreateSessionRequest(BaseModel):
    decoder: DecoderParams = Field(default_factory=DecoderParams)
    noise: NoiseParams = Field(default_factory=NoiseParams)
    target: str | None = None
    seed: int | None = None


@dataclass
class LiveSession:
    """One playground session: decoder state plus noise injection."""

    session_id: str
    decoder: Session
    profile: NoiseProfile
    rng: np.random.Generator
    target: str | None
    cfg: DecoderConfig
    user_scale: float = 1.0
    frame: int = 0
    prev_finger: int | None = None
    n_keystrokes: int = 0
    first_time: float | None = None
    last_time: float | None = None
    erased: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def sample_observation(self, char: str, keys) -> TouchObservation | None:
        """Intended key -> user error -> sensing error, like the simulator."""
        finger = finger_for_key(char, self.prev_finger)
        self.prev_finger = finger
        g = keys.gaussians[char]
        contact = g.mean.copy()
        if not g.is_deterministic and self.user_scale:
            contact = g.mean + self.user_scale * (
                np.linalg.cholesky(g.cov) @ self.rng.standard_normal(2))
        if self.rng.random() < self.profile.miss_rate:
            self.frame += FRAME_STEP
            return None
        sx, sy = self.profile.sensing_std[finger]
        mean = contact + self.rng.normal(0.0, 1.0, 2) * (sx, sy)
        emitted = finger
        if self.profile.confusion_rate and self.rng.random() < self.profile.confusion_rate:
            from .simulator import _adjacent_finger
            emitted = _adjacent_finger(finger, self.rng)
        probs = np.full(N_CLASSES, 0.1 / (N_CLASSES - 1))
        probs[emitted] = 0.9
        var = (self.profile.calibration_scale * sx ** 2,
               self.profile.calibration_scale * sy ** 2)
        obs = TouchObservation(
            frame=self.frame + 2,
            finger_dist=FrameDistribution(probs=probs),
            location=Gaussian2(mean=mean, cov=np.diag(var)))
        self.frame += FRAME_STEP
        return obs

    def record_keystroke(self, client_time: float):
        self.n_keystrokes += 1
        if self.first_time is None:
            self.first_time = client_time
        self.last_time = client_time

    def metrics(self) -> dict:
        text = self.decoder.committed + self.decoder.literal
        out = {
            "keystrokes": self.n_keystrokes,
            "committed": self.decoder.committed,
            "literal": self.decoder.literal,
            "wpm": None,
            "uer": None,
            "cer": None,
        }
        if self.n_keystrokes >= 2 and self.first_time is not None:
            out["wpm"] = words_per_minute(len(text), self.first_time, self.last_time)
        if self.target is not None:
            c, inf, if_ = error_decomposition(text, self.target, self.erased)
            denom = c + inf + if_
            if denom:
                out["uer"] = inf / denom
                out["cer"] = if_ / denom
        return out


def _obs_payload(obs: TouchObservation | None) -> dict | None:
    if obs is None:
        return None
    return {
        "frame": obs.frame,
        "finger_probs": [float(p) for p in obs.finger_dist.probs],
        "mean": [float(obs.location.mean[0]), float(obs.location.mean[1])],
        "var": [float(obs.location.cov[0, 0]), float(obs.location.cov[1, 1])],
    }


def _ellipse(obs: TouchObservation | None) -> dict | None:
    if obs is None:
        return None
    return {
        "cx": float(obs.location.mean[0]),
        "cy": float(obs.location.mean[1]),
        "rx": float(np.sqrt(obs.location.cov[0, 0])),
        "ry": float(np.sqrt(obs.location.cov[1, 1])),
    }


def create_app(corpus_lines=None, seed: int = 0,
               bundle: ModelBundle | None = None,
               static_dir=None) -> FastAPI:
    app = FastAPI(title="touchdecode playground")
    models = bundle or build_models(corpus_lines=corpus_lines)
    sessions: dict[str, LiveSession] = {}
    counter = itertools.count(1)
    app.state.models = models
    app.state.sessions = sessions

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request, exc):
        fields = [".".join(str(p) for p in err["loc"] if p != "body")
                  for err in exc.errors()]
        return JSONResponse(status_code=400,
                            content={"error": "bad request",
                                     "fields": fields or ["body"]})

    @app.get("/layout")
    def get_layout():
        return models.layout.to_json()

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            cfg = DecoderConfig(
                beam_width=req.decoder.beam_width,
                lambda_omission=req.decoder.lambda_omission,
                lambda_insertion=req.decoder.lambda_insertion,
                char_lm_weight=req.decoder.char_lm_weight,
                word_lm_weight=req.decoder.word_lm_weight,
                uncertainty_enabled=req.decoder.uncertainty_enabled)
        except ValueError as exc:
            return JSONResponse(status_code=400,
                                content={"error": str(exc), "fields": ["decoder"]})
        sid = f"s{next(counter)}"
        session_seed = req.seed if req.seed is not None else seed + len(sessions)
        profile = NoiseProfile(
            sensing_std=NoiseProfile().scaled(req.noise.sigma_scale).sensing_std,
            miss_rate=req.noise.miss_rate,
            ghost_rate=0.0,  # ghosts need no keypress; not injectable live
            confusion_rate=req.noise.confusion_rate,
            calibration_scale=req.noise.calibration_scale)
        decoder = Session(models.keys, models.char_lm, models.word_lm,
                          models.trie, cfg)
        sessions[sid] = LiveSession(
            session_id=sid, decoder=decoder, profile=profile,
            rng=np.random.default_rng(session_seed), target=req.target,
            cfg=cfg, user_scale=req.noise.sigma_scale)
        return {"session_id": sid, "seed": session_seed,
                "observation_schema": OBS_SCHEMA}

    @app.get("/sessions/{sid}/metrics")
    def get_metrics(sid: str):
        live = sessions.get(sid)
        if live is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        with live.lock:
            return live.metrics()

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        if sessions.pop(sid, None) is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        await ws.accept()
        while True:
            try:
                raw = await ws.receive_text()
            except WebSocketDisconnect:
                return
            live = sessions.get(sid)
            if live is None:
                await ws.send_text(json.dumps(
                    {"schema": WIRE_SCHEMA, "error": "unknown session"}))
                continue
            try:
                msg = json.loads(raw)
                reply = _handle_keydown(live, models, msg)
            except (KeyError, ValueError, TypeError) as exc:
                reply = {"schema": WIRE_SCHEMA, "error": f"bad message: {exc}"}
            await ws.send_text(json.dumps(reply))

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="app")

    return app


def _handle_keydown(live: LiveSession, models: ModelBundle, msg: dict) -> dict:
    if msg.get("type") != "keydown":
        raise ValueError(f"unknown message type {msg.get('type')!r}")
    key = msg["key"]
    client_time = float(msg.get("client_time", 0.0))
    with live.lock:
        live.record_keystroke(client_time)
        obs = None
        event = key
        if key == "space":
            live.prev_finger = finger_for_key(" ", live.prev_finger)
            live.decoder.commit_space()
            live.frame += FRAME_STEP
        elif key == "backspace":
            if live.decoder.literal:
                live.erased += 1
            live.decoder.backspace()
        elif key == "commit_literal":
            live.decoder.commit_literal()
        elif isinstance(key, str) and len(key) == 1 and key != " ":
            if key not in models.keys.gaussians:
                raise ValueError(f"key {key!r} not on the keyboard")
            obs = live.sample_observation(key, models.keys)
            event = "feed" if obs is not None else "miss"
            if obs is not None:
                live.decoder.feed(obs)
        else:
            raise ValueError(f"unsupported key {key!r}")

        top_keys = []
        if obs is not None:
            ll = key_likelihoods(obs, models.keys, live.cfg)
            ranked = sorted(ll.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
            top_keys = [{"key": k, "loglik": v} for k, v in ranked]
        state = live.decoder.state()
        return {
            "schema": WIRE_SCHEMA,
            "event": event,
            "committed": state.committed,
            "literal": state.literal,
            "suggestion": state.suggestion,
            "top_keys": top_keys,
            "ellipse": _ellipse(obs),
            "observation": _obs_payload(obs),
        }
