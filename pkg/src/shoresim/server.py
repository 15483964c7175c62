"""Newline-delimited JSON environment server.

Each TCP connection owns one independent episode session: a client says
hello, resets with (seed, episode), then alternates step/response until done.
Every request gets exactly one JSON-object response line with an "ok" flag;
malformed or out-of-order requests produce error responses without killing
the session. Sessions are isolated; parallel environments are parallel
connections. Optionally every completed served episode is appended to a
metrics CSV, so a remote client's run leaves the same artifacts as a local
batch run.
"""

from __future__ import annotations

import base64
import json
import os
import socketserver
import threading

from .config import RunConfig
from .episode import EpisodeEngine, StepResult
from .metrics import CSV_COLUMNS, episode_metrics
from .recording import make_record

PROTOCOL_VERSION = 1
DEFAULT_ADDRESS = "127.0.0.1:7421"
ADDRESS_ENV_VAR = "SHORESIM_ADDR"


def default_address() -> str:
    return os.environ.get(ADDRESS_ENV_VAR, DEFAULT_ADDRESS)


def parse_address(address: str) -> tuple[str, int]:
    host, _, port = address.rpartition(":")
    return host or "127.0.0.1", int(port)


def encode_observation(obs: dict) -> dict:
    """JSON-safe observation payload: float lists and base64 raw RGB."""
    out: dict = {}
    if "continuous" in obs:
        out["continuous"] = [float(v) for v in obs["continuous"]]
    if "projection" in obs:
        out["projection"] = base64.b64encode(obs["projection"].to_bytes()).decode("ascii")
    return out


class ProtocolSession:
    """Protocol state machine around one EpisodeEngine."""

    def __init__(self, run_config: RunConfig, on_episode_done=None):
        self.run_config = run_config
        self.env = run_config.build_environment()
        self.engine = EpisodeEngine(
            self.env,
            params=run_config.dynamics,
            episode_cfg=run_config.episode,
            dr_cfg=run_config.dr,
            reward_cfg=run_config.reward,
            noise_model=run_config.lidar_noise,
        )
        self.on_episode_done = on_episode_done
        self._active = False
        self._include_scan = False
        self._episode_label = "0"
        self._records: list[dict] = []
        self._t = 0

    def handle(self, msg: dict) -> dict:
        cmd = msg.get("cmd")
        if cmd == "hello":
            version = msg.get("version", PROTOCOL_VERSION)
            if version != PROTOCOL_VERSION:
                return {"ok": False, "error": f"unsupported protocol version {version}"}
            return {
                "ok": True,
                "version": PROTOCOL_VERSION,
                "obs_mode": self.run_config.episode.observation_mode,
                "control_hz": self.run_config.episode.control_hz,
            }
        if cmd == "reset":
            try:
                seed = int(msg["seed"])
                episode = int(msg.get("episode", 0))
            except (KeyError, TypeError, ValueError):
                return {"ok": False, "error": "reset needs integer 'seed' (and optional 'episode')"}
            obs = self.engine.reset(seed, episode)
            self._active = True
            self._include_scan = bool(msg.get("include_scan", False))
            self._episode_label = str(episode)
            self._records = []
            self._t = 0
            reply = {
                "ok": True,
                "obs": encode_observation(obs),
                "setup": self.engine.setup.to_dict(),
            }
            if self._include_scan:
                reply["scan"] = [float(r) for r in self.engine.last_scan.ranges]
            return reply
        if cmd == "step":
            if not self._active:
                return {"ok": False, "error": "no active episode: reset first"}
            action = msg.get("action")
            if (
                not isinstance(action, (list, tuple))
                or len(action) != 2
                or not all(isinstance(a, (int, float)) for a in action)
            ):
                return {"ok": False, "error": "step needs 'action': [left, right]"}
            result = self.engine.step((float(action[0]), float(action[1])))
            self._t += 1
            self._records.append(make_record(self._t, action, result))
            if result.done:
                self._active = False
                self._finish_episode()
            return self._step_response(result)
        if cmd == "close":
            return {"ok": True, "closing": True}
        return {"ok": False, "error": f"unknown cmd {cmd!r}"}

    def _step_response(self, result: StepResult) -> dict:
        info = {k: (float(v) if isinstance(v, float) else v) for k, v in result.info.items()}
        reply = {
            "ok": True,
            "obs": encode_observation(result.observation),
            "reward": float(result.reward.total),
            "reward_terms": result.reward.to_dict(),
            "done": result.done,
            "info": info,
        }
        if self._include_scan:
            reply["scan"] = [float(r) for r in self.engine.last_scan.ranges]
        return reply

    def _finish_episode(self) -> None:
        if self.on_episode_done and self._records:
            spawn = self.engine.setup.spawn
            m = episode_metrics(
                self._records,
                initial_pose=(spawn.x, spawn.y),
                control_hz=self.engine.episode_cfg.control_hz,
                episode=self._episode_label,
            )
            self.on_episode_done(m)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = ProtocolSession(self.server.run_config, self.server.record_episode)
        while True:
            line = self.rfile.readline()
            if not line:
                return  # client went away; session state dies with the connection
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
                if not isinstance(msg, dict):
                    raise ValueError("expected a JSON object")
            except ValueError as exc:
                self._send({"ok": False, "error": f"bad json: {exc}"})
                continue
            try:
                response = session.handle(msg)
            except Exception as exc:  # session survives handler errors
                response = {"ok": False, "error": str(exc)}
            self._send(response)
            if response.get("closing"):
                return

    def _send(self, payload: dict) -> None:
        self.wfile.write(json.dumps(payload).encode("utf-8") + b"\n")
        self.wfile.flush()


class EnvironmentServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], run_config: RunConfig, metrics_path=None):
        super().__init__(address, _Handler)
        self.run_config = run_config
        self.metrics_path = metrics_path
        self._metrics_lock = threading.Lock()
        if metrics_path:
            with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
                fh.write(",".join(CSV_COLUMNS) + "\n")

    def record_episode(self, m) -> None:
        if not self.metrics_path:
            return
        with self._metrics_lock:
            with open(self.metrics_path, "a", newline="", encoding="utf-8") as fh:
                fh.write(",".join(str(c) for c in m.row()) + "\n")


def serve(address: str, run_config: RunConfig, metrics_path=None) -> EnvironmentServer:
    """Bind and return the server; caller runs serve_forever()/shutdown()."""
    return EnvironmentServer(parse_address(address), run_config, metrics_path)
