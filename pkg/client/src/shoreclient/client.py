"""TCP client for the shore-following environment protocol.

The wire format is one JSON object per line in both directions. The client
mirrors the server's episode state machine locally, so out-of-order calls
(step before reset, step after done) raise here instead of going on the
wire. One connection drives one sequential episode stream; run several
clients for parallel environments.
"""

from __future__ import annotations

import base64
import json
import socket

import numpy as np

PROTOCOL_VERSION = 1
PROJECTION_SHAPE = (64, 64, 3)


class ProtocolError(RuntimeError):
    """Server rejected a request or broke the one-line-per-request contract."""


class StateError(RuntimeError):
    """Client-side ordering violation (e.g. step before reset)."""


def decode_observation(payload: dict) -> dict:
    obs: dict = {}
    if "continuous" in payload:
        obs["continuous"] = np.asarray(payload["continuous"], dtype=float)
    if "projection" in payload:
        raw = base64.b64decode(payload["projection"])
        obs["projection"] = np.frombuffer(raw, dtype=np.uint8).reshape(PROJECTION_SHAPE)
    return obs


class RemoteEnvironment:
    """reset/step handle over one live connection."""

    def __init__(self, sock: socket.socket, version: int, obs_mode: str, control_hz: float):
        self._sock = sock
        self._file = sock.makefile("rwb")
        self.version = version
        self.obs_mode = obs_mode
        self.control_hz = control_hz
        self._episode_active = False
        self.last_setup: dict | None = None

    @classmethod
    def connect(cls, address: str, timeout: float = 30.0) -> "RemoteEnvironment":
        host, _, port = address.rpartition(":")
        sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=timeout)
        env = cls(sock, PROTOCOL_VERSION, "unknown", 12.0)
        reply = env._call({"cmd": "hello", "version": PROTOCOL_VERSION})
        if reply.get("version") != PROTOCOL_VERSION:
            sock.close()
            raise ProtocolError(f"server speaks version {reply.get('version')}, need {PROTOCOL_VERSION}")
        env.obs_mode = reply["obs_mode"]
        env.control_hz = float(reply.get("control_hz", 12.0))
        return env

    def _call(self, msg: dict) -> dict:
        self._file.write(json.dumps(msg).encode("utf-8") + b"\n")
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        reply = json.loads(line)
        if not reply.get("ok", False):
            raise ProtocolError(reply.get("error", "unspecified server error"))
        return reply

    def reset(self, seed: int, episode: int = 0, include_scan: bool = False) -> dict:
        msg = {"cmd": "reset", "seed": int(seed), "episode": int(episode)}
        if include_scan:
            msg["include_scan"] = True
        reply = self._call(msg)
        self._episode_active = True
        self.last_setup = reply["setup"]
        obs = decode_observation(reply["obs"])
        if "scan" in reply:
            obs["scan"] = np.asarray(reply["scan"], dtype=float)
        return obs

    def step(self, action) -> tuple[dict, float, bool, dict]:
        if not self._episode_active:
            raise StateError("step before reset (or after the episode finished)")
        left, right = float(action[0]), float(action[1])
        reply = self._call({"cmd": "step", "action": [left, right]})
        done = bool(reply["done"])
        if done:
            self._episode_active = False
        obs = decode_observation(reply["obs"])
        if "scan" in reply:
            obs["scan"] = np.asarray(reply["scan"], dtype=float)
        return obs, float(reply["reward"]), done, reply["info"]

    def close(self) -> None:
        try:
            self._file.write(json.dumps({"cmd": "close"}).encode("utf-8") + b"\n")
            self._file.flush()
            self._file.readline()
        except OSError:
            pass
        finally:
            self._sock.close()

    def __enter__(self) -> "RemoteEnvironment":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
