import base64
import json
import socket
import threading

import numpy as np
import pytest

from shoresim.agents import PDShoreFollower
from shoresim.cli import main as cli_main
from shoresim.config import EnvironmentSpec, RunConfig, load_run_config, save_run_config
from shoresim.episode import EpisodeConfig, EpisodeEngine
from shoresim.metrics import read_metrics_csv
from shoresim.recording import read_episode_jsonl, run_episode
from shoresim.server import ProtocolSession, serve


def small_run_config(mode="continuous", max_steps=80):
    cfg = RunConfig()
    cfg.environment = EnvironmentSpec(kind="circle", radius=80.0)
    cfg.episode = EpisodeConfig(max_steps=max_steps, observation_mode=mode)
    return cfg


class WireClient:
    """Minimal line-oriented client used only by the tests."""

    def __init__(self, address):
        self.sock = socket.create_connection(address, timeout=30)
        self.file = self.sock.makefile("rwb")

    def call(self, **msg):
        self.file.write(json.dumps(msg).encode() + b"\n")
        self.file.flush()
        return json.loads(self.file.readline())

    def send_raw(self, data: bytes):
        self.file.write(data)
        self.file.flush()
        return json.loads(self.file.readline())

    def close(self):
        self.sock.close()


@pytest.fixture()
def server():
    srv = serve("127.0.0.1:0", small_run_config())
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


class TestSession:
    def test_hello_handshake(self):
        session = ProtocolSession(small_run_config())
        resp = session.handle({"cmd": "hello", "version": 1})
        assert resp == {"ok": True, "version": 1, "obs_mode": "continuous", "control_hz": 12.0}

    def test_version_mismatch(self):
        session = ProtocolSession(small_run_config())
        resp = session.handle({"cmd": "hello", "version": 99})
        assert not resp["ok"]

    def test_step_before_reset_is_an_error(self):
        session = ProtocolSession(small_run_config())
        resp = session.handle({"cmd": "step", "action": [0.0, 0.0]})
        assert not resp["ok"] and "reset" in resp["error"]

    def test_step_after_done_is_an_error(self):
        session = ProtocolSession(small_run_config(max_steps=2))
        session.handle({"cmd": "reset", "seed": 0, "episode": 0})
        session.handle({"cmd": "step", "action": [0.3, 0.3]})
        last = session.handle({"cmd": "step", "action": [0.3, 0.3]})
        assert last["done"]
        resp = session.handle({"cmd": "step", "action": [0.3, 0.3]})
        assert not resp["ok"]

    def test_unknown_command(self):
        session = ProtocolSession(small_run_config())
        assert not session.handle({"cmd": "dance"})["ok"]

    def test_bad_action_payload(self):
        session = ProtocolSession(small_run_config())
        session.handle({"cmd": "reset", "seed": 0})
        assert not session.handle({"cmd": "step", "action": [1.0]})["ok"]
        assert not session.handle({"cmd": "step", "action": "hard to port"})["ok"]

    def test_observation_payloads(self):
        session = ProtocolSession(small_run_config(mode="both"))
        resp = session.handle({"cmd": "reset", "seed": 1, "episode": 0})
        assert resp["ok"]
        assert len(resp["obs"]["continuous"]) == 256
        raw = base64.b64decode(resp["obs"]["projection"])
        assert len(raw) == 64 * 64 * 3
        assert "spawn" in resp["setup"]
        assert "scan" not in resp

    def test_raw_scan_on_request(self):
        session = ProtocolSession(small_run_config())
        resp = session.handle({"cmd": "reset", "seed": 1, "episode": 0, "include_scan": True})
        assert len(resp["scan"]) == 540
        step = session.handle({"cmd": "step", "action": [0.4, 0.4]})
        assert len(step["scan"]) == 540
        ranges = np.asarray(step["scan"])
        hits = ranges[ranges > 0]
        assert np.all(hits <= 20.0)


class TestWire:
    def test_handshake_and_episode(self, server):
        client = WireClient(server.server_address)
        assert client.call(cmd="hello", version=1)["version"] == 1
        reset = client.call(cmd="reset", seed=5, episode=0)
        assert reset["ok"]
        step = client.call(cmd="step", action=[0.5, 0.5])
        assert step["ok"] and "reward" in step and not step["done"]
        assert client.call(cmd="close")["ok"]
        client.close()

    def test_malformed_line_keeps_session_alive(self, server):
        client = WireClient(server.server_address)
        resp = client.send_raw(b"{\n")
        assert not resp["ok"] and "json" in resp["error"]
        assert client.call(cmd="hello", version=1)["ok"]
        client.close()

    def test_sessions_are_isolated(self, server):
        a = WireClient(server.server_address)
        b = WireClient(server.server_address)
        ra = a.call(cmd="reset", seed=1, episode=0)
        rb = b.call(cmd="reset", seed=2, episode=0)
        assert ra["setup"]["spawn"] != rb["setup"]["spawn"]
        a.call(cmd="step", action=[0.9, 0.9])
        # b's episode is untouched by a's stepping; same seed reproduces b exactly
        c = WireClient(server.server_address)
        rc = c.call(cmd="reset", seed=2, episode=0)
        assert rc["setup"] == rb["setup"]
        sb = b.call(cmd="step", action=[0.4, 0.4])
        sc = c.call(cmd="step", action=[0.4, 0.4])
        assert sb == sc
        for cl in (a, b, c):
            cl.close()

    def test_abrupt_disconnect_leaves_server_healthy(self, server):
        victim = WireClient(server.server_address)
        victim.call(cmd="reset", seed=9, episode=0)
        victim.call(cmd="step", action=[0.7, 0.7])
        victim.sock.close()  # vanish mid-episode, no close command
        survivor = WireClient(server.server_address)
        assert survivor.call(cmd="hello", version=1)["ok"]
        assert survivor.call(cmd="reset", seed=9, episode=0)["ok"]
        survivor.close()

    def test_loopback_equivalence_with_scripted_agent(self, server):
        run_cfg = small_run_config()
        env = run_cfg.build_environment()
        for seed in range(5):
            engine = EpisodeEngine(env, episode_cfg=run_cfg.episode, dr_cfg=run_cfg.dr)
            local = run_episode(engine, PDShoreFollower(), seed, 0)

            client = WireClient(server.server_address)
            agent = PDShoreFollower()
            agent.begin_episode(seed, 0)
            resp = client.call(cmd="reset", seed=seed, episode=0)
            obs = resp["obs"]
            wire_rewards = []
            wire_poses = []
            done = False
            while not done:
                action = agent.act({"continuous": np.asarray(obs["continuous"])})
                resp = client.call(cmd="step", action=[action[0], action[1]])
                wire_rewards.append(resp["reward"])
                wire_poses.append((resp["info"]["x"], resp["info"]["y"]))
                obs = resp["obs"]
                done = resp["done"]
            client.close()

            local_rewards = [r["reward"] for r in local.records]
            local_poses = [(r["x"], r["y"]) for r in local.records]
            assert wire_rewards == local_rewards
            assert wire_poses == local_poses

    def test_server_side_metrics_csv(self, tmp_path):
        path = tmp_path / "served.csv"
        srv = serve("127.0.0.1:0", small_run_config(max_steps=40), metrics_path=path)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            client = WireClient(srv.server_address)
            client.call(cmd="reset", seed=3, episode=0)
            done = False
            while not done:
                done = client.call(cmd="step", action=[0.6, 0.6])["done"]
            client.close()
        finally:
            srv.shutdown()
            srv.server_close()
        rows = read_metrics_csv(path)
        assert len(rows) == 1
        assert rows[0]["episode"] == "0"
        assert rows[0]["steps"] >= 1


class TestCli:
    def _write_config(self, tmp_path, max_steps=60):
        cfg = small_run_config(max_steps=max_steps)
        path = tmp_path / "run.json"
        save_run_config(cfg, path)
        assert load_run_config(path).episode.max_steps == max_steps
        return path

    def test_run_outputs_are_byte_identical(self, tmp_path):
        cfg_path = self._write_config(tmp_path)
        out1 = tmp_path / "out1"
        out2 = tmp_path / "out2"
        for out in (out1, out2):
            code = cli_main(
                ["run", "--config", str(cfg_path), "--agent", "random",
                 "--episodes", "2", "--seed", "1", "--out", str(out)]
            )
            assert code == 0
        assert (out1 / "metrics.csv").read_bytes() == (out2 / "metrics.csv").read_bytes()
        for name in ("episode_0000.jsonl", "episode_0001.jsonl"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_metrics_csv_schema(self, tmp_path):
        cfg_path = self._write_config(tmp_path)
        out = tmp_path / "out"
        cli_main(["run", "--config", str(cfg_path), "--agent", "scripted-pd",
                  "--episodes", "2", "--seed", "0", "--out", str(out)])
        rows = read_metrics_csv(out / "metrics.csv")
        assert [r["episode"] for r in rows] == ["0", "1", "all"]
        header = (out / "metrics.csv").read_text().splitlines()[0]
        assert header == (
            "episode,steps,collisions_per_10min,interventions_per_10min,"
            "vel_mean,vel_std,dist_mean,dist_std,distance_traveled"
        )

    def test_render_writes_one_frame_per_step(self, tmp_path):
        cfg_path = self._write_config(tmp_path, max_steps=12)
        out = tmp_path / "out"
        cli_main(["run", "--config", str(cfg_path), "--agent", "scripted-pd",
                  "--episodes", "1", "--seed", "0", "--out", str(out)])
        log_path = out / "episode_0000.jsonl"
        log = read_episode_jsonl(log_path)
        render_dir = tmp_path / "render"
        code = cli_main(["render", "--log", str(log_path), "--out", str(render_dir)])
        assert code == 0
        frames = sorted((render_dir / "frames").glob("*.png"))
        assert len(frames) == len(log.records)
        assert (render_dir / "track.csv").exists()
        assert (render_dir / "track.png").exists()

    def test_mppi_agent_on_the_default_lake(self, tmp_path):
        import dataclasses

        from shoresim.mppi import MPPIConfig

        cfg = RunConfig()  # generated lake, domain randomization on
        cfg.mppi = MPPIConfig(samples=256, horizon=24)
        cfg_path = tmp_path / "mppi.json"
        save_run_config(cfg, cfg_path)
        out = tmp_path / "out"
        code = cli_main(["run", "--config", str(cfg_path), "--agent", "mppi",
                         "--episodes", "1", "--seed", "7", "--out", str(out)])
        assert code == 0
        rows = read_metrics_csv(out / "metrics.csv")
        overall = rows[-1]
        assert overall["episode"] == "all"
        assert overall["steps"] == 500
        assert overall["collisions_per_10min"] == 0.0
        assert overall["interventions_per_10min"] == 0.0
        assert 8.0 <= overall["dist_mean"] <= 12.0

    def test_serve_address_env_var(self, monkeypatch):
        from shoresim.server import default_address, parse_address

        monkeypatch.setenv("SHORESIM_ADDR", "0.0.0.0:9911")
        assert default_address() == "0.0.0.0:9911"
        assert parse_address(default_address()) == ("0.0.0.0", 9911)
        monkeypatch.delenv("SHORESIM_ADDR")
        assert parse_address(default_address())[1] > 0

    def test_external_agent_loading(self, tmp_path, monkeypatch):
        agent_mod = tmp_path / "myagent.py"
        agent_mod.write_text(
            "class Steady:\n"
            "    def act(self, obs, info=None):\n"
            "        return (0.5, 0.5)\n"
            "def make_agent(env, cfg):\n"
            "    return Steady()\n"
        )
        monkeypatch.syspath_prepend(str(tmp_path))
        cfg_path = self._write_config(tmp_path, max_steps=10)
        out = tmp_path / "out"
        code = cli_main(["run", "--config", str(cfg_path), "--agent", "external:myagent",
                         "--episodes", "1", "--seed", "0", "--out", str(out)])
        assert code == 0
        log = read_episode_jsonl(out / "episode_0000.jsonl")
        assert all(r["action"] == [0.5, 0.5] for r in log.records)
