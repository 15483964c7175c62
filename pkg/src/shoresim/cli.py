"""Command line interface: batch runs, the protocol server, replay rendering
and an MPPI parameter sweep."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .agents import build_agent
from .config import EnvironmentSpec, RunConfig, load_run_config
from .episode import EpisodeEngine
from .metrics import aggregate_metrics, write_metrics_csv
from .recording import read_episode_jsonl, run_episode, write_episode_jsonl
from .server import default_address, serve


def _load_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if getattr(args, "env", None):
        cfg.environment = EnvironmentSpec(kind=args.env, seed=getattr(args, "env_seed", 0))
    if getattr(args, "observation_mode", None):
        cfg.episode = dataclasses.replace(cfg.episode, observation_mode=args.observation_mode)
    if getattr(args, "no_dr", False):
        cfg.dr = type(cfg.dr).disabled()
    return cfg


def _make_engine(cfg: RunConfig) -> tuple[EpisodeEngine, object]:
    env = cfg.build_environment()
    engine = EpisodeEngine(
        env,
        params=cfg.dynamics,
        episode_cfg=cfg.episode,
        dr_cfg=cfg.dr,
        reward_cfg=cfg.reward,
        noise_model=cfg.lidar_noise,
    )
    return engine, env


def cmd_run(args) -> int:
    cfg = _load_config(args)
    engine, env = _make_engine(cfg)
    agent = build_agent(args.agent, env, cfg)
    os.makedirs(args.out, exist_ok=True)

    logs = []
    rows = []
    for episode in range(args.episodes):
        log = run_episode(engine, agent, args.seed, episode)
        logs.append(log)
        rows.append(log.metrics(episode=str(episode)))
        write_episode_jsonl(os.path.join(args.out, f"episode_{episode:04d}.jsonl"), log)
    overall = aggregate_metrics(
        [log.records for log in logs],
        initial_poses=[log.initial_pose for log in logs],
        control_hz=cfg.episode.control_hz,
    )
    write_metrics_csv(os.path.join(args.out, "metrics.csv"), rows + [overall])
    print(
        f"{args.episodes} episodes ({overall.steps} steps): "
        f"collisions/10min={overall.collisions_per_10min:.3f} "
        f"interventions/10min={overall.interventions_per_10min:.3f} "
        f"vel={overall.vel_mean:.3f}+/-{overall.vel_std:.3f} m/s "
        f"dist={overall.dist_mean:.2f}+/-{overall.dist_std:.2f} m "
        f"traveled={overall.distance_traveled:.1f} m"
    )
    return 0


def cmd_serve(args) -> int:
    cfg = _load_config(args)
    server = serve(args.addr, cfg, metrics_path=args.metrics_out)
    host, port = server.server_address
    print(f"serving on {host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def cmd_render(args) -> int:
    from .render import plot_track, render_frames, write_track_csv

    log = read_episode_jsonl(args.log)
    os.makedirs(args.out, exist_ok=True)
    count = render_frames(log, os.path.join(args.out, "frames"), every=args.every)
    write_track_csv(log, os.path.join(args.out, "track.csv"))
    plot_track(log, os.path.join(args.out, "track.png"))
    print(f"wrote {count} frames, track.csv and track.png to {args.out}")
    return 0


def cmd_gridsearch(args) -> int:
    import csv as _csv
    import dataclasses as _dc

    cfg = _load_config(args)
    lambdas = [float(v) for v in args.temperatures.split(",")]
    sigmas = [float(v) for v in args.sigmas.split(",")]
    results = []
    for lam in lambdas:
        for sigma in sigmas:
            sweep_cfg = _dc.replace(cfg.mppi, temperature=lam, noise_sigma=sigma)
            cfg.mppi = sweep_cfg
            engine, env = _make_engine(cfg)
            agent = build_agent("mppi", env, cfg)
            logs = [run_episode(engine, agent, args.seed, ep) for ep in range(args.episodes)]
            overall = aggregate_metrics(
                [log.records for log in logs],
                initial_poses=[log.initial_pose for log in logs],
                control_hz=cfg.episode.control_hz,
            )
            results.append((lam, sigma, overall))
            print(
                f"temperature={lam} sigma={sigma}: "
                f"collisions/10min={overall.collisions_per_10min:.3f} "
                f"vel={overall.vel_mean:.3f} dist={overall.dist_mean:.2f}"
            )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(
            ["temperature", "noise_sigma", "collisions_per_10min", "interventions_per_10min",
             "vel_mean", "vel_std", "dist_mean", "dist_std"]
        )
        for lam, sigma, m in results:
            writer.writerow(
                [lam, sigma, repr(m.collisions_per_10min), repr(m.interventions_per_10min),
                 repr(m.vel_mean), repr(m.vel_std), repr(m.dist_mean), repr(m.dist_std)]
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shoresim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p):
        p.add_argument("--config", help="RunConfig JSON file")
        p.add_argument("--env", choices=["lake", "circle", "channel"], help="environment preset override")
        p.add_argument("--env-seed", type=int, default=0, help="generation seed for the preset")
        p.add_argument("--observation-mode", choices=["continuous", "projection", "both"])
        p.add_argument("--no-dr", action="store_true", help="disable domain randomization")

    p_run = sub.add_parser("run", help="run episodes with a built-in agent")
    add_config_options(p_run)
    p_run.add_argument("--agent", default="scripted-pd",
                       help="mppi | scripted-pd | random | external:module#factory")
    p_run.add_argument("--episodes", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=0, help="run seed")
    p_run.add_argument("--out", default="runs/latest", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="serve the environment over TCP")
    add_config_options(p_serve)
    p_serve.add_argument("--addr", default=default_address(), help="host:port to bind")
    p_serve.add_argument("--metrics-out", help="CSV appended with every served episode")
    p_serve.set_defaults(func=cmd_serve)

    p_render = sub.add_parser("render", help="render a trajectory log to frames and a track plot")
    p_render.add_argument("--log", required=True, help="episode JSONL file")
    p_render.add_argument("--out", required=True, help="output directory")
    p_render.add_argument("--every", type=int, default=1, help="render every Nth step")
    p_render.set_defaults(func=cmd_render)

    p_grid = sub.add_parser("gridsearch", help="sweep MPPI temperature/noise settings")
    add_config_options(p_grid)
    p_grid.add_argument("--temperatures", default="0.3,0.5,1.0")
    p_grid.add_argument("--sigmas", default="0.2,0.3,0.45")
    p_grid.add_argument("--episodes", type=int, default=2)
    p_grid.add_argument("--seed", type=int, default=0)
    p_grid.add_argument("--out", default="gridsearch.csv")
    p_grid.set_defaults(func=cmd_gridsearch)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
