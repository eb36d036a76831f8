"""Command-line front door: matrix-sweep, train, schelling, eval."""

from __future__ import annotations

import dataclasses
import json
import os
import sys

import click
import numpy as np

from . import matrix
from .config import load_run_config
from .errors import GiftworldError
from .metrics import SCHELLING_ENVS, schelling_diagram, verify_ssd, write_schelling_csv
from .presets import PRESETS, preset_run_config
from .trainer import evaluate, train


@click.group()
def main() -> None:
    """Empathic reward-gifting laboratory."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@main.command("matrix-sweep")
@click.option("--t-min", default=0.0, show_default=True)
@click.option("--t-max", default=2.0, show_default=True)
@click.option("--t-step", default=0.02, show_default=True)
@click.option("--s-min", default=-1.0, show_default=True)
@click.option("--s-max", default=1.0, show_default=True)
@click.option("--s-step", default=0.02, show_default=True)
@click.option("--seeds", default=1, show_default=True, help="random inits per cell")
@click.option("--alpha", default=1e-3, show_default=True)
@click.option("--gamma", default=0.99, show_default=True)
@click.option("--rng-seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def matrix_sweep(t_min, t_max, t_step, s_min, s_max, s_step, seeds, alpha, gamma,
                 rng_seed, out_path):
    """Converged cooperation probability over a (T, S) payoff grid, as CSV."""
    try:
        cfg = matrix.DynamicsConfig(alpha=alpha, gamma=gamma, rng_seed=rng_seed)
        result = matrix.sweep_heatmap(matrix.GridSpec(t_min, t_max, t_step),
                                      matrix.GridSpec(s_min, s_max, s_step),
                                      seeds, cfg)
        matrix.write_sweep_csv(result, out_path)
    except GiftworldError as exc:
        _fail(exc)
    click.echo(f"wrote {len(result.s_values)}x{len(result.t_values)} sweep to {out_path}")


@main.command("train")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--seed", default=0, show_default=True)
@click.option("--episodes", default=None, type=int, help="override the preset's count")
@click.option("--out-dir", default=None, type=click.Path(file_okay=False))
@click.option("--log-every", default=0, show_default=True)
def train_cmd(preset, config_path, seed, episodes, out_dir, log_every):
    """Train a roster of agents and stream per-episode metrics as JSONL."""
    if (preset is None) == (config_path is None):
        _fail(GiftworldError("provide exactly one of --preset or --config"))
    try:
        if config_path:
            cfg = load_run_config(config_path)
            if episodes is not None:
                cfg = dataclasses.replace(cfg, episodes=episodes)
            if out_dir is not None:
                cfg = dataclasses.replace(cfg, out_dir=out_dir)
            cfg = dataclasses.replace(cfg, seed=seed if seed or cfg.seed is None else cfg.seed)
        else:
            cfg = preset_run_config(preset, seed=seed, episodes=episodes, out_dir=out_dir)
        result = train(cfg, log_every=log_every)
    except GiftworldError as exc:
        _fail(exc)
    tail = result.metrics[-min(100, len(result.metrics)):]
    mean_collective = float(np.mean([m["collective"] for m in tail]))
    click.echo(f"trained {cfg.episodes} episodes; "
               f"mean collective reward over the last {len(tail)}: {mean_collective:.3f}")
    if cfg.out_dir:
        click.echo(f"run directory: {cfg.out_dir}")


@main.command("schelling")
@click.option("--env", "env_kind", type=click.Choice(SCHELLING_ENVS), required=True)
@click.option("--episodes", default=200, show_default=True, help="episodes per point")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def schelling_cmd(env_kind, episodes, seed, out_path):
    """Estimate cooperator/defector payoff curves from scripted rollouts."""
    try:
        curve = schelling_diagram(env_kind, episodes, seed)
    except GiftworldError as exc:
        _fail(exc)
    report = verify_ssd(curve)
    if out_path:
        write_schelling_csv(curve, out_path)
        click.echo(f"wrote curve to {out_path}")
    payload = dataclasses.asdict(report)
    for key in ("rc", "rd"):
        payload[key] = [None if not np.isfinite(v) else v for v in payload[key]]
    click.echo(json.dumps(payload, indent=2))


@main.command("eval")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--checkpoint-dir", type=click.Path(file_okay=False), default=None,
              help="checkpoints/epNNNNNNN directory of a previous run")
@click.option("--episodes", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--epsilon", default=0.0, show_default=True)
@click.option("--real-observations", is_flag=True,
              help="feed true co-player observations to the inference policy")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def eval_cmd(preset, config_path, checkpoint_dir, episodes, seed, epsilon,
             real_observations, out_path):
    """Frozen-policy evaluation rollouts (optionally from a checkpoint)."""
    if (preset is None) == (config_path is None):
        _fail(GiftworldError("provide exactly one of --preset or --config"))
    try:
        cfg = (load_run_config(config_path) if config_path
               else preset_run_config(preset, seed=seed))
        cfg = dataclasses.replace(cfg, seed=seed, out_dir=None)
        result = evaluate(cfg, episodes, checkpoint_dir=checkpoint_dir,
                          epsilon=epsilon, use_true_co_obs=real_observations)
    except GiftworldError as exc:
        _fail(exc)
    if out_path:
        with open(out_path, "w") as fh:
            for row in result.metrics:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        click.echo(f"wrote {len(result.metrics)} episode rows to {out_path}")
    collective = float(np.mean([m["collective"] for m in result.metrics]))
    click.echo(f"mean collective reward over {episodes} episodes: {collective:.3f}")


if __name__ == "__main__":
    main()
