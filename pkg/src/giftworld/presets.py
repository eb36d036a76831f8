"""Named experiment setups mapping to RunConfig instances."""

from __future__ import annotations

from .errors import ConfigError
from .trainer import HyperParams, RunConfig

_SSD_EPISODES = 3000


def _cfg(env_kind: str, roster: list[str], hyper: HyperParams, episodes: int) -> dict:
    return {"env_kind": env_kind, "roster": roster, "hyper": hyper, "episodes": episodes}


PRESETS: dict[str, dict] = {
    "ipd-selfplay": _cfg("ipd", ["lase", "lase"], HyperParams.ipd(), 10_000),
    "ipd-a2c": _cfg("ipd", ["a2c", "a2c"], HyperParams.ipd(), 10_000),
    "ipd-go": _cfg("ipd", ["go", "go"], HyperParams.ipd(), 10_000),
    "coingame-selfplay": _cfg("coingame", ["lase", "lase"], HyperParams.ssd(), _SSD_EPISODES),
    "coingame-a2c": _cfg("coingame", ["a2c", "a2c"], HyperParams.ssd(), _SSD_EPISODES),
    "cleanup-selfplay": _cfg("cleanup", ["lase"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "cleanup-a2c": _cfg("cleanup", ["a2c"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "cleanup-go": _cfg("cleanup", ["go"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "ssh-selfplay": _cfg("ssh", ["lase"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "ssh-a2c": _cfg("ssh", ["a2c"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "ssg-selfplay": _cfg("ssg", ["lase"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "ssg-lase-wo": _cfg("ssg", ["lase-wo"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "ssg-a2c": _cfg("ssg", ["a2c"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    "ssg-go": _cfg("ssg", ["go"] * 4, HyperParams.ssd(), _SSD_EPISODES),
    # desk-scale adaptation: the flat approximator sees far fewer inference
    # updates than the full-scale runs, so the mixed-co-player study raises
    # the inference learning rates and update cadence
    "cleanup-mixed-scripted": _cfg(
        "cleanup",
        ["lase", "scripted-cooperator", "scripted-defector", "scripted-random"],
        HyperParams.ssd(lr_sr_policy=3e-4, lr_sr_value=3e-4, lr_conversion=5e-4,
                        update_freq=5), 4000),
    "cleanup-extn-selfplay": _cfg("cleanup-extn", ["lase"] * 8, HyperParams.ssd(), 2000),
    "ssg-extn-selfplay": _cfg("ssg-extn", ["lase"] * 8, HyperParams.ssd(), 2000),
}


def preset_run_config(name: str, seed: int = 0, episodes: int | None = None,
                      out_dir: str | None = None, **hyper_overrides) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    spec = PRESETS[name]
    hyper = spec["hyper"]
    if hyper_overrides:
        from dataclasses import replace
        hyper = replace(hyper, **hyper_overrides)
    return RunConfig(
        env_kind=spec["env_kind"],
        roster=list(spec["roster"]),
        hyper=hyper,
        episodes=episodes if episodes is not None else spec["episodes"],
        seed=seed,
        out_dir=out_dir,
        preset_name=name,
    )
