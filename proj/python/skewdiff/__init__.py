"""Skew-reflected CIR / squared Bessel simulation, local times and checks."""

from ._core import *  # noqa: F401,F403
from ._core import SkewdiffError, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]


def run(name_or_config, seed=None, threads=0, out_dir=None, **overrides):
    """Runs an experiment by name (with its default settings) or from a config dict.

    Keyword overrides are merged into the top level of the config, e.g.
    ``run("besq-law", seed=3, n_paths=2000)``.
    """
    if isinstance(name_or_config, str):
        config = {"experiment": name_or_config}
    else:
        config = dict(name_or_config)
    config.update(overrides)
    return run_experiment(config, seed=seed, threads=threads, out_dir=out_dir)
