"""Score-based conditional treatment effect estimation.

Workflow: estimate propensity and prognostic scores by (penalized) regression,
build proxy individual effects by K-nearest-neighbor matching across treatment
arms in the 2D score space, then fit a cross-validated regression tree on the
scores to recover a piecewise-constant effect surface.

>>> import ppcate
>>> sim = ppcate.simulate(scenario=1, n=2000, d=5, seed=7)
>>> model = ppcate.fit(sim["X"], sim["z"], sim["y"], seed=7)
>>> tau = model.predict(sim["X"])
"""

import json as _json

from ._core import (
    Config,
    Model,
    NumericError,
    ValidationError,
    __version__,
    default_k,
    derive_seed,
    load,
    simulate,
)
from . import _core as _c

__all__ = [
    "Config",
    "Model",
    "NumericError",
    "ValidationError",
    "__version__",
    "benchmark",
    "bootstrap_ci",
    "default_k",
    "derive_seed",
    "fit",
    "load",
    "make_config",
    "simulate",
    "sweep_k",
]


def make_config(**kwargs):
    """Build a Config, applying keyword overrides.

    Accepts the Config attribute names: k, min_node_size, cp_floor, cp_rule,
    penalty, folds, axes, standardize_prognostic, overlap_eps,
    lambda_grid_size, lambda_min_ratio.
    """
    cfg = Config()
    for name, value in kwargs.items():
        if not hasattr(cfg, name):
            raise ValidationError(f"unknown config field '{name}'")
        setattr(cfg, name, value)
    return cfg


def _resolve_config(config, kwargs):
    if config is not None and kwargs:
        raise ValidationError("pass either config= or keyword overrides, not both")
    return config if config is not None else make_config(**kwargs)


def fit(X, z, y, seed=0, config=None, **kwargs):
    """Fit the full estimator; returns a Model."""
    return _c.fit(X, z, y, _resolve_config(config, kwargs), seed)


def bootstrap_ci(X, z, y, B=1000, level=0.95, seed=0, threads=1, config=None, **kwargs):
    """Percentile bootstrap intervals for the per-unit effects."""
    return _c.bootstrap_ci(X, z, y, _resolve_config(config, kwargs), B, level, seed, threads)


def benchmark(
    scenario,
    n=1000,
    d=2,
    seed=0,
    methods=("pp", "psm", "prog"),
    trials=20,
    bootstrap_B=0,
    level=0.95,
    threads=1,
    e_threshold=0.6,
    p_threshold=0.0,
    fix_coefficients=False,
    coef_seed=0,
    config=None,
    **kwargs,
):
    """Monte Carlo benchmark over a synthetic scenario; returns a dict."""
    raw = _c.benchmark(
        scenario,
        n,
        d,
        seed,
        list(methods),
        trials,
        _resolve_config(config, kwargs),
        bootstrap_B,
        level,
        threads,
        e_threshold,
        p_threshold,
        fix_coefficients,
        coef_seed,
    )
    return _json.loads(raw)


def sweep_k(scenario, n=5000, d=10, seed=0, k_values=(1, 5, 10), trials=10, threads=1, config=None, **kwargs):
    """Matched-set size sensitivity over a synthetic scenario; returns a dict."""
    raw = _c.sweep_k(
        scenario, n, d, seed, list(k_values), trials, _resolve_config(config, kwargs), threads
    )
    return _json.loads(raw)
