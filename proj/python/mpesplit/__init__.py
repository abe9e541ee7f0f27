"""Multi-product expansion operator splitting: schemes, order checks and model runs."""

import json

from . import _mpesplit as _core

__all__ = [
    "adaptive_tau",
    "catalog",
    "catalog_names",
    "converge",
    "empirical_order",
    "initial_condition",
    "model",
    "model_names",
    "preset",
    "preset_names",
    "richardson_weights",
    "run",
    "verify_conditions",
]

catalog_names = _core.catalog_names
model_names = _core.model_names
preset_names = _core.preset_names
richardson_weights = _core.richardson_weights
verify_conditions = _core.verify_conditions
adaptive_tau = _core.adaptive_tau


def catalog(name):
    """Scheme definition as a dict; rationals are strings."""
    return json.loads(_core.scheme_json(name))


def model(name):
    """Default parameter pack of a model."""
    return json.loads(_core.model_json(name))


def preset(name):
    return json.loads(_core.preset_json(name))


def empirical_order(name, tau_max=5e-2, tau_min=3e-3, count=8, precision="extended",
                    seed=42, dim=6):
    """Algebraic and empirical order report on the random matrix oracle."""
    return json.loads(_core.order_report(name, tau_max, tau_min, count, precision, seed, dim))


def _config(config, overrides):
    cfg = dict(config or {})
    cfg.update(overrides)
    return json.dumps(cfg)


def initial_condition(config=None, **overrides):
    """Initial data as an array of shape (components, n, n)."""
    return _core.initial_condition(_config(config, overrides))


def run(config=None, **overrides):
    """Run one configuration. Returns the run record with the final state under "final"."""
    record, state = _core.run(_config(config, overrides))
    out = json.loads(record)
    out["final"] = state
    return out


def converge(config=None, ladder=(), random_counts=(), exact=False, ref_scheme="s6",
             ref_tau=1 / 200, **overrides):
    """Convergence table against an exact or fine-step reference."""
    return json.loads(_core.converge(_config(config, overrides), list(ladder),
                                     list(random_counts), exact, ref_scheme, ref_tau))
