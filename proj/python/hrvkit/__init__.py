"""Hidden-regular-variation toolkit for diagonal stochastic recursions.

Thin convenience layer over the compiled core: model configs may be passed as
dicts or JSON strings; see the repository README for the config schema.
"""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    NoRootError,
    NotFoundError,
    __version__,
)
from . import _core


def _as_text(config):
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def solve_tail_indices(config, tol=1e-10):
    return _core.solve_tail_indices(_as_text(config), tol)


def phi(config, xi1, xi2):
    return _core.phi(_as_text(config), xi1, xi2)


def grad_phi(config, xi1, xi2):
    return _core.grad_phi(_as_text(config), xi1, xi2)


def analyze(config):
    return _core.analyze(_as_text(config))


def check_assumptions(config, seed=0x5EED):
    return _core.check_assumptions(_as_text(config), seed)


def simulate(config, n, seed=None, burn_in=10000, workers=1):
    return _core.simulate(_as_text(config), n, seed, burn_in, workers)


def joint_exceedance(config, t, eps=1.0, paths=100000, seed=None):
    return _core.joint_exceedance(_as_text(config), t, eps, paths, seed)
