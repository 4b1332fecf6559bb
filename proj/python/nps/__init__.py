"""Python front end for the Nernst-Planck-Stokes solver.

Configs may be given as dicts or JSON strings; command results come back as dicts.
"""

import json

from . import _nps
from ._nps import Error, InvalidSpec, NonConvergence, ValidationError, bernoulli, sg_edge_flux

__all__ = [
    "Error",
    "InvalidSpec",
    "NonConvergence",
    "ValidationError",
    "bernoulli",
    "classify",
    "normalize_config",
    "pb",
    "run",
    "sg_edge_flux",
    "steady",
    "steady_fields",
    "sweep",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def normalize_config(config):
    """Config with every default filled in."""
    return json.loads(_nps.normalize_config(_text(config)))


def _command(fn):
    def call(config, out="", resolution=None, tol=None, t_end=None, seed=None):
        return json.loads(fn(_text(config), str(out), resolution, tol, t_end, seed))

    call.__name__ = fn.__name__
    call.__doc__ = fn.__doc__
    return call


run = _command(_nps.run)
steady = _command(_nps.steady)
pb = _command(_nps.pb)
classify = _command(_nps.classify)
sweep = _command(_nps.sweep)


def steady_fields(config):
    """Steady state as numpy arrays indexed [j, i]."""
    return _nps.steady_fields(_text(config))
