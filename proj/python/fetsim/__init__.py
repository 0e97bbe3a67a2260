"""Python front end for the FET bit-dissemination workbench."""

import json

from ._fetsim import (
    DomainError,
    StructuralError,
    UsageError,
    classify,
    classify_yellow,
    exact_duel,
    expected_next_fraction,
    fixed_point_f,
    flip_probs,
)
from . import _fetsim

__all__ = [
    "DomainError",
    "StructuralError",
    "UsageError",
    "audit",
    "chain",
    "classify",
    "classify_yellow",
    "exact_duel",
    "expected_next_fraction",
    "fixed_point_f",
    "flip_probs",
    "simulate",
    "verify",
]


def _config_text(config):
    if isinstance(config, str):
        return config
    return "".join(f"{k} = {v}\n" for k, v in config.items())


def audit(n, delta=0.05, c_sample=3.0):
    return json.loads(_fetsim.audit_json(n, delta, c_sample))


def chain(n, ell, start=None):
    return json.loads(_fetsim.chain_json(n, ell, start))


def simulate(config, preset="all_wrong", trials=1, out_dir=""):
    """config: dict of simulate keys or the text of a config file."""
    return json.loads(_fetsim.simulate_json(_config_text(config), preset, trials, str(out_dir)))


def verify(lemma="all", config=None, out_dir=""):
    return json.loads(_fetsim.verify_json(lemma, _config_text(config or {}), str(out_dir)))
