"""Python access to the nomadet core: frame simulation, wavelet denoising,
density diagrams, dataset loading and checkpoint inference."""

import json

from . import _nomadet
from ._nomadet import (
    DataError,
    DomainError,
    Model,
    NomadetError,
    NumericError,
    ShapeError,
    UsageError,
    density_diagram,
    load_dataset,
    scheme_names,
    symbol_centers,
)

__all__ = [
    "DataError",
    "DomainError",
    "Model",
    "NomadetError",
    "NumericError",
    "ShapeError",
    "UsageError",
    "default_scenario",
    "denoise",
    "density_diagram",
    "generate_frame",
    "load_dataset",
    "run_cli",
    "scheme_names",
    "symbol_centers",
]


def default_scenario():
    """Default scenario as a dict, keyed like the JSON config."""
    return json.loads(_nomadet.default_scenario())


def generate_frame(seed, **overrides):
    """Simulates one received frame; keyword overrides patch the default scenario.

    Returns (samples, samples_per_symbol, far_scheme_name).
    """
    scenario = default_scenario()
    scenario.update(overrides)
    return _nomadet.generate_frame(json.dumps(scenario), seed)


def denoise(samples, samples_per_symbol=1, wavelet=None):
    return _nomadet.denoise(samples, samples_per_symbol, json.dumps(wavelet) if wavelet else "")


def run_cli(*args):
    """Runs the command-line tool in-process. Returns (exit_code, stdout, stderr)."""
    return _nomadet.run_cli([str(a) for a in args])
