"""Numerical toolkit for firmly nonexpansive maps and maximally monotone operators."""

__version__ = "0.1.0"

from .catalog import catalog_instances, make_operator, prox
from .checks import PropertyReport, Verdict, replay_witness
from .core import (
    FirmMap,
    GraphSample,
    MonotoneOperator,
    complement,
    from_firm,
    inverse,
    minty_sample,
    operator_from_direct,
    reflect,
    resolvent,
)
from .numeric import SampleConfig, spectral_norm

__all__ = [
    "FirmMap",
    "GraphSample",
    "MonotoneOperator",
    "PropertyReport",
    "SampleConfig",
    "Verdict",
    "catalog_instances",
    "complement",
    "from_firm",
    "inverse",
    "make_operator",
    "minty_sample",
    "operator_from_direct",
    "prox",
    "reflect",
    "replay_witness",
    "resolvent",
    "spectral_norm",
]
