"""Confidence regions for the risk-optimal approximating model in the Gaussian
sequence model, with the simulation tools needed to calibrate and check them."""
from .errors import InvalidArgument, NumericFailure, ResourceLimit
from .general import GeneralRegion, general_region, general_region_unknown_sigma
from .multiscale import CriticalValueTable, NestedRegion, critical_values, nested_region
from .seqmodel import CandidateFamily, SignalSpec, VarianceModel, simulate_observation

__all__ = [
    "CandidateFamily",
    "CriticalValueTable",
    "GeneralRegion",
    "InvalidArgument",
    "NestedRegion",
    "NumericFailure",
    "ResourceLimit",
    "SignalSpec",
    "VarianceModel",
    "critical_values",
    "general_region",
    "general_region_unknown_sigma",
    "nested_region",
    "simulate_observation",
]

__version__ = "0.1.0"
