"""Exact and Monte Carlo verification of paired-sample information bounds
for sequential learners: enumeration of small worlds, information measures,
bound checkers, and a CLI harness."""

from .bounds import BoundReport
from .info import (InfoValue, conditional_mutual_information, entropy,
                   kl_divergence, mutual_information)
from .joint import DiscreteJoint
from .worlds import LearnerSpec, OutcomeSpace, RowKernel, WorldSpec

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "DiscreteJoint",
    "InfoValue",
    "LearnerSpec",
    "OutcomeSpace",
    "RowKernel",
    "WorldSpec",
    "conditional_mutual_information",
    "entropy",
    "kl_divergence",
    "mutual_information",
    "__version__",
]
