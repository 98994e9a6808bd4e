"""Parametric multi-fidelity Monte Carlo estimation.

Point estimation of high-fidelity model parameters from paired
high/low-fidelity data plus extra low-fidelity draws, with three
multi-fidelity routes (joint maximum likelihood, variance-optimal moment
combination, marginal-likelihood combination), model-level asymptotic
variances, delta-method quantities of interest and a reproducible
experiment harness.
"""

__version__ = "0.1.0"

from . import asymptotics, estimators, experiments, models, qoi
from .dataset import MFDataset, load_dataset, save_dataset
from .errors import (DataError, DegenerateDataError, DegenerateMomentsError,
                     EstimationError, IntegrationError, MFMCError,
                     ParameterDomainError, ParseError, SingularityError)

__all__ = [
    "__version__",
    "asymptotics", "estimators", "experiments", "models", "qoi",
    "MFDataset", "load_dataset", "save_dataset",
    "DataError", "DegenerateDataError", "DegenerateMomentsError",
    "EstimationError", "IntegrationError", "MFMCError",
    "ParameterDomainError", "ParseError", "SingularityError",
]
