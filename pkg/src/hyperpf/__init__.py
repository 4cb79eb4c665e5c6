"""Random-matrix partition functions as hyperpfaffians of Wronskian forms."""
from .ensembles import (Case, EnsembleSpec, InvalidSpecError, NumericalError, ZnResult,
                        assembled_form, classical_matrices, correlation, partition_function)
from .exterior import ExtForm, MultiIndex, hyperpfaffian, pfaffian, wedge
from .measures import (CircularMeasure, CustomMeasure, GaussianMeasure, JacobiMeasure,
                       UniformMeasure, measure_from_config)
from .polyfam import CompleteFamily, standard_family, wronskian

__all__ = [
    "Case", "EnsembleSpec", "InvalidSpecError", "NumericalError", "ZnResult",
    "assembled_form", "classical_matrices", "correlation", "partition_function",
    "ExtForm", "MultiIndex", "hyperpfaffian", "pfaffian", "wedge",
    "CircularMeasure", "CustomMeasure", "GaussianMeasure", "JacobiMeasure", "UniformMeasure",
    "measure_from_config", "CompleteFamily", "standard_family", "wronskian",
]
