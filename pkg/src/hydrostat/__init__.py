"""Pseudo-spectral laboratory for the 3D stochastic inviscid primitive
equations on the unit torus: noise-conjugated random PDEs, moving-radius
Gevrey norm tracking, mild-solution fixed points, inequality probes, and
seeded Monte Carlo survival estimates.
"""

from . import analysis, dynamics, gevrey, initial_data, picard, spectral, stochastic
from .dynamics import RadiusSchedule, RunRecord, SimConfig, run, run_ensemble, run_global_experiment
from .gevrey import ExponentCapError, GevreyParams, norm
from .picard import MildProblem, fixed_point_solve
from .spectral import SpectralScalar, SpectralVelocity
from .stochastic import BrownianPath, GoodSetParams, good_set_probability, sample_path

__version__ = "0.1.0"

__all__ = [
    "analysis", "dynamics", "gevrey", "initial_data", "picard",
    "spectral", "stochastic",
    "RadiusSchedule", "RunRecord", "SimConfig", "run", "run_ensemble",
    "run_global_experiment", "ExponentCapError", "GevreyParams", "norm",
    "MildProblem", "fixed_point_solve", "SpectralScalar", "SpectralVelocity",
    "BrownianPath", "GoodSetParams", "good_set_probability", "sample_path",
]
