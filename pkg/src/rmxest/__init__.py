"""Radius-minmax optimally robust one-step estimators.

Normal location-scale, Gamma and Poisson models on contamination and
total-variation neighborhoods.
"""

__version__ = "0.1.0"

from .cniper import CniperReport, cniper_points
from .data import Dataset, embedded, ingest
from .families import get_family, make_gamma, make_normal_loc_scale, make_poisson
from .ic import InfluenceCurve, RiskReport, mse_of, omega, solve_ic
from .onestep import EstimationReport, one_step, roptest_pipeline
from .rmx import RadiusInterval, least_favorable_radius, rel_mse, rmx_ic
from .simulate import ContaminationScenario, mc_compare, sample_contaminated
from .start import cvm_estimate, median_mad, mle, start_estimate

__all__ = [
    "CniperReport", "ContaminationScenario", "Dataset", "EstimationReport", "InfluenceCurve",
    "RadiusInterval", "RiskReport", "cniper_points", "cvm_estimate", "embedded", "get_family",
    "ingest", "make_gamma", "make_normal_loc_scale", "make_poisson", "least_favorable_radius", "mc_compare", "median_mad", "mle", "mse_of", "omega",
    "one_step", "rel_mse", "rmx_ic", "roptest_pipeline", "sample_contaminated", "solve_ic",
    "start_estimate",
]
