"""Periodic pseudo-spectral Hall-MHD simulator with Littlewood-Paley norm monitoring."""

from .config import ConfigError, ExperimentConfig
from .estimators import HallMHDSimulator, NormFeatures
from .initial_data import InitialData, gen_beltrami, gen_orszag_tang_2p5d, gen_orszag_tang_3d, gen_random_bandlimited
from .littlewood_paley import NormReport, besov_norm, bmo_proxy, dyadic_block, norm_report, sobolev_norm_hom
from .monitor import CriterionConfig, DiagnosticsLedger
from .solver import Regime, SolverState, StepControl, Termination, run, step
from .spectral import Grid, SpectralField, to_physical, to_spectral

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ExperimentConfig", "HallMHDSimulator", "NormFeatures", "InitialData",
    "gen_beltrami", "gen_orszag_tang_2p5d", "gen_orszag_tang_3d", "gen_random_bandlimited",
    "NormReport", "besov_norm", "bmo_proxy", "dyadic_block", "norm_report", "sobolev_norm_hom",
    "CriterionConfig", "DiagnosticsLedger", "Regime", "SolverState", "StepControl", "Termination",
    "run", "step", "Grid", "SpectralField", "to_physical", "to_spectral",
]
