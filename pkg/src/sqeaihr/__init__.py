"""SQEAIHR epidemic model: deterministic and stochastic dynamics, threshold analysis and ensembles."""

__version__ = "0.1.0"

from .analysis import (
    FORMULA,
    PAPER_CONVENTION,
    AnalysisReport,
    DfeConvention,
    alpha_hat,
    analyze,
    compute_dfe,
    compute_r0,
    endemic_equilibrium,
    extinction_report,
    jacobian,
    next_generation_matrices,
    persistence_report,
    rho1,
    rho2,
    spectral_bound,
    threshold_report,
)
from .config import ConfigError, ScenarioConfig, parse_config, render_config
from .ensemble import EnsembleSummary, extinction_slope, persistence_estimate, run_ensemble, time_average
from .integrators import IntegrationError, IntegratorConfig, SeedSpec, Trajectory, integrate_ode, integrate_sde
from .model import (
    COMPARTMENTS,
    ModelParameters,
    NoiseIntensities,
    ParameterError,
    RegionSpec,
    State,
    diffusion,
    drift,
    incidence,
    region_membership,
)
from .scenarios import FIGURE_IDS, figure_scenario

__all__ = [
    "FORMULA",
    "PAPER_CONVENTION",
    "AnalysisReport",
    "DfeConvention",
    "alpha_hat",
    "analyze",
    "compute_dfe",
    "compute_r0",
    "endemic_equilibrium",
    "extinction_report",
    "jacobian",
    "next_generation_matrices",
    "persistence_report",
    "rho1",
    "rho2",
    "spectral_bound",
    "threshold_report",
    "ConfigError",
    "ScenarioConfig",
    "parse_config",
    "render_config",
    "EnsembleSummary",
    "extinction_slope",
    "persistence_estimate",
    "run_ensemble",
    "time_average",
    "IntegrationError",
    "IntegratorConfig",
    "SeedSpec",
    "Trajectory",
    "integrate_ode",
    "integrate_sde",
    "COMPARTMENTS",
    "ModelParameters",
    "NoiseIntensities",
    "ParameterError",
    "RegionSpec",
    "State",
    "diffusion",
    "drift",
    "incidence",
    "region_membership",
    "FIGURE_IDS",
    "figure_scenario",
]
