"""Canned scenarios reproducing the inputs behind Figures 1-7.

Horizons, step sizes and seeds are not given by the figure captions; the values
below are the defaults this package uses, and replication is qualitative.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import PAPER_CONVENTION
from .config import EnsembleSpec, ScenarioConfig, SweepSpec
from .integrators import IntegratorConfig
from .model import PAPER_INITIAL_STATE, ModelParameters, NoiseIntensities, State

FIGURE_IDS = tuple(f"fig{k}" for k in range(1, 8))

REPLICATION_SEED = 2020
REPLICATION_PATHS = 100
RECORD_EVERY = 10
FIGURE_P = 0.6201

QUARANTINE_RATES = (0.071, 0.2, 0.4)
RELEASE_RATES = (0.1003, 0.05, 0.01)
MEDIA_RATIOS = (0.0, 0.3, 0.6, 0.9)

FIG3_NOISE = NoiseIntensities(0.024, 0.0235, 0.015, 0.0174, 0.019, 0.0213, 0.0238)
FIG4_NOISE = NoiseIntensities(0.019, 0.0185, 0.014, 0.017, 0.0158, 0.0136, 0.0182)


@dataclass(frozen=True)
class Panel:
    """One data product of a figure: a label and the scenario that produces it."""

    label: str
    config: ScenarioConfig


@dataclass(frozen=True)
class FigureScenario:
    figure_id: str
    description: str
    panels: tuple[Panel, ...]

    @property
    def config(self) -> ScenarioConfig:
        """The base scenario (first panel)."""
        return self.panels[0].config


def _base(beta1: float, beta2_ratio: float, noise=None, t_end: float = 350.0) -> ScenarioConfig:
    params = ModelParameters.table1(beta1=beta1, beta2=beta2_ratio * beta1, p=FIGURE_P)
    return ScenarioConfig(
        parameters=params,
        initial_state=State(*PAPER_INITIAL_STATE),
        integrator=IntegratorConfig(t_end=t_end, dt=0.01, record_every=RECORD_EVERY),
        noise=noise,
        dfe_convention=PAPER_CONVENTION,
        ensemble=EnsembleSpec(REPLICATION_PATHS, REPLICATION_SEED) if noise is not None else None,
    )


def fig1_config() -> ScenarioConfig:
    return _base(3.97e-6, 0.6)


def fig2_config() -> ScenarioConfig:
    return _base(5e-6, 0.6)


def fig3_config() -> ScenarioConfig:
    return _base(2.08e-9, 0.6, FIG3_NOISE, t_end=200.0)


def fig4_config() -> ScenarioConfig:
    return _base(4.1e-3, 0.1, FIG4_NOISE, t_end=500.0)


def _sweep(config: ScenarioConfig, target: str, values) -> ScenarioConfig:
    return config.replace(sweep=SweepSpec(target, tuple(float(v) for v in values)))


def _media_sweep(config: ScenarioConfig) -> ScenarioConfig:
    beta1 = config.parameters.beta1
    return _sweep(config, "beta2", [r * beta1 for r in MEDIA_RATIOS])


def figure_scenario(figure_id: str) -> FigureScenario:
    """Look up a figure by id (``fig1`` .. ``fig7``); raises ``KeyError`` otherwise."""
    if figure_id == "fig1":
        return FigureScenario(figure_id, "deterministic run, R0 < 1", (Panel("fig1", fig1_config()),))
    if figure_id == "fig2":
        return FigureScenario(figure_id, "deterministic run, R0 > 1", (Panel("fig2", fig2_config()),))
    if figure_id == "fig3":
        return FigureScenario(figure_id, "stochastic ensemble, extinction", (Panel("fig3", fig3_config()),))
    if figure_id == "fig4":
        return FigureScenario(figure_id, "stochastic ensemble, persistence", (Panel("fig4", fig4_config()),))
    if figure_id == "fig5":
        return FigureScenario(
            figure_id,
            "quarantine sweeps (q and lam) on the fig2 and fig4 settings",
            (
                Panel("fig5_det_q", _sweep(fig2_config(), "q", QUARANTINE_RATES)),
                Panel("fig5_det_lam", _sweep(fig2_config(), "lam", RELEASE_RATES)),
                Panel("fig5_sto_q", _sweep(fig4_config(), "q", QUARANTINE_RATES)),
                Panel("fig5_sto_lam", _sweep(fig4_config(), "lam", RELEASE_RATES)),
            ),
        )
    if figure_id == "fig6":
        return FigureScenario(
            figure_id,
            "deterministic media sweeps on the fig1 and fig2 settings",
            (
                Panel("fig6_fig1_beta2", _media_sweep(fig1_config())),
                Panel("fig6_fig2_beta2", _media_sweep(fig2_config())),
            ),
        )
    if figure_id == "fig7":
        return FigureScenario(
            figure_id,
            "stochastic media sweeps on the fig3 and fig4 settings",
            (
                Panel("fig7_fig3_beta2", _media_sweep(fig3_config())),
                Panel("fig7_fig4_beta2", _media_sweep(fig4_config())),
            ),
        )
    raise KeyError(f"unknown figure id {figure_id!r}; expected one of {', '.join(FIGURE_IDS)}")
