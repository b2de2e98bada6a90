"""Equilibria, reproduction number, local stability and stochastic thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    ModelParameters,
    NoiseIntensities,
    State,
    as_state_array,
    dfe_components,
)

PAPER_S_O = 1.5563e5


@dataclass(frozen=True)
class DfeConvention:
    """Which S° enters threshold formulas.

    ``formula`` uses the closed form; ``override`` pins S° to a user value, with
    Q° taken as Lambda/mu - S° so that the pair still sums to Lambda/mu.
    """

    override: Optional[float] = None

    def __post_init__(self):
        if self.override is not None and not self.override > 0:
            raise ValueError(f"override S° must be > 0, got {self.override}")

    @classmethod
    def parse(cls, text: str) -> "DfeConvention":
        text = text.strip()
        if text == "formula":
            return cls()
        if text.startswith("override:"):
            return cls(float(text.split(":", 1)[1]))
        raise ValueError(f"unknown DFE convention {text!r}; use 'formula' or 'override:VALUE'")

    def __str__(self) -> str:
        return "formula" if self.override is None else f"override:{self.override!r}"

    @property
    def is_formula(self) -> bool:
        return self.override is None

    def s_o(self, params: ModelParameters) -> float:
        return dfe_components(params)[0] if self.override is None else self.override

    def q_o(self, params: ModelParameters) -> float:
        if self.override is None:
            return dfe_components(params)[1]
        return params.lambda_in / params.mu - self.override


FORMULA = DfeConvention()
PAPER_CONVENTION = DfeConvention(PAPER_S_O)


@dataclass(frozen=True)
class DiseaseFreeEquilibrium:
    s_o: float
    q_o: float

    @property
    def full_state(self) -> State:
        return State(self.s_o, self.q_o, 0.0, 0.0, 0.0, 0.0, 0.0)


def compute_dfe(params: ModelParameters) -> DiseaseFreeEquilibrium:
    return DiseaseFreeEquilibrium(*dfe_components(params))


def compute_r0(params: ModelParameters, s_o: float) -> float:
    """Basic reproduction number from the closed form, with S° supplied by the caller."""
    if not s_o > 0:
        raise ValueError("s_o must be > 0")
    p = params
    per_infective = p.theta * (1 - p.p) / p.k_a + p.p / p.k_i
    return per_infective * p.sigma * p.beta1 * s_o / (p.mu + p.sigma)


def next_generation_matrices(params: ModelParameters, s_o: float) -> tuple[np.ndarray, np.ndarray]:
    """New-infection matrix F and transition matrix V on the (E, A, I) block."""
    if not s_o > 0:
        raise ValueError("s_o must be > 0")
    p = params
    f = np.array([
        [0.0, p.theta * p.beta1 * s_o, p.beta1 * s_o],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
    ])
    v = np.array([
        [p.mu + p.sigma, 0.0, 0.0],
        [-(1 - p.p) * p.sigma, p.k_a, 0.0],
        [-p.sigma * p.p, 0.0, p.k_i],
    ])
    return f, v


def ngm_spectral_radius(params: ModelParameters, s_o: float) -> float:
    f, v = next_generation_matrices(params, s_o)
    return float(np.max(np.abs(np.linalg.eigvals(f @ np.linalg.inv(v)))))


@dataclass(frozen=True)
class EndemicCoefficients:
    """Constants of the reduced endemic equation ``frak_a I² + frak_b I + frak_c = 0``."""

    c: float
    m: float
    c_prime: float
    m_prime: float
    frak_a: float
    frak_b: float
    frak_c: float


def endemic_coefficients(params: ModelParameters) -> EndemicCoefficients:
    p = params
    denom = (p.mu + p.q) * (p.mu + p.lam) / p.q - p.lam if p.q > 0 else math.inf
    c = p.lambda_in / denom
    m = (p.mu + p.sigma) / denom
    c_prime = p.k_i / (p.sigma * p.p)
    m_prime = p.sigma * (1 - p.p) / p.k_a
    s_o = dfe_components(p)[0]
    r0 = compute_r0(p, s_o)
    # beta1 / R0 does not depend on beta1, which keeps beta1 = 0 well defined
    beta1_over_r0 = (p.mu + p.sigma) / ((p.theta * (1 - p.p) / p.k_a + p.p / p.k_i) * p.sigma * s_o)
    frak_a = m * c_prime * (p.beta1 - p.beta2)
    frak_b = p.beta1 * p.b * m * c_prime + c * (beta1_over_r0 - p.beta1) + p.beta2 * c
    # constant term uses b*(mu+sigma)*c' in the numerator; this is what the
    # substitution actually produces and what makes the root an equilibrium
    frak_c = (
        p.q * p.b * (p.mu + p.sigma) * c_prime
        / ((p.mu + p.lam) * (1 + p.theta * m_prime * c_prime))
        * (1 - r0)
    )
    return EndemicCoefficients(c, m, c_prime, m_prime, frak_a, frak_b, frak_c)


def _endemic_infective(params: ModelParameters) -> Optional[float]:
    """Positive I* from the model's own coefficients (always the formula S°)."""
    p = params
    if p.beta1 == 0:
        return None
    r0 = compute_r0(p, dfe_components(p)[0])
    if r0 <= 1:
        return None
    c_prime = p.k_i / (p.sigma * p.p)
    kappa = (p.mu + p.sigma) * c_prime / p.lambda_in  # S* = S°(1 - kappa I*)
    g = p.beta1 - p.beta2
    # Same equation as the frak_* form, divided through so that q = 0 is allowed:
    # (R0/beta1) (beta1 b + g I)(1 - kappa I) = b + I
    a2 = r0 * kappa * g / p.beta1
    a1 = 1.0 - r0 * (g - kappa * p.beta1 * p.b) / p.beta1
    a0 = p.b * (1.0 - r0)
    if a2 == 0.0:
        if a1 <= 0:
            raise ArithmeticError("linear endemic equation has no positive root")
        return -a0 / a1
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0:
        raise ArithmeticError("negative discriminant with R0 > 1")
    root = math.sqrt(disc)
    # numerically stable form of (-a1 + root) / (2 a2)
    return (-a1 + root) / (2 * a2) if a1 <= 0 else (-2.0 * a0) / (a1 + root)


def endemic_state_from_infective(params: ModelParameters, i_star: float) -> State:
    p = params
    c_prime = p.k_i / (p.sigma * p.p)
    m_prime = p.sigma * (1 - p.p) / p.k_a
    s_o = dfe_components(p)[0]
    e = c_prime * i_star
    a = c_prime * m_prime * i_star
    s = s_o * (1.0 - (p.mu + p.sigma) * e / p.lambda_in)
    q = p.q * s / (p.mu + p.lam)
    h = (p.eps_i * i_star + p.eps_a * a) / p.k_h
    r = (p.gamma_a * a + p.gamma_i * i_star + p.gamma_h * h) / p.mu
    return State(s, q, e, a, i_star, h, r)


def endemic_equilibrium(params: ModelParameters, convention: DfeConvention = FORMULA) -> Optional[State]:
    """Strictly positive equilibrium, or ``None`` when R0 <= 1 under ``convention``.

    The convention only decides existence; the returned point always solves the
    model's own equilibrium equations.
    """
    if compute_r0(params, convention.s_o(params)) <= 1:
        return None
    i_star = _endemic_infective(params)
    if i_star is None or not i_star > 0:
        return None
    return endemic_state_from_infective(params, i_star)


def jacobian(params: ModelParameters, state) -> np.ndarray:
    """Analytic Jacobian of the drift."""
    s, q, e, a, i, h, r = as_state_array(state)
    p = params
    beta = p.beta1 - p.beta2 * i / (p.b + i)
    dbeta = -p.beta2 * p.b / (p.b + i) ** 2
    load = i + p.theta * a
    d_s = beta * load
    d_a = beta * s * p.theta
    d_i = dbeta * s * load + beta * s
    return np.array([
        [-d_s - (p.mu + p.q), p.lam, 0.0, -d_a, -d_i, 0.0, 0.0],
        [p.q, -(p.mu + p.lam), 0.0, 0.0, 0.0, 0.0, 0.0],
        [d_s, 0.0, -(p.mu + p.sigma), d_a, d_i, 0.0, 0.0],
        [0.0, 0.0, (1 - p.p) * p.sigma, -p.k_a, 0.0, 0.0, 0.0],
        [0.0, 0.0, p.sigma * p.p, 0.0, -p.k_i, 0.0, 0.0],
        [0.0, 0.0, 0.0, p.eps_a, p.eps_i, -p.k_h, 0.0],
        [0.0, 0.0, 0.0, p.gamma_a, p.gamma_i, p.gamma_h, -p.mu],
    ])


def spectral_bound(matrix) -> float:
    """Largest real part over the eigenvalues of a square matrix."""
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue computation failed: {exc}") from exc
    return float(np.max(eig.real))


@dataclass(frozen=True)
class ExtinctionReport:
    half_max_noise_sq: float
    min_infected_noise_sq: float
    drift_term: float  # beta1 S° - mu
    exponent: float
    noise_dominance_ok: bool
    noise_floor_ok: bool

    @property
    def extinction_guaranteed(self) -> bool:
        return self.noise_dominance_ok and self.noise_floor_ok


def extinction_report(params: ModelParameters, noise: NoiseIntensities, s_o: float) -> ExtinctionReport:
    """Sufficient conditions and exponent bound for almost-sure exponential die-out."""
    if not s_o > 0:
        raise ValueError("s_o must be > 0")
    sig_sq = noise.as_array() ** 2
    half_max = 0.5 * float(np.max(sig_sq))
    min_inf = float(np.min(sig_sq[2:5]))
    drift_term = params.beta1 * s_o - params.mu
    return ExtinctionReport(
        half_max_noise_sq=half_max,
        min_infected_noise_sq=min_inf,
        drift_term=drift_term,
        exponent=drift_term - min_inf / 6.0,
        noise_dominance_ok=params.mu > half_max,
        noise_floor_ok=min_inf > 6.0 * drift_term,
    )


def alpha_hat(params: ModelParameters) -> float:
    """Maximiser of :func:`rho1` over (0, 1)."""
    a = math.sqrt(params.theta * (1 - params.p))
    return a / (a + math.sqrt(params.p))


def rho1(params: ModelParameters, alpha):
    if params.beta1 < params.beta2:
        raise ValueError("rho1 needs beta1 >= beta2")
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha <= 0) | (alpha >= 1)):
        raise ValueError("alpha must lie in (0, 1)")
    p = params
    scale = 3.0 * np.cbrt(p.lambda_in * (p.beta1 - p.beta2) * p.sigma)
    value = scale * (np.cbrt(p.theta * (1 - p.p) * alpha) + np.cbrt(p.p * (1 - alpha)))
    return float(value) if value.ndim == 0 else value


def rho2(params: ModelParameters, noise: NoiseIntensities) -> float:
    p = params
    return (
        7 * p.mu
        + p.sigma
        + (p.eps_a + p.gamma_a + p.d_a)
        + (p.eps_i + p.gamma_i + p.d_i)
        + (p.d_h + p.gamma_h)
        + abs(p.lam - p.q)
        + 0.5 * float(np.sum(noise.as_array() ** 2))
    )


@dataclass(frozen=True)
class PersistenceReport:
    alpha_hat: float
    rho1_at_hat: float
    rho2: float
    margin: float  # lower bound on liminf <A + I>, individuals

    @property
    def persistent(self) -> bool:
        return self.margin > 0


def persistence_report(params: ModelParameters, noise: NoiseIntensities) -> PersistenceReport:
    ah = alpha_hat(params)
    r1 = rho1(params, ah)
    r2 = rho2(params, noise)
    margin = (r1 - r2) / params.beta1 if params.beta1 > 0 else -math.inf
    return PersistenceReport(ah, r1, r2, margin)


@dataclass(frozen=True)
class ThresholdReport:
    r0: float
    extinction: ExtinctionReport
    persistence: PersistenceReport

    @property
    def extinction_exponent(self) -> float:
        return self.extinction.exponent

    @property
    def persistence_margin(self) -> float:
        return self.persistence.margin


def threshold_report(params: ModelParameters, noise: NoiseIntensities, s_o: float) -> ThresholdReport:
    return ThresholdReport(
        r0=compute_r0(params, s_o),
        extinction=extinction_report(params, noise, s_o),
        persistence=persistence_report(params, noise),
    )


@dataclass(frozen=True)
class AnalysisReport:
    convention: DfeConvention
    dfe: DiseaseFreeEquilibrium  # closed form
    s_o: float  # as used by the convention
    q_o: float
    r0: float
    r0_formula: float
    endemic: Optional[State]
    dfe_spectral_bound: float
    thresholds: ThresholdReport


def analyze(
    params: ModelParameters,
    noise: Optional[NoiseIntensities] = None,
    convention: DfeConvention = FORMULA,
) -> AnalysisReport:
    noise = noise if noise is not None else NoiseIntensities()
    dfe = compute_dfe(params)
    s_o = convention.s_o(params)
    q_o = convention.q_o(params)
    # linearise at the convention's disease-free point so the sign tracks R0 - 1
    # under the same S°
    at_dfe = State(s_o, max(q_o, 0.0), 0.0, 0.0, 0.0, 0.0, 0.0)
    return AnalysisReport(
        convention=convention,
        dfe=dfe,
        s_o=s_o,
        q_o=q_o,
        r0=compute_r0(params, s_o),
        r0_formula=compute_r0(params, dfe.s_o),
        endemic=endemic_equilibrium(params, convention),
        dfe_spectral_bound=spectral_bound(jacobian(params, at_dfe)),
        thresholds=threshold_report(params, noise, s_o),
    )
