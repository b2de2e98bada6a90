"""Core SQEAIHR model: parameters, state, media-modulated incidence, drift and diffusion.

Compartments are always indexed in the order (S, Q, E, A, I, H, R).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

COMPARTMENTS = ("S", "Q", "E", "A", "I", "H", "R")
N_COMPARTMENTS = len(COMPARTMENTS)

# Nominal per-day values; beta1 and p are ranges in the source table, the upper
# beta1 end and the p used by every figure are the defaults here.
TABLE1 = {
    "lambda_in": 108.63,
    "beta1": 5.2e-3,
    "b": 70.0,
    "theta": 0.0494,
    "q": 0.071,
    "lam": 0.1003,
    "mu": 0.00029,
    "sigma": 0.2,
    "p": 0.6201,
    "eps_a": 0.1,
    "gamma_a": 0.15,
    "d_a": 0.005,
    "eps_i": 0.33,
    "gamma_i": 0.1001,
    "d_i": 0.008,
    "gamma_h": 0.14,
    "d_h": 0.004,
}
DEFAULT_BETA2_RATIO = 0.6

PAPER_INITIAL_STATE = (1.8e6, 0.0, 10.0, 15.0, 8.0, 5.0, 0.0)


class ParameterError(ValueError):
    """A parameter set violates one of the model invariants."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ModelParameters:
    """The 18 deterministic rate constants of the model (all per day).

    ``lambda_in`` is the recruitment rate and ``lam`` the quarantine release rate.
    """

    lambda_in: float
    beta1: float
    beta2: float
    b: float
    theta: float
    q: float
    lam: float
    mu: float
    sigma: float
    p: float
    eps_a: float
    gamma_a: float
    d_a: float
    eps_i: float
    gamma_i: float
    d_i: float
    gamma_h: float
    d_h: float

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParameterError(f.name, f"expected a number, got {value!r}")
            value = float(value)
            object.__setattr__(self, f.name, value)
            if not math.isfinite(value):
                raise ParameterError(f.name, "must be finite")
            if value < 0:
                raise ParameterError(f.name, f"must be >= 0, got {value}")
        if self.beta1 < self.beta2:
            raise ParameterError("beta2", f"beta1 >= beta2 required, got beta1={self.beta1}, beta2={self.beta2}")
        if not 0 < self.theta < 1:
            raise ParameterError("theta", f"must lie in (0, 1), got {self.theta}")
        if not 0 < self.p < 1:
            raise ParameterError("p", f"must lie in (0, 1), got {self.p}")
        if self.mu <= 0:
            raise ParameterError("mu", "must be > 0")
        if self.b <= 0:
            raise ParameterError("b", "must be > 0")

    @classmethod
    def table1(cls, **overrides: float) -> "ModelParameters":
        """Table 1 values with overrides; beta2 defaults to 0.6 * beta1."""
        values = dict(TABLE1)
        values.update(overrides)
        values.setdefault("beta2", DEFAULT_BETA2_RATIO * values["beta1"])
        return cls(**values)

    def replace(self, **changes: float) -> "ModelParameters":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    def fingerprint(self) -> str:
        return ";".join(f"{k}={v!r}" for k, v in self.as_dict().items())

    # aggregated removal rates
    @property
    def k_a(self) -> float:
        return self.mu + self.eps_a + self.gamma_a + self.d_a

    @property
    def k_i(self) -> float:
        return self.mu + self.eps_i + self.gamma_i + self.d_i

    @property
    def k_h(self) -> float:
        return self.mu + self.d_h + self.gamma_h


class State(NamedTuple):
    """One point of the phase space, in canonical compartment order."""

    s: float
    q_c: float
    e: float
    a: float
    i: float
    h: float
    r: float

    @classmethod
    def zeros(cls) -> "State":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, x) -> "State":
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class NoiseIntensities:
    """Diffusion intensities sig1..sig7 of the proportional white noises."""

    sig1: float = 0.0
    sig2: float = 0.0
    sig3: float = 0.0
    sig4: float = 0.0
    sig5: float = 0.0
    sig6: float = 0.0
    sig7: float = 0.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = float(getattr(self, f.name))
            object.__setattr__(self, f.name, value)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f.name, f"must be finite and >= 0, got {value}")

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "NoiseIntensities":
        if len(values) != N_COMPARTMENTS:
            raise ValueError(f"expected {N_COMPARTMENTS} noise intensities, got {len(values)}")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array(dataclasses.astuple(self), dtype=float)

    def is_zero(self) -> bool:
        return not any(dataclasses.astuple(self))


@dataclass(frozen=True)
class RegionSpec:
    eta: float = 0.0
    eta_prime: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ParameterError("eta", "must be >= 0")
        if self.eta_prime < 0:
            raise ParameterError("eta_prime", "must be >= 0")


class RegionMembership(NamedTuple):
    upper: bool  # N <= Lambda/mu + eta
    lower: bool  # N >= Lambda/(mu + dI + dA + dH) - eta'
    band: bool
    feasible: bool  # S <= S°, Q <= Q°


def as_state_array(state, *, check: bool = True) -> np.ndarray:
    x = np.asarray(state)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(float)
    if x.shape[0] != N_COMPARTMENTS:
        raise ValueError(f"state must have {N_COMPARTMENTS} components along axis 0, got shape {x.shape}")
    if check and np.any(x < 0):
        raise ValueError("state components must be >= 0")
    return x


def dfe_components(params: ModelParameters) -> tuple[float, float]:
    """Disease-free (S°, Q°) from the closed form."""
    scale = params.lambda_in / params.mu
    denom = params.mu + params.q + params.lam
    return scale * (params.mu + params.lam) / denom, scale * params.q / denom


def effective_contact_rate(params: ModelParameters, i_count):
    """Contact rate reduced by media coverage, ``beta1 - beta2 * I / (b + I)``."""
    if np.any(np.asarray(i_count) < 0):
        raise ValueError("i_count must be >= 0")
    return params.beta1 - params.beta2 * i_count / (params.b + i_count)


def incidence(params: ModelParameters, state) -> float:
    s, _, _, a, i, _, _ = as_state_array(state)
    return effective_contact_rate(params, i) * s * (i + params.theta * a)


def _rhs(p: ModelParameters, s, q, e, a, i, h, r):
    # Works on floats and on equally shaped arrays; no validation.
    inc = (p.beta1 - p.beta2 * i / (p.b + i)) * s * (i + p.theta * a)
    return (
        p.lambda_in - inc + p.lam * q - (p.mu + p.q) * s,
        p.q * s - (p.mu + p.lam) * q,
        inc - (p.mu + p.sigma) * e,
        (1.0 - p.p) * p.sigma * e - (p.mu + p.eps_a + p.gamma_a + p.d_a) * a,
        p.sigma * p.p * e - (p.mu + p.eps_i + p.gamma_i + p.d_i) * i,
        p.eps_i * i + p.eps_a * a - (p.mu + p.d_h + p.gamma_h) * h,
        p.gamma_h * h + p.gamma_i * i + p.gamma_a * a - p.mu * r,
    )


def drift(params: ModelParameters, state) -> np.ndarray:
    """Deterministic vector field; ``state`` may carry extra trailing batch axes."""
    x = as_state_array(state)
    return np.array(_rhs(params, *x))


def diffusion(noise: NoiseIntensities, state) -> np.ndarray:
    """Diagonal of the diffusion matrix, ``sig_k * X_k``."""
    x = as_state_array(state)
    sig = noise.as_array().reshape((N_COMPARTMENTS,) + (1,) * (x.ndim - 1))
    return sig * x


def total_population(state) -> float:
    return float(np.sum(np.asarray(state, dtype=float)))


def region_membership(state, params: ModelParameters, spec: RegionSpec = RegionSpec()) -> RegionMembership:
    x = as_state_array(state)
    n = float(np.sum(x))
    upper = n <= params.lambda_in / params.mu + spec.eta
    lower = n >= params.lambda_in / (params.mu + params.d_i + params.d_a + params.d_h) - spec.eta_prime
    s_o, q_o = dfe_components(params)
    return RegionMembership(upper, lower, upper and lower, bool(x[0] <= s_o and x[1] <= q_o))
