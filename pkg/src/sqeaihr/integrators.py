"""Fixed-step trajectory generation.

Deterministic paths use classical RK4. Stochastic paths use full-truncation
Euler-Maruyama: drift and diffusion are evaluated at max(x, 0) while the raw
iterate is carried forward.

Brownian increments are counter based. The value for channel ``c`` at step
``k`` of path ``(master_seed, path_index)`` is derived from a Philox4x64 block
keyed by the pair and addressed by ``2 * k``, so any step of any path can be
regenerated independently of how paths are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .model import (
    N_COMPARTMENTS,
    ModelParameters,
    NoiseIntensities,
    State,
    _rhs,
    as_state_array,
)

_RAW_PER_STEP = 8  # two Philox blocks, channel 8 unused
_STEP_CHUNK = 2048


class IntegrationError(ArithmeticError):
    """A non-finite state appeared during integration."""

    def __init__(self, step: int, seed: Optional["SeedSpec"] = None):
        where = f"step {step}" + (f", seed {seed.master_seed}/{seed.path_index}" if seed else "")
        super().__init__(f"non-finite state at {where}")
        self.step = step
        self.seed = seed


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float = 350.0
    dt: float = 0.01
    record_every: int = 1
    positivity_floor: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.t_end >= self.dt:
            raise ValueError("t_end must be >= dt")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be an integer >= 1")
        if self.positivity_floor < 0:
            raise ValueError("positivity_floor must be >= 0")
        n = round(self.t_end / self.dt)
        if abs(n * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)

    def record_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.record_every)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps

    def record_times(self) -> np.ndarray:
        return np.round(self.record_steps() * self.dt, 12)


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    path_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "path_index"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned value")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 7)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, k: int) -> State:
        return State.from_array(self.states[k])

    def component(self, name: str) -> np.ndarray:
        from .model import COMPARTMENTS

        return self.states[:, COMPARTMENTS.index(name)]

    @property
    def infected(self) -> np.ndarray:
        """E + A + I at each recorded point."""
        return self.states[:, 2] + self.states[:, 3] + self.states[:, 4]


def _clamp(x: np.ndarray, floor: float) -> np.ndarray:
    return np.where(x < floor, 0.0, x) if floor > 0 else np.maximum(x, 0.0)


def _path_uniforms(seed: SeedSpec, start_step: int, n_steps: int) -> np.ndarray:
    gen = np.random.Philox(
        key=np.array([seed.master_seed, seed.path_index], dtype=np.uint64),
        counter=2 * start_step,
    )
    raw = gen.random_raw(_RAW_PER_STEP * n_steps).reshape(n_steps, _RAW_PER_STEP)[:, :N_COMPARTMENTS]
    # 53-bit mantissa, shifted to the open interval (0, 1)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def increment_block(seed: SeedSpec, start_step: int, n_steps: int, dt: float) -> np.ndarray:
    """Increments for steps ``start_step .. start_step + n_steps - 1``, shape (n_steps, 7)."""
    return ndtri(_path_uniforms(seed, start_step, n_steps)) * math.sqrt(dt)


def wiener_increments(seed: SeedSpec, step_index: int, dt: float) -> np.ndarray:
    """The 7 Normal(0, dt) increments used at ``step_index`` of the given path."""
    return increment_block(seed, step_index, 1, dt)[0]


def integrate_ode(params: ModelParameters, init, cfg: IntegratorConfig) -> Trajectory:
    """Classical RK4 on the deterministic system."""
    x0 = as_state_array(init)
    if x0.shape != (N_COMPARTMENTS,):
        raise ValueError("integrate_ode takes a single state")
    dt = cfg.dt
    half, sixth = 0.5 * dt, dt / 6.0
    n_steps = cfg.n_steps
    rec = cfg.record_every
    x = tuple(float(v) for v in x0)
    rows = [x]
    raw_min = min(x)
    f = _rhs
    p = params
    for k in range(1, n_steps + 1):
        k1 = f(p, *x)
        k2 = f(p, *[xi + half * di for xi, di in zip(x, k1)])
        k3 = f(p, *[xi + half * di for xi, di in zip(x, k2)])
        k4 = f(p, *[xi + dt * di for xi, di in zip(x, k3)])
        x = tuple(
            xi + sixth * (a + 2.0 * b + 2.0 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
        )
        lo = min(x)
        if lo < raw_min:
            raw_min = lo
        if not math.isfinite(sum(x)):
            raise IntegrationError(k)
        if k % rec == 0 or k == n_steps:
            rows.append(x)
    states = _clamp(np.array(rows), cfg.positivity_floor)
    return Trajectory(
        times=cfg.record_times(),
        states=states,
        meta={
            "integrator": "rk4",
            "dt": dt,
            "seed": None,
            "params": params.fingerprint(),
            "min_unclamped": raw_min,
        },
    )


def _em_batch(
    params: ModelParameters,
    noise: NoiseIntensities,
    x0: np.ndarray,
    cfg: IntegratorConfig,
    seeds: Sequence[SeedSpec],
) -> tuple[np.ndarray, np.ndarray]:
    """Full-truncation EM for a batch of paths; x0 has shape (7, n_paths)."""
    dt = cfg.dt
    n_steps = cfg.n_steps
    n_paths = x0.shape[1]
    sig = noise.as_array()[:, None]
    stochastic = not noise.is_zero()
    record_steps = cfg.record_steps()
    out = np.empty((n_paths, len(record_steps), N_COMPARTMENTS))
    out[:, 0, :] = _clamp(x0, cfg.positivity_floor).T
    slot = 1
    raw_min = x0.min(axis=0)
    x = x0.copy()
    # overflow is detected explicitly below, so numpy's warning is redundant
    with np.errstate(over="ignore", invalid="ignore"):
        for start in range(0, n_steps, _STEP_CHUNK):
            count = min(_STEP_CHUNK, n_steps - start)
            if stochastic:
                db = np.stack([increment_block(s, start, count, dt) for s in seeds], axis=-1)
            for j in range(count):
                k = start + j + 1
                xp = np.maximum(x, 0.0)
                f = np.stack(_rhs(params, *xp))
                if stochastic:
                    x = x + f * dt + sig * xp * db[j]
                else:
                    x = x + f * dt
                if not np.isfinite(x).all():
                    bad = int(np.flatnonzero(~np.isfinite(x).all(axis=0))[0])
                    raise IntegrationError(k, seeds[bad])
                np.minimum(raw_min, x.min(axis=0), out=raw_min)
                if slot < len(record_steps) and k == record_steps[slot]:
                    out[:, slot, :] = _clamp(x, cfg.positivity_floor).T
                    slot += 1
    return out, raw_min


def integrate_sde_paths(
    params: ModelParameters,
    noise: NoiseIntensities,
    init,
    cfg: IntegratorConfig,
    master_seed: int,
    path_indices: Sequence[int],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate several seeded paths from a common initial state.

    Returns ``(times, states, min_unclamped)`` with ``states`` of shape
    (n_paths, n_records, 7). Each path is bit-identical to integrating it alone.
    """
    x = as_state_array(init)
    seeds = [SeedSpec(master_seed, int(i)) for i in path_indices]
    x0 = np.repeat(x.reshape(N_COMPARTMENTS, 1), len(seeds), axis=1)
    states, raw_min = _em_batch(params, noise, x0, cfg, seeds)
    return cfg.record_times(), states, raw_min


def integrate_sde(
    params: ModelParameters,
    noise: NoiseIntensities,
    init,
    cfg: IntegratorConfig,
    seed: SeedSpec,
) -> Trajectory:
    times, states, raw_min = integrate_sde_paths(params, noise, init, cfg, seed.master_seed, [seed.path_index])
    return Trajectory(
        times=times,
        states=states[0],
        meta={
            "integrator": "euler-maruyama",
            "dt": cfg.dt,
            "seed": seed,
            "params": params.fingerprint(),
            "min_unclamped": float(raw_min[0]),
        },
    )
