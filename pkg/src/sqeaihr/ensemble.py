"""Monte Carlo ensembles of seeded SDE paths and the estimators built on them."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .integrators import IntegratorConfig, Trajectory, integrate_sde_paths
from .model import COMPARTMENTS, N_COMPARTMENTS, ModelParameters, NoiseIntensities

EXTINCTION_THRESHOLD = 1e-3
DEFAULT_TAIL_FRACTION = 0.2

Selector = Union[str, Mapping[str, float], Sequence[float]]


def selector_weights(selector: Selector) -> np.ndarray:
    """Turn a compartment name, a ``{name: coef}`` mapping or 7 weights into a weight vector."""
    if isinstance(selector, str):
        selector = {name.strip(): 1.0 for name in selector.split("+")}
    if isinstance(selector, Mapping):
        w = np.zeros(N_COMPARTMENTS)
        for name, coef in selector.items():
            if name not in COMPARTMENTS:
                raise ValueError(f"unknown compartment {name!r}")
            w[COMPARTMENTS.index(name)] += coef
        return w
    w = np.asarray(selector, dtype=float)
    if w.shape != (N_COMPARTMENTS,):
        raise ValueError("weight vector must have 7 entries")
    return w


@dataclass
class TimeAverageSeries:
    grid: np.ndarray
    values: np.ndarray


def running_mean(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Left-Riemann running average along the last axis of ``values``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size == 0:
        raise ValueError("empty series")
    widths = np.diff(times)
    integral = np.cumsum(values[..., :-1] * widths, axis=-1)
    elapsed = times[1:] - times[0]
    out = np.empty_like(values)
    out[..., 0] = values[..., 0]
    out[..., 1:] = integral / elapsed
    return out


def time_average(traj: Trajectory, selector: Selector) -> TimeAverageSeries:
    """Running mean ``(1/t) * integral of phi`` for a component or linear combination."""
    if len(traj) == 0:
        raise ValueError("trajectory is empty")
    phi = traj.states @ selector_weights(selector)
    return TimeAverageSeries(traj.times, running_mean(traj.times, phi))


def _slope(times: np.ndarray, infected: np.ndarray) -> Optional[float]:
    start, end = infected[0], infected[-1]
    if not (start > 0 and end > 0):
        return None
    t = times[-1] - times[0]
    return (math.log(end) - math.log(start)) / t


def extinction_slope(traj: Trajectory) -> Optional[float]:
    """Finite-horizon estimate of ``ln(E + A + I) / t``.

    Returns ``None`` when the infected mass is zero at either end (already extinct).
    """
    return _slope(traj.times, traj.infected)


def persistence_estimate(traj: Trajectory, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """Minimum of the running mean of A + I over the final ``tail_fraction`` of the grid."""
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    avg = time_average(traj, "A+I").values
    return float(_tail_min(avg, tail_fraction))


def _tail_min(avg: np.ndarray, tail_fraction: float):
    n = avg.shape[-1]
    start = min(n - 1, int(math.floor((1.0 - tail_fraction) * (n - 1))))
    return avg[..., start:].min(axis=-1)


@dataclass
class EnsembleSummary:
    n_paths: int
    grid: np.ndarray
    mean_path: np.ndarray  # (T, 7)
    q05: np.ndarray
    q95: np.ndarray
    extinction_fraction: float
    slopes: np.ndarray  # per path, nan where already extinct
    persistence_values: np.ndarray  # per path tail minimum of <A+I>
    terminal_averages: np.ndarray  # per path <X>(t_end), (n_paths, 7)
    extinction_threshold: float
    tail_fraction: float

    @property
    def slope_mean(self) -> float:
        finite = self.slopes[np.isfinite(self.slopes)]
        return float(finite.mean()) if finite.size else math.nan

    @property
    def slope_std(self) -> float:
        finite = self.slopes[np.isfinite(self.slopes)]
        return float(finite.std()) if finite.size else math.nan

    @property
    def n_already_extinct(self) -> int:
        return int(np.count_nonzero(~np.isfinite(self.slopes)))


def _run_chunk(args):
    params, noise, init, cfg, master_seed, indices = args
    return integrate_sde_paths(params, noise, init, cfg, master_seed, indices)[1]


def simulate_paths(
    params: ModelParameters,
    noise: NoiseIntensities,
    init,
    cfg: IntegratorConfig,
    master_seed: int,
    n_paths: int,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """All paths of an ensemble, shape (n_paths, T, 7), ordered by path index."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    indices = list(range(n_paths))
    if workers <= 1:
        states = _run_chunk((params, noise, init, cfg, master_seed, indices))
    else:
        chunks = [indices[i::workers] for i in range(workers) if indices[i::workers]]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(params, noise, init, cfg, master_seed, c) for c in chunks]))
        states = np.empty((n_paths,) + parts[0].shape[1:])
        for chunk, part in zip(chunks, parts):
            states[chunk] = part
    return cfg.record_times(), states


def summarize(
    times: np.ndarray,
    paths: np.ndarray,
    extinction_threshold: float = EXTINCTION_THRESHOLD,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
) -> EnsembleSummary:
    infected = paths[:, :, 2:5].sum(axis=-1)
    slopes = np.array([math.nan if (s := _slope(times, row)) is None else s for row in infected])
    averages = running_mean(times, np.moveaxis(paths, 1, -1))  # (n, 7, T)
    a_plus_i = averages[:, 3, :] + averages[:, 4, :]
    return EnsembleSummary(
        n_paths=paths.shape[0],
        grid=times,
        mean_path=paths.mean(axis=0),
        q05=np.quantile(paths, 0.05, axis=0, method="inverted_cdf"),
        q95=np.quantile(paths, 0.95, axis=0, method="inverted_cdf"),
        extinction_fraction=float(np.mean(infected[:, -1] < extinction_threshold)),
        slopes=slopes,
        persistence_values=_tail_min(a_plus_i, tail_fraction),
        terminal_averages=averages[:, :, -1],
        extinction_threshold=extinction_threshold,
        tail_fraction=tail_fraction,
    )


def run_ensemble(
    params: ModelParameters,
    noise: NoiseIntensities,
    init,
    cfg: IntegratorConfig,
    master_seed: int,
    n_paths: int,
    *,
    extinction_threshold: float = EXTINCTION_THRESHOLD,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    workers: int = 1,
) -> EnsembleSummary:
    """Integrate ``n_paths`` seeded paths and reduce them in path-index order.

    Failures propagate as :class:`~sqeaihr.integrators.IntegrationError` carrying
    the offending seed and step.
    """
    times, paths = simulate_paths(params, noise, init, cfg, master_seed, n_paths, workers)
    return summarize(times, paths, extinction_threshold, tail_fraction)
