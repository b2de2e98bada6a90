import numpy as np
import pytest
from hypothesis import strategies as st

from sqeaihr.analysis import compute_r0
from sqeaihr.model import ModelParameters, NoiseIntensities, State, dfe_components

PAPER_INIT = State(1.8e6, 0.0, 10.0, 15.0, 8.0, 5.0, 0.0)
FIG3_NOISE = NoiseIntensities(0.024, 0.0235, 0.015, 0.0174, 0.019, 0.0213, 0.0238)
FIG4_NOISE = NoiseIntensities(0.019, 0.0185, 0.014, 0.017, 0.0158, 0.0136, 0.0182)


def figure_params(beta1, ratio=0.6, **extra):
    return ModelParameters.table1(beta1=beta1, beta2=ratio * beta1, p=0.6201, **extra)


def random_params(rng: np.random.Generator, r0_range=(0.2, 5.0)) -> ModelParameters:
    """Table 1 rates scaled by log-uniform factors, with beta1 set for a target R0."""

    def jitter(x):
        return x * float(np.exp(rng.uniform(-1.0, 1.0)))

    base = ModelParameters.table1()
    rates = {k: jitter(v) for k, v in base.as_dict().items() if k not in ("theta", "p", "beta1", "beta2")}
    rates["theta"] = float(rng.uniform(0.01, 0.99))
    rates["p"] = float(rng.uniform(0.01, 0.99))
    unit = ModelParameters.table1(beta1=1.0, beta2=0.0, **rates)
    r0_target = float(np.exp(rng.uniform(np.log(r0_range[0]), np.log(r0_range[1]))))
    beta1 = r0_target / compute_r0(unit, dfe_components(unit)[0])
    return unit.replace(beta1=beta1, beta2=float(rng.uniform(0, 1)) * beta1)


@st.composite
def valid_params(draw, r0_range=(0.2, 5.0)):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_params(np.random.default_rng(seed), r0_range)


@st.composite
def positive_states(draw, scale=1e6):
    values = draw(st.lists(st.floats(min_value=0.0, max_value=scale), min_size=7, max_size=7))
    return State(*values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting ---------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, checks: dict) -> bool:
    """Record one PASS/FAIL line for an acceptance criterion; ``checks`` maps label -> (ok, detail)."""
    ok = all(passed for passed, _ in checks.values())
    details = "; ".join(f"{label}: {detail}{'' if passed else ' [FAIL]'}" for label, (passed, detail) in checks.items())
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {details}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
