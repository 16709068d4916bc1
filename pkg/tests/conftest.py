import numpy as np
import pytest

from infermpc.core import Problem


def integrator_1d(horizon=3, lo=-np.inf, hi=np.inf):
    return Problem(
        horizon=horizon,
        state_dim=1,
        input_dim=1,
        dynamics=lambda x, u: x + u,
        stage_cost=lambda x, u, t: np.sum(np.asarray(u) ** 2, axis=-1),
        input_lower=[lo],
        input_upper=[hi],
    )


def double_integrator(horizon=1, dt=0.1):
    """State [position, velocity], input acceleration, symplectic Euler."""

    def f(x, u):
        x = np.asarray(x, dtype=float)
        v = x[..., 1:2] + dt * np.asarray(u, dtype=float)
        p = x[..., 0:1] + dt * v
        return np.concatenate([p, v], axis=-1)

    def stage(x, u, t):
        return np.sum(x**2, axis=-1) + 0.1 * np.sum(np.asarray(u) ** 2, axis=-1)

    return Problem(horizon=horizon, state_dim=2, input_dim=1, dynamics=f, stage_cost=stage,
                   terminal_cost=lambda x: 5.0 * np.sum(x**2, axis=-1),
                   input_lower=[-2.0], input_upper=[2.0])


@pytest.fixture
def integrator():
    return integrator_1d()


@pytest.fixture
def dbl():
    return double_integrator(horizon=8)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
