import numpy as np
import pytest
from hypothesis import strategies as st

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, ok: bool, text: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def prob_vectors(min_size=1, max_size=12, allow_zeros=True):
    """Hypothesis strategy for normalized non-negative arrays."""
    weight = st.floats(0.0, 1.0) if allow_zeros else st.floats(1e-3, 1.0)
    return (
        st.lists(weight, min_size=min_size, max_size=max_size)
        .filter(lambda xs: sum(xs) > 1e-6)
        .map(lambda xs: np.asarray(xs) / sum(xs))
    )


def random_simplex(rng, n, sparse=0.0):
    """Dirichlet draw with random concentration; ``sparse`` zeroes entries."""
    alpha = rng.choice([0.1, 0.5, 1.0, 5.0])
    p = rng.dirichlet(np.full(n, alpha))
    if sparse:
        mask = rng.random(n) < sparse
        if mask.all():
            mask[rng.integers(n)] = False
        p = np.where(mask, 0.0, p)
        p = p / p.sum()
    return p
