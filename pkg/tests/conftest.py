import numpy as np
import pytest

from contractlab.instances import Action, FiniteInstance, OutcomeSpace


@pytest.fixture(scope="session")
def fig_table() -> FiniteInstance:
    """The four-outcome table instance used across the docs (null included).

    Costs 0.2..0.8; CCDF views: F(1|.) = (0.2, 0.35, 0.45, 0.5),
    F(2|.) = (0.1, 0.2, 0.26, 0.32), F(3|.) = (0.05, 0.1, 0.15, 0.17).
    Values are evenly spaced on [0, 1] (the table itself fixes none).
    """
    return FiniteInstance(
        OutcomeSpace((0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)),
        (
            Action(0.0, (1.0, 0.0, 0.0, 0.0)),
            Action(0.2, (0.8, 0.1, 0.05, 0.05)),
            Action(0.4, (0.65, 0.15, 0.1, 0.1)),
            Action(0.6, (0.55, 0.19, 0.11, 0.15)),
            Action(0.8, (0.5, 0.18, 0.15, 0.17)),
        ),
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
