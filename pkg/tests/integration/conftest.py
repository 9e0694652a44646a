import numpy as np
import pytest

from rescont.potentials import ChannelSet, PotentialModel
from rescont.radial_solver import RadialGrid


@pytest.fixture(scope="session")
def grid() -> RadialGrid:
    return RadialGrid(4.6, 4096)


@pytest.fixture(scope="session")
def s_model() -> PotentialModel:
    return PotentialModel(ChannelSet((0,)), np.array([[7.0]]))


@pytest.fixture(scope="session")
def p_model() -> PotentialModel:
    return PotentialModel(ChannelSet((1,)), np.array([[20.0]]))


@pytest.fixture(scope="session")
def sp_model() -> PotentialModel:
    """s/p coupling, λ22 continued."""
    return PotentialModel(
        ChannelSet((0, 1)), np.array([[7.0, 0.5], [0.5, 20.0]]), continuation_index=(1, 1)
    )


@pytest.fixture(scope="session")
def pd_model() -> PotentialModel:
    """p/d coupling, λ22 continued."""
    return PotentialModel(
        ChannelSet((1, 2)), np.array([[10.0, 0.3], [0.3, 30.0]]), continuation_index=(1, 1)
    )
