# tests/conftest.py
import numpy as np
import pandas as pd
import pytest

from campaign import FEATURES, ConfigGrid, enumerate_grid, execute_campaign
from config import setup_logging
from xplain import FeatureMatrix

setup_logging("WARNING")

# two c1 levels, everything else pinned; small swarms keep the runs fast
MICRO_GRID = ConfigGrid(
    c1_values=(0.3, 0.9),
    c2_values=(0.2,),
    w_values=(0.4,),
    n_values=(10,),
    k_values=(1,),
    p_values=(2,),
    r_values=(1,),
)


@pytest.fixture(scope="session")
def micro_grid():
    return MICRO_GRID


@pytest.fixture(scope="session")
def micro_records():
    """2 configs x fids {1, 3} x 2 instances x 2 runs, Star, budget 10."""
    return execute_campaign(
        "star", grid=MICRO_GRID, fids=(1, 3), iids=(1, 2), runs_per_instance=2, budget=10, workers=1
    )


def factorial_matrix(target_fn, grid: ConfigGrid = None) -> FeatureMatrix:
    """Feature matrix over a complete grid with target = target_fn(features frame)."""
    features = pd.DataFrame(enumerate_grid(grid), columns=list(FEATURES)).astype(float)
    features.index.name = "config_index"
    target = pd.Series(np.asarray(target_fn(features), dtype=float), index=features.index, name="aocc")
    return FeatureMatrix(features=features, target=target, fid=1, topology="Star")


@pytest.fixture
def small_factorial_grid():
    return ConfigGrid(
        c1_values=(0.3, 0.5, 0.9),
        c2_values=(0.2, 0.7),
        w_values=(0.4, 0.9),
        n_values=(50, 100),
        k_values=(1, 2),
        p_values=(1, 2),
        r_values=(1, 2),
    )


@pytest.fixture
def make_factorial():
    return factorial_matrix
