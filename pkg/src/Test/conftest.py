"""
Gemeinsame Fixtures: Iris-Datensatz und kleine Hand-Datensätze.
"""

from pathlib import Path

import numpy as np
import pytest

from dataset import Dataset, load_csv_file

DATA_DIR = Path(__file__).parent / 'data'
IRIS_PATH = DATA_DIR / 'iris.data'


@pytest.fixture(scope='session')
def iris_path():
    return IRIS_PATH


@pytest.fixture(scope='session')
def iris():
    return load_csv_file(IRIS_PATH)


@pytest.fixture
def zwei_cluster():
    """Zwei weit getrennte Klassen mit je 10 Datensätzen."""
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 0.5, size=(10, 2))
    b = rng.normal(100.0, 0.5, size=(10, 2))
    return Dataset.from_arrays(np.vstack([a, b]), ['A'] * 10 + ['B'] * 10)


@pytest.fixture
def linie():
    """Vier Punkte auf einer Geraden: A bei 0 und 3, B bei 4 und 10."""
    return Dataset.from_arrays(
        [[0.0, 0.0], [3.0, 0.0], [4.0, 0.0], [10.0, 0.0]],
        ['A', 'A', 'B', 'B'],
    )
