from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def configs_dir() -> Path:
    return ROOT / "configs"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([12345])))
