import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from app.core.symplectic import build_symplectic_form
from app.models import GaussianMeasurement, SymplecticSpace


@pytest.fixture(scope="session")
def single_mode() -> SymplecticSpace:
    return build_symplectic_form(1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def heterodyne() -> GaussianMeasurement:
    return GaussianMeasurement(k_matrix=np.eye(2), beta=0.5 * np.eye(2))


@pytest.fixture(scope="session")
def squeezed_heterodyne() -> GaussianMeasurement:
    return GaussianMeasurement(k_matrix=np.eye(2), beta=np.diag([1.0, 0.25]))


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    def _write(name: str = "run.json", **values: Any) -> Path:
        config: dict[str, Any] = {
            "modes": 1,
            "epsilon": [0.5, 0.0, 0.0, 0.5],
            "beta": [0.5, 0.0, 0.0, 0.5],
            "energy": 1.5,
        }
        config.update(values)
        path = tmp_path / name
        path.write_text(json.dumps({k: v for k, v in config.items() if v is not None}))
        return path

    return _write
