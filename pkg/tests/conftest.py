import math

import numpy as np
import pytest

from sphere_multipliers import config as app_config
from sphere_multipliers.cache import get_cache_registry
from sphere_multipliers.harmonics import random_coefficients
from sphere_multipliers.kernels import power_law_zonal
from sphere_multipliers.specialfns import degree_limit, set_degree_limit


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch, tmp_path):
    """Keep user config files and SPHERE_MULTIPLIERS_* variables out of every test; restore the degree limit."""
    for name in list(app_config.os.environ):
        if name.startswith(f"{app_config.ENV_PREFIX}_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr(app_config, "LOCAL_CONFIG_PATH", tmp_path / "absent" / "config.local.yaml")
    monkeypatch.setattr(app_config, "DEFAULT_CONFIG_PATH", tmp_path / "absent" / "config.yaml")
    monkeypatch.setenv(f"{app_config.ENV_PREFIX}_EVENTS", "false")
    limit = degree_limit()
    yield
    set_degree_limit(limit)


@pytest.fixture
def fresh_caches():
    registry = get_cache_registry()
    registry.clear()
    yield registry
    registry.clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def band_limited(rng):
    """A seeded band-limited function on S^2, K = 16."""
    return random_coefficients(2, 16, rng)


@pytest.fixture
def smooth_kernel():
    """a_k = (1 + k)^{-3.5} on S^2: Hölder exponent 1.5."""
    return power_law_zonal(2, 128, 3.5)


@pytest.fixture
def half_pi():
    return math.pi / 2
