import os

import numpy as np
import pytest

from singqc.paths import NAMED_GATES, GateParams, Path


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SINGQC_HEAVY") == "1":
        return
    skip = pytest.mark.skip(reason="heavy run; set SINGQC_HEAVY=1 to include")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gate_variants():
    """Every named gate on both paths, as pytest params."""
    return [pytest.param(GateParams(g.theta0, g.phi0, g.gamma, p), id=f"{name}-{p.value}")
            for name, g in NAMED_GATES.items() for p in Path]
