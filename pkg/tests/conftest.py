import pytest

import pdteleop as pt
from pdteleop.config import default_config_text, loads_config


@pytest.fixture(scope="session")
def default_config():
    return loads_config(default_config_text())


@pytest.fixture(scope="session")
def default_run(default_config):
    """The reference 60 s output-feedback run (shared; ~25 s wall)."""
    return pt.run_scenario(default_config)


@pytest.fixture(scope="session")
def sfb_run(default_config):
    """State-feedback twin of the reference run."""
    return pt.run_scenario(default_config.with_mode(pt.STATE_FEEDBACK))
