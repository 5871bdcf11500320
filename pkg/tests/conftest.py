import warnings

import pytest

from mechcat.presets import preset
from mechcat.runner import run


@pytest.fixture(scope="session")
def preset_run(tmp_path_factory):
    """Run presets once per session and cache the results."""
    cache = {}
    base = tmp_path_factory.mktemp("preset_runs")

    def get(name):
        if name not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cache[name] = run(preset(name), base / name)
        return cache[name]

    return get
