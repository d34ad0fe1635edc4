import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from capir.level import load_level, parse_level
from capir.planner import default_cache_path, plan_level, save_cache

FIXTURES = Path(__file__).parent / "fixtures"

CORRIDOR3 = """\
capir-level v1
gamma=0.9 flee_radius=4 flee_prob=0.9 shoot_range=1 max_steps=50 switch_stay=0.8
#####
#HDG#
#####
"""


@pytest.fixture(scope="session")
def corridor3_level():
    """1x3 corridor, one ghost: the smallest planning target (36 states)."""
    return parse_level(CORRIDOR3, "corridor3")


@pytest.fixture(scope="session")
def bundled():
    """Planned caches for the bundled levels, keyed by name (lazy)."""
    cache = {}

    def get(name):
        if name not in cache:
            level = load_level(name)
            cache[name] = (level, plan_level(level))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def fixture_level():
    return parse_level((FIXTURES / "fixture_level.lvl").read_text(), "fixture_level")


@pytest.fixture(scope="session")
def fixture_cache(fixture_level):
    return plan_level(fixture_level)


@pytest.fixture(scope="session")
def service_level_dir(tmp_path_factory, fixture_cache):
    """A level directory for the server: fixture level plus its cache."""
    d = tmp_path_factory.mktemp("levels")
    shutil.copy(FIXTURES / "fixture_level.lvl", d / "fixture_level.lvl")
    save_cache(fixture_cache, default_cache_path(d / "fixture_level.lvl"))
    return d
