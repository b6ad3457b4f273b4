import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cat0_classify import build_EFIN, build_EVC, preset  # noqa: E402


@pytest.fixture(scope="session")
def p1():
    return preset("p1")


@pytest.fixture(scope="session")
def efin_p2_r2():
    return build_EFIN(preset("p2"), 2)


@pytest.fixture(scope="session")
def evc_pm_r2():
    return build_EVC(preset("pm"), 2, 1)
