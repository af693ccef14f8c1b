import sys
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).resolve().parents[1]))

from causalrep.progress import set_progress_enabled  # noqa: E402


def pytest_configure(config):
	config.addinivalue_line("markers", "slow: long-running schedule reproductions (set RUN_SLOW=1 in scripts/run-tests.sh)")


@pytest.fixture(autouse=True)
def _quiet_progress():
	set_progress_enabled(False)
	yield
