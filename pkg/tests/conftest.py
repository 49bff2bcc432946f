import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def models_dir():
    return MODELS


def load(name):
    from lpts_agar import parse_model

    return parse_model((MODELS / name).read_text())


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n][1])
