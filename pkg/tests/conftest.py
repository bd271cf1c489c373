import os

from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def record(request, capsys):
    """Print one verdict line immediately and keep it for the terminal summary."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def _record(line: str) -> None:
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
