import pytest

from railservice.channel import ChannelParams
from railservice.geometry import two_sine_curve


@pytest.fixture(scope="session")
def example_params() -> ChannelParams:
    """25 dB at the nearest point, alpha = 3, station 50 m off the track."""
    return ChannelParams.from_snr0_db(25.0, 3.0, 50.0)


@pytest.fixture(scope="session")
def example_curve():
    return two_sine_curve(50.0)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Lines are printed immediately (visible with ``-s``) and again in the
    terminal summary.
    """
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
