import numpy as np
import pytest

from maccfd.channel import LinkGeometry, SystemParams, sample_geometry, ChannelRealization, LINK_ORDER

ACCEPTANCE_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return SystemParams()


@pytest.fixture(scope="session")
def chan(params):
    return sample_geometry(12345, params)


def single_path_channel(seed=0):
    """Every link has one path: |h| does not depend on antenna positions."""
    rng = np.random.default_rng(seed)
    links = {}
    for key in LINK_ORDER:
        angles = rng.uniform(-np.pi / 2, np.pi / 2, size=(2, 2))
        scale = 1e-5 if key[0] == key[1] else 5e-5
        sigma = scale * (rng.normal() + 1j * rng.normal())
        links[key] = LinkGeometry(aods=angles[:1], aoas=angles[1:], sigma=[[sigma]])
    return ChannelRealization(links=links, seed=seed)
