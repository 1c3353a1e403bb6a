import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fluxnet.netparse import parse_network

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE = []

NACL = """\
species Na, Cl2, NaCl
2 Na + Cl2 <-> 2 NaCl : kf=1.0, kb=1.0
"""


@pytest.fixture
def nacl():
    return parse_network(NACL)


@pytest.fixture
def ab():
    return parse_network("species A, B\nA <-> B : kf=1, kb=1\n")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    def record(name, ok, detail=""):
        ACCEPTANCE.append((name, bool(ok), detail))
        print(f"{name}: {'PASS' if ok else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{name:<6s} {'PASS' if ok else 'FAIL'}  {detail}")
