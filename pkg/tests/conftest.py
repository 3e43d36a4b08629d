import numpy as np
import pytest

from bncx.fixtures import binary_example, disease_spec, disease_store, hub_spec, random_bnc
from bncx.ftree import extract_ftree
from bncx.jointree import compile_jointree


def ftree_for(spec):
    jt = compile_jointree(spec.net, spec.features, spec.target)
    return extract_ftree(jt, spec)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def hub():
    spec = hub_spec(0)
    return spec, ftree_for(spec)


@pytest.fixture(scope="session")
def disease():
    spec = disease_spec()
    return spec, ftree_for(spec)


@pytest.fixture
def example():
    return binary_example()


@pytest.fixture
def disease_circuits():
    return disease_store()


@pytest.fixture(scope="session")
def random_specs():
    return [random_bnc(seed) for seed in range(40)]


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
