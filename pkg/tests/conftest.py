from importlib import resources
from pathlib import Path

import pytest
from hypothesis import settings

from floquetspec import load_model

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")

FIXTURES = Path(str(resources.files("floquetspec") / "fixtures"))


def fixture_model(name):
    return load_model(FIXTURES / f"{name}.yaml")


@pytest.fixture(scope="session")
def pi_half():
    return fixture_model("dde_pi_half")


@pytest.fixture(scope="session")
def double_root():
    return fixture_model("dde_double_root")


@pytest.fixture(scope="session")
def periodic():
    return fixture_model("dde_periodic")


@pytest.fixture(scope="session")
def idde():
    return fixture_model("idde_quad")


@pytest.fixture(scope="session")
def mfde():
    return fixture_model("mfde_symmetric")
