import pathlib

import pytest

from daydreamer.domain import load_domain, load_persona

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "daydreamer" / "data"
FIXTURES = pathlib.Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def nuart_domain():
    return load_domain(DATA / "nuart_domain.cd")


@pytest.fixture
def nuart_persona():
    return load_persona(DATA / "nuart_persona.cd")
