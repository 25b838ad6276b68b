import pytest

from ivref import dsl
from ivref.state import Stream, Universe
from ivref.time_core import Carrier


@pytest.fixture(scope="session")
def running():
    return dsl.load(dsl.bundled("running_example.ivdl"))


@pytest.fixture(scope="session")
def mutated():
    return dsl.load(dsl.bundled("mutated_example.ivdl"))


@pytest.fixture
def uv_universe():
    return Universe.of([("u", (0, 1)), ("v", (0, 1))])


@pytest.fixture
def apparent_stream(uv_universe):
    # u := 1 ; v := 1 from u, v = 0, 0
    return Stream.from_columns(uv_universe, {"u": [0, 1, 1], "v": [0, 0, 1]})


@pytest.fixture
def c3():
    return Carrier(3)
