import pytest

from rainbowfq.field import make_field
from rainbowfq.generators import generate
from rainbowfq.kinds import GeneratorKind
from rainbowfq.models import GeneratorSpec
from rainbowfq.rainbow import RainbowService


@pytest.fixture
def f5():
    return make_field(5)


@pytest.fixture
def f7():
    return make_field(7)


@pytest.fixture
def f11():
    return make_field(11)


@pytest.fixture
def f13():
    return make_field(13)


@pytest.fixture
def f25():
    return make_field(5, 2, modulus=[2, 0, 1])


@pytest.fixture
def service():
    return RainbowService(threads=1)


@pytest.fixture
def make_coloring():
    def build(field, kind, colors=1, seed=0):
        return generate(field, GeneratorSpec(kind=GeneratorKind(kind), color_count=colors, seed=seed))
    return build
