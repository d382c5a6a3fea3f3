import pathlib

import pytest

from adtypes.core import Instance, TypeSpec

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def example1() -> Instance:
    """Two slots; a video ad worth 12 with discounts (1/2, 1/3) and a link
    ad worth 10 with discounts (1/2, 1/4).  Optimal welfare 9 (link first),
    the naive swap gives 8.5."""
    video = TypeSpec("video", [12.0], [0.5, 1 / 3])
    link = TypeSpec("link", [10.0], [0.5, 0.25])
    return Instance(2, [video, link])


@pytest.fixture
def two_bidders() -> Instance:
    """One type, values (10, 6), discounts (1, 1/2): the classic pair whose
    winner owes 3 under externality pricing."""
    return Instance(2, [TypeSpec("bidders", [10.0, 6.0], [1.0, 0.5])])


@pytest.fixture
def fixtures_dir() -> pathlib.Path:
    return FIXTURES
