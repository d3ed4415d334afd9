import pytest
from hypothesis import settings

settings.register_profile("pinrate", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("pinrate")


@pytest.fixture(scope="session")
def basic_half():
    from pinrate import make_basic_law

    return make_basic_law(0.5)
