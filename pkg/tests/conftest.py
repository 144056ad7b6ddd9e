import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Shared on-disk cache for fine-resolution reference solves."""
    return str(tmp_path_factory.mktemp("refcache"))
