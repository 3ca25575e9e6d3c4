import pytest
from hypothesis import HealthCheck, settings

from nilseqlab.exactnum import declare_generator, reset_generators

# 40 digits each; parse_phase and the generator registry keep them exact,
# floats only appear at evaluation time.
SQRT2 = "1.414213562373095048801688724209698078570"
SQRT3 = "1.732050807568877293527446341505872366943"

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("suite")


@pytest.fixture(autouse=True)
def generator_registry():
    reset_generators()
    declare_generator("g1", SQRT2)
    declare_generator("g2", SQRT3)
    yield
    reset_generators()
