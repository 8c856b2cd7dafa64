import hypothesis
import pytest

from fmgn import NoiseParams, SystemParams

hypothesis.settings.register_profile(
    "repro", derandomize=True, max_examples=50, deadline=None
)
hypothesis.settings.load_profile("repro")


@pytest.fixture(scope="session")
def reference_params() -> SystemParams:
    return SystemParams.reference()


@pytest.fixture(scope="session")
def reference_noise() -> NoiseParams:
    return NoiseParams(p_ase=4.1e-6, eta=7244.0)
