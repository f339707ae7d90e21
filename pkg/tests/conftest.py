import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pksmri.phantom import PhantomSpec, gen_coil_maps, gen_phantom, simulate_acquisition
from pksmri.kspace import zero_filled_recon

settings.register_profile("pksmri", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pksmri")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture(scope="session")
def desk_slice():
    """Fully-sampled 64x64 4-coil k-space for every contrast, plus the T2 truth image."""
    spec = PhantomSpec(size=64, n_coils=4, seed=0)
    maps = gen_coil_maps(spec.size, spec.n_coils, spec.seed, spec.coil_width)
    full = {k: simulate_acquisition(v, maps) for k, v in gen_phantom(spec).items()}
    return full, zero_filled_recon(full["T2"])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT_LINES:
            terminalreporter.write_line(line)
