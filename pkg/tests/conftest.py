import pytest

from hcmu import make_metric, make_params, realize_on_sphere
from hcmu.configs import REFERENCE


def _metric(name, **norm):
    real = realize_on_sphere(REFERENCE[name])
    return make_metric(real.form, make_params(real.form, Lambda=real.report.Lambda, **norm))


@pytest.fixture(scope="session")
def metrics():
    return {name: _metric(name) for name in REFERENCE}


@pytest.fixture(scope="session")
def football():
    # normalized so that K = 1/2 on the line Re z = 1/2
    return _metric("A", base_point=0.5, K0=0.5)
