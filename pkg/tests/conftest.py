import numpy as np
import pytest
from hypothesis import settings

from annulus_div import AnnulusDomain, Resolution, assemble_solution, make_source

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")

KINDS = ["zero", "harmonic_radial", "radial_bump_meansub", "boundary_loaded"]


@pytest.fixture(scope="session")
def solution_cache():
    cache = {}

    def get(kind, n, band=None, nodes=64, params=None, r1=1.0, r2=2.0):
        key = (kind, n, band, nodes, repr(params), r1, r2)
        if key not in cache:
            src = make_source(kind, n, r1, r2, params)
            cache[key] = assemble_solution(src, AnnulusDomain(n, r1, r2), Resolution(band, nodes))
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
