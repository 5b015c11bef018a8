import pytest
from hypothesis import HealthCheck, settings

from metacoeff import bisector_from_q_short, build_cover, build_root_datum
from metacoeff.cover import gl_bisector

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sl2():
    return build_root_datum("SL2")


@pytest.fixture(scope="session")
def sp4():
    return build_root_datum("C", 2, "sc")


@pytest.fixture(scope="session")
def gl2():
    return build_root_datum("GL", 2)


def sl2_cover(n, q_short=1):
    d = build_root_datum("SL2")
    return build_cover(d, bisector_from_q_short(d, q_short), n)


def sp4_cover(n):
    d = build_root_datum("C", 2, "sc")
    return build_cover(d, bisector_from_q_short(d, 1), n)


def gl2_cover(n, p=0, q=1):
    return build_cover(build_root_datum("GL", 2), gl_bisector(2, p, q), n)


def g2_cover(n):
    d = build_root_datum("G2")
    return build_cover(d, bisector_from_q_short(d, 1), n)
