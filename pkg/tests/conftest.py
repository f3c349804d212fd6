import random

from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ncadelic.scalars import GroupAlgElem, is_generic

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("repo")


def rationals(lo=-6, hi=6, max_den=4):
    return st.builds(lambda n, d: mpq(n, d), st.integers(lo, hi), st.integers(1, max_den))


def taus(m, lo=-6, hi=6):
    return st.lists(rationals(lo, hi), min_size=m, max_size=m).map(lambda vs: GroupAlgElem(m, vs))


def generic_taus(m):
    return taus(m).filter(lambda t: is_generic(t)[0])


def rng(seed=0):
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, summary_lines

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in summary_lines():
            terminalreporter.write_line(line)
