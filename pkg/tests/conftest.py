import random
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=3)
seeds = st.integers(min_value=0, max_value=10**6)


def rng_from(seed: int) -> random.Random:
    return random.Random(seed)


def frac_list(values):
    return [Fraction(v) for v in values]
