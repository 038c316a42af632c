import os
import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from crdegen.dsl import load_document  # noqa: E402
from crdegen.gaussian import GaussianRational, gr  # noqa: E402
from crdegen.poly import PolarizedPoly  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "crdegen" / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def fixture_doc():
    def load(name):
        return load_document(FIXTURES / name)
    return load


def small_fraction(height=10):
    return st.builds(lambda p, q: __import__("fractions").Fraction(p, q),
                     st.integers(-height, height), st.integers(1, height))


def gaussians(height=10):
    return st.builds(lambda a, b: GaussianRational(a, b), small_fraction(height), small_fraction(height))


@st.composite
def polys(draw, nvars=2, max_terms=4, max_deg=2, height=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = tuple(draw(st.integers(0, max_deg)) for _ in range(2 * nvars))
        terms[e] = draw(gaussians(height))
    return PolarizedPoly(nvars, terms)


@st.composite
def points(draw, nvars=2, height=5):
    return [draw(gaussians(height)) for _ in range(nvars)]


def random_gaussian(rng: random.Random, height: int) -> GaussianRational:
    from fractions import Fraction
    return gr(GaussianRational(Fraction(rng.randint(-height, height), rng.randint(1, height)),
                               Fraction(rng.randint(-height, height), rng.randint(1, height))))
