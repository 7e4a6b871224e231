import os
import random

import pytest
from hypothesis import settings

from cusp_forge.field import field
from cusp_forge.ideals import parse_ideal

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIELDS = [2, 3, 5, 13]

# (D, n, p, k) entries used for the constant-term properties
CATALOG = [
    (5, "(1)", 3, 2),
    (3, "(1)", 5, 1),
    (3, "(1)", 5, 2),
    (5, "(2)", 3, 2),
    (5, "(7)", 7, 1),
    (2, "(7)", 7, 2),
    (13, "(3)", 3, 2),
    (10, "(1)", 3, 2),
    (3, "(2)", 3, 1),
]


def level(D, text):
    F = field(D)
    return F, parse_ideal(F, text)


@pytest.fixture
def rng():
    return random.Random(int(os.environ.get("CUSP_FORGE_SEED", "0")))
