import random

import pytest
from hypothesis import HealthCheck, settings

from finchar.field import GF
from finchar.poly import Poly

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_poly(rng: random.Random, spec, n: int, max_terms: int = 4, max_deg: int = 3,
                allow_zero: bool = False) -> Poly:
    """Sparse random polynomial in R_q with total degree <= max_deg."""
    q = spec.q
    while True:
        terms = {}
        for _ in range(rng.randint(1, max_terms)):
            e = [0] * n
            for _ in range(rng.randint(0, max_deg)):
                i = rng.randrange(n)
                if sum(e) < max_deg:
                    e[i] = min(e[i] + 1, q - 1)
            terms[tuple(e)] = rng.randrange(1, q)
        p = Poly(spec, n, terms)
        if allow_zero or not p.is_zero():
            return p


def random_system(rng: random.Random, spec, n: int, l: int, **kw) -> list[Poly]:
    return [random_poly(rng, spec, n, **kw) for _ in range(l)]


@pytest.fixture
def F2():
    return GF(2)


@pytest.fixture
def F3():
    return GF(3)


def random_monic_triset(rng: random.Random, spec, n: int, max_terms: int = 3) -> list[Poly]:
    """Monic triangular set: each leader x_c^d plus a tail of lower x_c-degree."""
    q = spec.q
    size = rng.randint(1, n)
    classes = sorted(rng.sample(range(1, n + 1), size))
    out = []
    for c in classes:
        d = rng.randint(1, q - 1)
        lead = [0] * n
        lead[c - 1] = d
        terms = {tuple(lead): 1}
        for _ in range(rng.randint(0, max_terms)):
            e = [rng.randrange(q) if i < c - 1 else 0 for i in range(n)]
            e[c - 1] = rng.randrange(d)
            terms[tuple(e)] = rng.randrange(1, q)
        out.append(Poly(spec, n, terms))
    return out


# lines recorded by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
