"""Seeded random inputs shared by the identity battery, the CLI and the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .fields import ScalarField, parse_field
from .forms import Form
from .hherm import random_hyperhermitian
from .forms import t_inv
from .poly import Poly
from .scalars import CQ


def random_rational(rng: random.Random, spread: int = 3, dens=(1, 2, 3)) -> Fraction:
    return Fraction(rng.randint(-spread, spread), rng.choice(dens))


def random_poly(rng: random.Random, nvars: int, max_degree: int = 3, terms: int = 4, real: bool = False) -> Poly:
    acc = {}
    for _ in range(terms):
        deg = rng.randint(0, max_degree)
        exps = [0] * nvars
        for _ in range(deg):
            exps[rng.randrange(nvars)] += 1
        im = 0 if real else random_rational(rng)
        acc[tuple(exps)] = CQ(random_rational(rng), im)
    return Poly(nvars, acc)


def random_form(rng: random.Random, n: int, p: int, q: int, max_degree: int = 3, words: int = 3) -> Form:
    holo = list(itertools.combinations(range(2 * n), p))
    anti = list(itertools.combinations(range(2 * n, 4 * n), q))
    terms = {}
    for _ in range(words):
        w = rng.choice(holo) + rng.choice(anti)
        terms[w] = random_poly(rng, 4 * n, max_degree, terms=3)
    return Form(n, terms)


def random_real_2form(rng: random.Random, n: int, spread: int = 3) -> Form:
    """Constant real (2,0)-forms; every one arises as ``t_inv`` of a hyperhermitian matrix."""
    return t_inv(random_hyperhermitian(rng, n, spread))


def random_polynomial_field(rng: random.Random, n: int, max_degree: int = 4, terms: int = 5) -> ScalarField:
    return ScalarField.from_poly(random_poly(rng, 4 * n, max_degree, terms, real=True))


def random_point(rng: random.Random, nvars: int, spread: int = 2) -> list[Fraction]:
    return [random_rational(rng, spread) for _ in range(nvars)]


def norm2_text(n: int, blocks=None) -> str:
    blocks = range(1, n + 1) if blocks is None else blocks
    return " + ".join(f"t{a}^2 + x{a}^2 + y{a}^2 + z{a}^2" for a in blocks)


def strictly_psh_corpus(n: int) -> list[ScalarField]:
    """Polynomial potentials with positive-definite Hessian on the unit box."""
    q = norm2_text(n)
    texts = [
        q,
        f"2*({q}) + t1*x1",
        f"{q} + t1^4/12",
        f"({q})^2 + {q}",
        f"3*({q}) + t1^2 - x1^2",
    ]
    if n >= 2:
        texts.append(f"{q} + t1*t2 + x1*x2")
    return [parse_field(t, n) for t in texts]


def psh_pair_corpus() -> list[tuple[ScalarField, ScalarField]]:
    """Five pairs of positive psh functions on H^1 for max-type closure checks."""
    q = norm2_text(1)
    pairs = [
        (f"1 + {q}", f"2 + t1^2 + x1^2 + y1^2 + z1^2 + t1"),
        (f"1 + ({q})^2", f"3 + {q}"),
        (f"exp({q})", f"2 + {q}"),
        (f"1 + 2*({q}) + t1", f"1 + {q}"),
        (f"exp(t1) + {q}", f"4 + ({q})^2"),
    ]
    return [(parse_field(a, 1), parse_field(b, 1)) for a, b in pairs]
