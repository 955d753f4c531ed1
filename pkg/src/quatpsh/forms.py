"""Exterior algebra of (p,q)-forms on flat H^n with polynomial coefficients.

Complex chart: for each quaternionic coordinate ``q_a = t + x i + y j + z k``
we use ``z_{2a-1} = t + x*sqrt(-1)`` and ``z_{2a} = y - z*sqrt(-1)``.  These are
holomorphic for the right action of ``i``.

Letters are numbered ``0 .. 4n-1``: ``0 .. 2n-1`` are ``dz_1 .. dz_{2n}`` and
``2n .. 4n-1`` are ``dzbar_1 .. dzbar_{2n}``.  A form maps increasing letter
tuples (words) to :class:`~quatpsh.poly.Poly` coefficients.

Structure actions are pullbacks along the right action:
``(L o w)(X1, ..., Xk) = w(X1*L, ..., Xk*L)``.  Coefficients pass through
unchanged.  With this convention ``K o w = I o (J o w)``.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import linalg
from .hherm import HyperhermitianMatrix
from .poly import Poly, var_index, var_name
from .quat import Quaternion, QuaternionMatrix, realize, realize_rect, right_action_matrix
from .scalars import CQ

__all__ = [
    "Form",
    "FormSyntaxError",
    "StructureAction",
    "J_PAIR_TABLE",
    "letter_name",
    "dz",
    "dzbar",
    "wedge",
    "wedge_all",
    "d_holo",
    "d_antiholo",
    "del_",
    "delbar",
    "d",
    "act",
    "act_inverse",
    "j_act",
    "del_J",
    "d_ci",
    "conj_form",
    "is_real",
    "t_map",
    "t_inv",
    "top_ratio",
    "pullback",
    "volume_form",
    "evaluate_multilinear",
    "parse_form",
]

HALF = Fraction(1, 2)
I_UNIT = CQ(0, 1)


def letter_name(n: int, letter: int) -> str:
    if letter < 2 * n:
        return f"dz{letter + 1}"
    return f"dzbar{letter - 2 * n + 1}"


def _is_holo(n: int, letter: int) -> bool:
    return letter < 2 * n


def _sort_word(letters: Sequence[int]) -> tuple[int, tuple] | None:
    """Sign and sorted tuple, or None when a letter repeats."""
    if len(set(letters)) != len(letters):
        return None
    arr = list(letters)
    sign = 1
    for i in range(1, len(arr)):  # insertion sort counting transpositions
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(arr)


class Form:
    """A differential form over H^n; possibly of mixed degree."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple, Poly] | None = None):
        self.n = n
        nv = 4 * n
        clean: dict = {}
        if terms:
            for word, coeff in terms.items():
                if not isinstance(coeff, Poly):
                    coeff = Poly.const(nv, coeff)
                if coeff.nvars != nv:
                    raise ValueError("coefficient ring does not match n")
                res = _sort_word(word)
                if res is None:
                    continue
                sign, w = res
                if any(l < 0 or l >= 4 * n for l in w):
                    raise ValueError(f"letter index out of range in {word}")
                c = coeff if sign == 1 else -coeff
                if w in clean:
                    c = clean[w] + c
                if c:
                    clean[w] = c
                else:
                    clean.pop(w, None)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "Form":
        f = cls.__new__(cls)
        f.n = n
        f.terms = terms
        f._hash = None
        return f

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Form":
        return cls._raw(n, {})

    @classmethod
    def scalar(cls, n: int, value) -> "Form":
        if not isinstance(value, Poly):
            value = Poly.const(4 * n, value)
        return cls(n, {(): value})

    @classmethod
    def letter(cls, n: int, letter: int) -> "Form":
        return cls(n, {(letter,): Poly.const(4 * n, 1)})

    @classmethod
    def word(cls, n: int, letters: Sequence[int], coeff=1) -> "Form":
        return cls(n, {tuple(letters): coeff})

    # structure --------------------------------------------------------
    @property
    def nvars(self) -> int:
        return 4 * self.n

    def bidegrees(self) -> set[tuple[int, int]]:
        out = set()
        for w in self.terms:
            p = sum(1 for l in w if l < 2 * self.n)
            out.add((p, len(w) - p))
        return out

    @property
    def bidegree(self) -> tuple[int, int] | None:
        """(p, q) for a nonzero homogeneous form, else None."""
        b = self.bidegrees()
        return next(iter(b)) if len(b) == 1 else None

    def has_bidegree(self, p: int, q: int) -> bool:
        return self.bidegrees() <= {(p, q)}

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, letters: Sequence[int]) -> Poly:
        res = _sort_word(letters)
        if res is None:
            return Poly.zero(self.nvars)
        sign, w = res
        c = self.terms.get(w, Poly.zero(self.nvars))
        return c if sign == 1 else -c

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.terms.values())

    def map_coefficients(self, fn) -> "Form":
        return Form(self.n, {w: fn(c) for w, c in self.terms.items()})

    def at(self, point: Sequence) -> "Form":
        """Constant form obtained by evaluating every coefficient (exact point)."""
        nv = self.nvars
        return Form(self.n, {w: Poly.const(nv, c.evaluate(point)) for w, c in self.terms.items()})

    # arithmetic -------------------------------------------------------
    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError("expected a Form")
        if other.n != self.n:
            raise ValueError("forms over different H^n")

    def __add__(self, other):
        if not isinstance(other, Form):
            other = Form.scalar(self.n, other)
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out[w] + c if w in out else c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        return Form._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Form._raw(self.n, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Form):
            other = Form.scalar(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return Form.scalar(self.n, other) - self

    def scale(self, factor) -> "Form":
        if isinstance(factor, Poly):
            return Form(self.n, {w: c * factor for w, c in self.terms.items()})
        factor = CQ.coerce(factor)
        if not factor:
            return Form.zero(self.n)
        return Form._raw(self.n, {w: c.scale(factor) for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Form):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __xor__(self, other):
        return wedge(self, other)

    def __truediv__(self, other):
        return self.scale(CQ(1) / CQ.coerce(other))

    def __pow__(self, k: int) -> "Form":
        """Wedge power."""
        result = Form.scalar(self.n, 1)
        for _ in range(k):
            result = wedge(result, self)
        return result

    def __eq__(self, other):
        if isinstance(other, Form):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, Fraction, CQ)):
            return self == Form.scalar(self.n, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    # text -------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            word = "^".join(letter_name(self.n, l) for l in w)
            text = str(c)
            if not word:
                pieces.append(text if len(c.terms) == 1 else f"({text})")
                continue
            if c == 1:
                pieces.append(word)
            elif c == -1:
                pieces.append("-" + word)
            elif len(c.terms) == 1:
                pieces.append(f"{text}*{word}")
            else:
                pieces.append(f"({text})*{word}")
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"Form(n={self.n}, {self})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"word": [letter_name(self.n, l) for l in w], "coeff": str(c)}
                for w, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Form":
        n = int(data["n"])
        out = Form.zero(n)
        for term in data["terms"]:
            letters = [_letter_from_name(n, name) for name in term["word"]]
            coeff = parse_form(str(term["coeff"]), n)
            if not coeff.has_bidegree(0, 0):
                raise ValueError("coefficients must be scalar expressions")
            out = out + Form.word(n, letters, coeff.coefficient(()))
        return out


def dz(n: int, k: int) -> Form:
    """``dz_k`` with 1-based ``k``."""
    return Form.letter(n, k - 1)


def dzbar(n: int, k: int) -> Form:
    return Form.letter(n, 2 * n + k - 1)


def wedge(a: Form, b: Form) -> Form:
    a._check(b)
    out: dict = {}
    for w1, c1 in a.terms.items():
        s1 = set(w1)
        for w2, c2 in b.terms.items():
            if s1.intersection(w2):
                continue
            sign, w = _sort_word(w1 + w2)
            c = c1 * c2
            if sign < 0:
                c = -c
            if w in out:
                c = out[w] + c
            if c:
                out[w] = c
            else:
                out.pop(w, None)
    return Form._raw(a.n, out)


def wedge_all(forms: Iterable[Form]) -> Form:
    forms = list(forms)
    result = forms[0]
    for f in forms[1:]:
        result = wedge(result, f)
    return result


# complex partial derivatives ----------------------------------------------


def d_holo(p: Poly, k: int) -> Poly:
    """``d/dz_{k+1}`` of a polynomial in real coordinates (0-based ``k``)."""
    base = 4 * (k // 2)
    if k % 2 == 0:
        return (p.diff(base) - p.diff(base + 1).scale(I_UNIT)).scale(HALF)
    return (p.diff(base + 2) + p.diff(base + 3).scale(I_UNIT)).scale(HALF)


def d_antiholo(p: Poly, k: int) -> Poly:
    base = 4 * (k // 2)
    if k % 2 == 0:
        return (p.diff(base) + p.diff(base + 1).scale(I_UNIT)).scale(HALF)
    return (p.diff(base + 2) - p.diff(base + 3).scale(I_UNIT)).scale(HALF)


def _differentiate(form: Form, partial, offset: int) -> Form:
    n = form.n
    out = Form.zero(n)
    acc: dict = {}
    for w, c in form.terms.items():
        for k in range(2 * n):
            letter = k + offset
            if letter in w:
                continue
            dc = partial(c, k)
            if not dc:
                continue
            sign, nw = _sort_word((letter,) + w)
            if sign < 0:
                dc = -dc
            acc[nw] = acc[nw] + dc if nw in acc else dc
    out = Form(n, acc)
    return out


def del_(form: Form) -> Form:
    return _differentiate(form, d_holo, 0)


def delbar(form: Form) -> Form:
    return _differentiate(form, d_antiholo, 2 * form.n)


def d(form: Form) -> Form:
    return del_(form) + delbar(form)


# structure actions ----------------------------------------------------------

# Per quaternionic coordinate, local letter offsets 0..3 stand for
# dz_{2a-1}, dz_{2a}, dzbar_{2a-1}, dzbar_{2a}; each maps to (offset, sign).
J_PAIR_TABLE = {0: (3, -1), 1: (2, 1), 2: (1, -1), 3: (0, 1)}


def _local(n: int, letter: int) -> tuple[int, int]:
    if letter < 2 * n:
        return letter // 2, letter % 2
    return (letter - 2 * n) // 2, 2 + (letter - 2 * n) % 2


def _global(n: int, pair: int, offset: int) -> int:
    if offset < 2:
        return 2 * pair + offset
    return 2 * n + 2 * pair + offset - 2


def _letter_images(n: int, which: str) -> list[list[tuple[int, CQ]]]:
    images = []
    for letter in range(4 * n):
        if which == "I":
            images.append([(letter, I_UNIT if letter < 2 * n else -I_UNIT)])
        elif which == "J":
            pair, off = _local(n, letter)
            target, sign = J_PAIR_TABLE[off]
            images.append([(_global(n, pair, target), CQ(sign))])
        else:
            raise ValueError(f"unknown structure {which!r}")
    return images


def _apply_letter_map(form: Form, images: Sequence[Sequence[tuple[int, CQ]]]) -> Form:
    acc: dict = {}
    for w, c in form.terms.items():
        for choice in itertools.product(*(images[l] for l in w)):
            letters = [l for l, _ in choice]
            res = _sort_word(letters)
            if res is None:
                continue
            sign, nw = res
            factor = CQ(sign)
            for _, f in choice:
                factor = factor * f
            term = c.scale(factor)
            acc[nw] = acc[nw] + term if nw in acc else term
    return Form(form.n, acc)


def act(form: Form, which: str) -> Form:
    """Pullback along the right action of ``which`` in {I, J, K}."""
    if which == "K":
        return act(act(form, "J"), "I")
    return _apply_letter_map(form, _letter_images(form.n, which))


def _degree_sign(form: Form) -> Form:
    return Form._raw(form.n, {w: (c if len(w) % 2 == 0 else -c) for w, c in form.terms.items()})


def act_inverse(form: Form, which: str) -> Form:
    """Inverse action: the square of each action is ``(-1)^k`` on k-forms."""
    return _degree_sign(act(form, which))


def j_act(form: Form) -> Form:
    return act(form, "J")


def del_J(form: Form) -> Form:
    return act_inverse(delbar(act(form, "J")), "J")


def d_ci(form: Form, which: str | None = None) -> Form:
    """``d`` when ``which`` is None, else ``-L^{-1} d L``."""
    if which is None or which == "d":
        return d(form)
    return -act_inverse(d(act(form, which)), which)


def conj_form(form: Form) -> Form:
    n = form.n
    swap = lambda l: l + 2 * n if l < 2 * n else l - 2 * n
    return Form(n, {tuple(swap(l) for l in w): c.conjugate() for w, c in form.terms.items()})


def is_real(form: Form) -> bool:
    bd = form.bidegrees()
    if bd and (len(bd) != 1 or next(iter(bd))[1] != 0 or next(iter(bd))[0] % 2):
        raise ValueError("realness is defined for (2k,0)-forms")
    return conj_form(j_act(form)) == form


class StructureAction:
    """Numeric pullback oracle built from real right-action matrices.

    ``letter_rows[l]`` is the row of the covector letter ``l`` in real
    coordinates; the matrix ``pullback_matrix(L) = P R_L P^{-1}`` has as row
    ``l`` the image of letter ``l`` expanded in letters.
    """

    def __init__(self, n: int):
        self.n = n
        self.letter_rows = _letter_rows(n)
        self.letter_rows_inv = _letter_rows_inv(n)
        self.real = {
            name: right_action_matrix(q, n)
            for name, q in (("I", Quaternion(0, 1)), ("J", Quaternion(0, 0, 1)), ("K", Quaternion(0, 0, 0, 1)))
        }

    def pullback_matrix(self, which: str) -> list[list[CQ]]:
        r = [[CQ.coerce(v) for v in row] for row in self.real[which].rows]
        return linalg.matmul(linalg.matmul(self.letter_rows, r), self.letter_rows_inv)

    def letter_image(self, which: str, letter: int) -> Form:
        row = self.pullback_matrix(which)[letter]
        out = Form.zero(self.n)
        for l, c in enumerate(row):
            if c:
                out = out + Form.letter(self.n, l).scale(c)
        return out


@lru_cache(maxsize=None)
def _letter_rows_cached(n: int) -> tuple:
    rows = [[CQ(0)] * (4 * n) for _ in range(4 * n)]
    for a in range(n):
        t, x, y, z = 4 * a, 4 * a + 1, 4 * a + 2, 4 * a + 3
        rows[2 * a][t], rows[2 * a][x] = CQ(1), CQ(0, 1)
        rows[2 * a + 1][y], rows[2 * a + 1][z] = CQ(1), CQ(0, -1)
        rows[2 * n + 2 * a][t], rows[2 * n + 2 * a][x] = CQ(1), CQ(0, -1)
        rows[2 * n + 2 * a + 1][y], rows[2 * n + 2 * a + 1][z] = CQ(1), CQ(0, 1)
    return tuple(tuple(r) for r in rows)


def _letter_rows(n: int) -> list[list[CQ]]:
    return [list(r) for r in _letter_rows_cached(n)]


@lru_cache(maxsize=None)
def _letter_rows_inv_cached(n: int) -> tuple:
    return tuple(tuple(r) for r in linalg.inverse(_letter_rows(n)))


def _letter_rows_inv(n: int) -> list[list[CQ]]:
    return [list(r) for r in _letter_rows_inv_cached(n)]


def evaluate_multilinear(form: Form, vectors: Sequence[Sequence]) -> CQ:
    """Value of a constant k-form on k real tangent vectors of length 4n."""
    rows = _letter_rows(form.n)
    k = len(vectors)
    total = CQ(0)
    for w, c in form.terms.items():
        if len(w) != k:
            continue
        pair = [[sum((rows[l][m] * v[m] for m in range(4 * form.n)), CQ(0)) for v in vectors] for l in w]
        total = total + c.constant_value() * linalg.det(pair) if k else total + c.constant_value()
    return total


# t-isomorphism ----------------------------------------------------------------


def _constant_coefficients(form: Form, point) -> dict:
    if point is None:
        if not form.is_constant():
            raise ValueError("non-constant form needs an evaluation point")
        return {w: c.constant_value() for w, c in form.terms.items()}
    return {w: c.evaluate(point) for w, c in form.terms.items()}


def t_map(form: Form, point: Sequence | None = None) -> HyperhermitianMatrix:
    """Hyperhermitian matrix of ``B(X, X) = eta(X, X*j)`` at a point."""
    n = form.n
    if not form.has_bidegree(2, 0):
        raise ValueError("t_map needs a (2,0)-form")
    coeffs = _constant_coefficients(form, point)
    const = Form(n, {w: Poly.const(4 * n, c) for w, c in coeffs.items()})
    if not is_real(const):
        raise ValueError("t_map needs a real (2,0)-form")
    size = 4 * n
    antisym = [[CQ(0)] * size for _ in range(size)]
    for (k, l), c in coeffs.items():
        antisym[k][l] = c
        antisym[l][k] = -c
    p = _letter_rows(n)
    bilinear = linalg.matmul(linalg.matmul(linalg.transpose(p), antisym), p)
    rj = [[CQ.coerce(v) for v in row] for row in right_action_matrix(Quaternion(0, 0, 1), n).rows]
    m = linalg.matmul(bilinear, rj)
    gram = [[(m[r][c] + m[c][r]) * HALF for c in range(size)] for r in range(size)]
    if any(v.im != 0 for row in gram for v in row):
        raise ArithmeticError("symmetrized form is not real")
    g = [[v.re for v in row] for row in gram]
    entries = [
        [Quaternion(g[4 * a][4 * b], g[4 * a + 1][4 * b], g[4 * a + 2][4 * b], g[4 * a + 3][4 * b]) for b in range(n)]
        for a in range(n)
    ]
    result = HyperhermitianMatrix(entries)
    if realize(result.entries).rows != tuple(tuple(r) for r in g):
        raise ArithmeticError("symmetric form is not the realization of a hyperhermitian matrix")
    return result


def t_inv(g: HyperhermitianMatrix) -> Form:
    """Constant real (2,0)-form ``-(g(X, Y*j) - sqrt(-1) g(X, Y*k))``."""
    n = g.n
    real_g = [[CQ.coerce(v) for v in row] for row in realize(g.entries).rows]
    rj = [[CQ.coerce(v) for v in row] for row in right_action_matrix(Quaternion(0, 0, 1), n).rows]
    rk = [[CQ.coerce(v) for v in row] for row in right_action_matrix(Quaternion(0, 0, 0, 1), n).rows]
    gj = linalg.matmul(real_g, rj)
    gk = linalg.matmul(real_g, rk)
    size = 4 * n
    w = [[-(gj[r][c] - I_UNIT * gk[r][c]) for c in range(size)] for r in range(size)]
    pinv = _letter_rows_inv(n)
    c = linalg.matmul(linalg.matmul(linalg.transpose(pinv), w), pinv)
    terms = {}
    for k in range(size):
        for l in range(k + 1, size):
            if c[k][l]:
                terms[(k, l)] = Poly.const(size, c[k][l])
    return Form(n, terms)


def top_ratio(form: Form) -> Poly:
    """Coefficient of ``dz_1 ^ ... ^ dz_{2n}`` divided by ``n!``."""
    n = form.n
    if not form.has_bidegree(2 * n, 0):
        raise ValueError("top_ratio needs a (2n,0)-form")
    return form.coefficient(tuple(range(2 * n))) / math.factorial(n)


# pullbacks and special forms ---------------------------------------------------


def pullback(form: Form, f: QuaternionMatrix) -> Form:
    """Pull a constant form on H^k back along the H-linear map ``f: H^n -> H^k``."""
    k, n = f.shape
    if form.n != k:
        raise ValueError("form lives on the wrong target space")
    if not form.is_constant():
        raise ValueError("pullback is implemented for constant forms")
    real_f = [[CQ.coerce(v) for v in row] for row in realize_rect(f).rows]
    rows = linalg.matmul(linalg.matmul(_letter_rows(k), real_f), _letter_rows_inv(n))
    images = [[(l, c) for l, c in enumerate(row) if c] for row in rows]
    acc = Form.zero(n)
    for w, c in form.terms.items():
        img = Form.word(n, (), 1)
        for letter in w:
            lf = Form(n, {(l,): Poly.const(4 * n, v) for l, v in images[letter]})
            img = wedge(img, lf)
        acc = acc + img.scale(c.constant_value())
    return acc


def volume_form(n: int) -> Form:
    """``dt_1 ^ dx_1 ^ dy_1 ^ dz_1 ^ ... `` expanded in letters."""
    inv = _letter_rows_inv(n)
    vol = Form.scalar(n, 1)
    for coord in range(4 * n):
        one = Form(n, {(l,): Poly.const(4 * n, inv[coord][l]) for l in range(4 * n) if inv[coord][l]})
        vol = wedge(vol, one)
    return vol


# text literals ------------------------------------------------------------------


class FormSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<num>\d+(?:\.\d+)?(?:i(?![A-Za-z0-9_]))?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()])"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            line, col = _line_col(text, pos)
            raise FormSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _letter_from_name(n: int, name: str) -> int:
    m = re.fullmatch(r"dz(bar|b)?(\d+)", name)
    if not m:
        raise ValueError(f"not a letter: {name!r}")
    k = int(m.group(2))
    if not 1 <= k <= 2 * n:
        raise ValueError(f"{name} is out of range for n = {n}")
    return (2 * n if m.group(1) else 0) + k - 1


def _infer_n(tokens) -> int:
    n = 1
    for kind, text, _ in tokens:
        if kind != "name":
            continue
        m = re.fullmatch(r"dz(?:bar|b)?(\d+)", text)
        if m:
            n = max(n, (int(m.group(1)) + 1) // 2)
            continue
        m = re.fullmatch(r"[txyz](\d+)", text)
        if m:
            n = max(n, int(m.group(1)))
    return n


def parse_form(text: str, n: int | None = None) -> Form:
    """Parse a form literal such as ``(1+2i)*dz1^dz2 + t1*dz3^dz4``.

    ``^`` is the wedge product, except that ``scalar ^ integer`` is a power.
    ``dzbar3`` (or ``dzb3``) is a conjugate letter, ``i`` the imaginary unit.
    """
    tokens = _tokenize(text)
    if n is None:
        n = _infer_n(tokens)
    parser = _FormParser(text, tokens, n)
    result = parser.expr()
    parser.expect("end")
    return result


class _FormParser:
    def __init__(self, text, tokens, n):
        self.text = text
        self.tokens = tokens
        self.pos = 0
        self.n = n

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        line, col = _line_col(self.text, tok[2])
        raise FormSyntaxError(message, line, col)

    def expect(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def expr(self) -> Form:
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self) -> Form:
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()
            right = self.unary()
            if op[1] == "*":
                left = wedge(left, right)
            else:
                if not right.has_bidegree(0, 0) or not right.coefficient(()).is_constant() or not right:
                    self.error("division only by nonzero constants", op)
                left = left / right.coefficient(()).constant_value()
        return left

    def unary(self) -> Form:
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            val = self.unary()
            return -val if op == "-" else val
        return self.power()

    def power(self) -> Form:
        left = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            tok = self.peek()
            if tok[0] == "num" and tok[1].isdigit() and left.has_bidegree(0, 0):
                self.advance()
                left = Form.scalar(self.n, left.coefficient(()) ** int(tok[1]))
            else:
                left = wedge(left, self.atom())
        return left

    def atom(self) -> Form:
        tok = self.peek()
        kind, text, _ = tok
        n = self.n
        if kind == "num":
            self.advance()
            if text.endswith("i"):
                return Form.scalar(n, CQ(0, Fraction(text[:-1])))
            return Form.scalar(n, Fraction(text))
        if kind == "name":
            self.advance()
            if text == "i":
                return Form.scalar(n, CQ(0, 1))
            if text.startswith("dz") and re.fullmatch(r"dz(bar|b)?\d+", text):
                try:
                    return Form.letter(n, _letter_from_name(n, text))
                except ValueError as exc:
                    self.error(str(exc), tok)
            try:
                idx = var_index(text)
            except ValueError:
                self.error(f"unknown identifier {text!r}", tok)
            if idx >= 4 * n:
                self.error(f"coordinate {text} is out of range for n = {n}", tok)
            return Form.scalar(n, Poly.var(4 * n, idx))
        if kind == "op" and text == "(":
            self.advance()
            val = self.expr()
            self.expect("op", ")")
            return val
        self.error(f"unexpected {'end of input' if kind == 'end' else repr(text)}")
