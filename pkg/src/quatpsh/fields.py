"""Scalar-field expressions over the real coordinates of H^n.

Grammar (whitespace is insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := atom ("^" unary)?
    atom    := number | coord | func "(" expr ")" | "(" expr ")"
    number  := digits ["." digits]
    coord   := ("t" | "x" | "y" | "z") digits        e.g. t1, z3
    func    := "sqrt" | "exp" | "log"

Exponents must be constant.  Expressions are stored as nested tuples built
by normalising constructors, so structurally equal trees compare equal and
``parse_field(str(f)) == f``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .hherm import HyperhermitianMatrix
from .poly import Poly, var_index, var_name
from .quat import BASIS, Quaternion, quat_mul
from .scalars import CQ

__all__ = [
    "ScalarField",
    "QuaternionField",
    "HessianField",
    "Grid",
    "GridSamples",
    "FieldSyntaxError",
    "GuardViolation",
    "parse_field",
    "dirac_qbar",
    "dirac_q",
    "quat_hessian",
    "ddj_potential",
    "eval_on_grid",
    "fd_second_partials",
]

FUNCTIONS = ("sqrt", "exp", "log")


# normalising constructors ----------------------------------------------------


def num(value) -> tuple:
    return ("num", Fraction(value))


ZERO = num(0)
ONE = num(1)


def var(index: int) -> tuple:
    return ("var", index)


def _is_num(e, value=None) -> bool:
    return e[0] == "num" and (value is None or e[1] == value)


def add(*terms) -> tuple:
    flat = []
    const = Fraction(0)
    for t in terms:
        parts = t[1] if t[0] == "add" else (t,)
        for p in parts:
            if p[0] == "num":
                const += p[1]
            else:
                flat.append(p)
    if const:
        flat.insert(0, num(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return ("add", tuple(flat))


def mul(*factors) -> tuple:
    flat = []
    const = Fraction(1)
    for f in factors:
        parts = f[1] if f[0] == "mul" else (f,)
        for p in parts:
            if p[0] == "num":
                const *= p[1]
            else:
                flat.append(p)
    if const == 0:
        return ZERO
    if const != 1:
        flat.insert(0, num(const))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return ("mul", tuple(flat))


def power(base, exponent) -> tuple:
    e = Fraction(exponent)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if base[0] == "num" and e.denominator == 1 and (base[1] != 0 or e > 0):
        return num(base[1] ** int(e))
    if base[0] == "pow" and e.denominator == 1:
        return power(base[1], base[2] * e)
    return ("pow", base, e)


def func(name: str, arg) -> tuple:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if name == "exp" and _is_num(arg, 0):
        return ONE
    if name == "log" and _is_num(arg, 1):
        return ZERO
    if name == "sqrt" and _is_num(arg, 0):
        return ZERO
    return ("fn", name, arg)


def neg(e) -> tuple:
    return mul(num(-1), e)


# calculus -------------------------------------------------------------------


def differentiate(e, index: int) -> tuple:
    kind = e[0]
    if kind == "num":
        return ZERO
    if kind == "var":
        return ONE if e[1] == index else ZERO
    if kind == "add":
        return add(*(differentiate(t, index) for t in e[1]))
    if kind == "mul":
        factors = e[1]
        terms = []
        for k, f in enumerate(factors):
            df = differentiate(f, index)
            if df != ZERO:
                terms.append(mul(*factors[:k], df, *factors[k + 1 :]))
        return add(*terms)
    if kind == "pow":
        db = differentiate(e[1], index)
        if db == ZERO:
            return ZERO
        return mul(num(e[2]), power(e[1], e[2] - 1), db)
    if kind == "fn":
        name, arg = e[1], e[2]
        da = differentiate(arg, index)
        if da == ZERO:
            return ZERO
        if name == "exp":
            return mul(e, da)
        if name == "log":
            return mul(power(arg, -1), da)
        return mul(num(Fraction(1, 2)), power(e, -1), da)
    raise TypeError(f"bad node {kind}")


def variables(e) -> set[int]:
    kind = e[0]
    if kind == "num":
        return set()
    if kind == "var":
        return {e[1]}
    if kind in ("add", "mul"):
        out = set()
        for t in e[1]:
            out |= variables(t)
        return out
    if kind == "pow":
        return variables(e[1])
    return variables(e[2])


def is_polynomial_expr(e) -> bool:
    kind = e[0]
    if kind in ("num", "var"):
        return True
    if kind in ("add", "mul"):
        return all(is_polynomial_expr(t) for t in e[1])
    if kind == "pow":
        return e[2].denominator == 1 and e[2] > 0 and is_polynomial_expr(e[1])
    return False


def expr_to_poly(e, nvars: int) -> Poly:
    kind = e[0]
    if kind == "num":
        return Poly.const(nvars, e[1])
    if kind == "var":
        return Poly.var(nvars, e[1])
    if kind == "add":
        acc = Poly.zero(nvars)
        for t in e[1]:
            acc = acc + expr_to_poly(t, nvars)
        return acc
    if kind == "mul":
        acc = Poly.const(nvars, 1)
        for t in e[1]:
            acc = acc * expr_to_poly(t, nvars)
        return acc
    if kind == "pow" and e[2].denominator == 1 and e[2] > 0:
        return expr_to_poly(e[1], nvars) ** int(e[2])
    raise ValueError("expression is not a polynomial")


def poly_to_expr(p: Poly) -> tuple:
    if not p.is_real():
        raise ValueError("scalar fields are real; polynomial has complex coefficients")
    terms = []
    for exps in sorted(p.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
        factors = [num(p.terms[exps].re)]
        for i, k in enumerate(exps):
            if k:
                factors.append(power(var(i), k))
        terms.append(mul(*factors))
    return add(*terms)


def guards(e) -> list[tuple[str, tuple]]:
    """Open-domain conditions: ('positive', expr) or ('nonzero', expr)."""
    out: list = []

    def visit(node):
        kind = node[0]
        if kind in ("add", "mul"):
            for t in node[1]:
                visit(t)
        elif kind == "pow":
            visit(node[1])
            if node[2].denominator != 1:
                cond = ("positive", node[1])
            elif node[2] < 0:
                cond = ("nonzero", node[1])
            else:
                cond = None
            if cond and cond not in out:
                out.append(cond)
        elif kind == "fn":
            visit(node[2])
            if node[1] in ("sqrt", "log"):
                cond = ("positive", node[2])
                if cond not in out:
                    out.append(cond)

    visit(e)
    return out


# evaluation -----------------------------------------------------------------


def eval_float(e, coords):
    """Evaluate with numpy broadcasting; ``coords[i]`` is an array or float."""
    kind = e[0]
    if kind == "num":
        return float(e[1])
    if kind == "var":
        return coords[e[1]]
    if kind == "add":
        acc = eval_float(e[1][0], coords)
        for t in e[1][1:]:
            acc = acc + eval_float(t, coords)
        return acc
    if kind == "mul":
        acc = eval_float(e[1][0], coords)
        for t in e[1][1:]:
            acc = acc * eval_float(t, coords)
        return acc
    if kind == "pow":
        base = eval_float(e[1], coords)
        ex = e[2]
        if ex.denominator == 1:
            return np.asarray(base, dtype=float) ** int(ex)
        return np.power(base, float(ex))
    name, arg = e[1], eval_float(e[2], coords)
    if name == "exp":
        return np.exp(arg)
    if name == "log":
        return np.log(arg)
    return np.sqrt(arg)


def eval_exact(e, coords: Sequence[Fraction]) -> Fraction:
    kind = e[0]
    if kind == "num":
        return e[1]
    if kind == "var":
        return coords[e[1]]
    if kind == "add":
        return sum((eval_exact(t, coords) for t in e[1]), Fraction(0))
    if kind == "mul":
        acc = Fraction(1)
        for t in e[1]:
            acc *= eval_exact(t, coords)
        return acc
    if kind == "pow" and e[2].denominator == 1:
        return eval_exact(e[1], coords) ** int(e[2])
    raise ValueError("not exactly evaluable")


def is_exact_evaluable(e) -> bool:
    kind = e[0]
    if kind in ("num", "var"):
        return True
    if kind in ("add", "mul"):
        return all(is_exact_evaluable(t) for t in e[1])
    if kind == "pow":
        return e[2].denominator == 1 and is_exact_evaluable(e[1])
    return False


# printing -------------------------------------------------------------------


def _fmt_num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def to_text(e, prec: int = 0) -> str:
    kind = e[0]
    if kind == "num":
        v = e[1]
        text = _fmt_num(v)
        if (v < 0 and prec > 1) or (v.denominator != 1 and prec > 2):
            return f"({text})"
        return text
    if kind == "var":
        return var_name(e[1])
    if kind == "fn":
        return f"{e[1]}({to_text(e[2])})"
    if kind == "add":
        parts = [to_text(e[1][0], 1)]
        for t in e[1][1:]:
            negated = _negated(t)
            if negated is not None:
                parts.append(" - " + to_text(negated, 2))
            else:
                parts.append(" + " + to_text(t, 1))
        text = "".join(parts)
        return f"({text})" if prec > 1 else text
    if kind == "mul":
        factors = e[1]
        if _is_num(factors[0], -1):
            text = "-" + "*".join(to_text(f, 3) for f in factors[1:])
            return f"({text})" if prec > 1 else text
        lead = factors[0]
        if lead[0] == "num" and lead[1] < 0:
            text = "*".join([_fmt_num(lead[1])] + [to_text(f, 3) for f in factors[1:]])
            return f"({text})" if prec > 1 else text
        text = "*".join(
            [_fmt_num(lead[1]) if lead[0] == "num" else to_text(lead, 3)] + [to_text(f, 3) for f in factors[1:]]
        )
        return f"({text})" if prec > 2 else text
    if kind == "pow":
        ex = e[2]
        ex_text = str(ex.numerator) if ex.denominator == 1 and ex > 0 else f"({_fmt_num(ex)})"
        base = e[1]
        base_text = to_text(base, 4)
        if base[0] == "num" and (base[1] < 0 or base[1].denominator != 1):
            base_text = f"({_fmt_num(base[1])})"
        text = f"{base_text}^{ex_text}"
        return f"({text})" if prec > 3 else text
    raise TypeError(kind)


def _negated(t):
    if t[0] == "num" and t[1] < 0:
        return num(-t[1])
    if t[0] == "mul" and t[1][0][0] == "num" and t[1][0][1] < 0:
        return mul(num(-t[1][0][1]), *t[1][1:])
    return None


# parsing --------------------------------------------------------------------


class FieldSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class GuardViolation(ValueError):
    def __init__(self, message: str, points: list):
        super().__init__(message)
        self.points = points


_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()])")


def _line_col(text: str, pos: int) -> tuple[int, int]:
    return text.count("\n", 0, pos) + 1, pos - (text.rfind("\n", 0, pos) + 1) + 1


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                self.fail(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def fail(self, message, pos):
        line, col = _line_col(self.text, pos)
        raise FieldSyntaxError(message, line, col)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def is_op(self, chars):
        tok = self.peek()
        return tok[0] == "op" and tok[1] in chars

    def expect_op(self, ch):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != ch:
            got = tok[1] or "end of input"
            self.fail(f"expected {ch!r}, found {got!r}", tok[2])
        return self.take()

    def expr(self):
        left = self.term()
        while self.is_op("+-"):
            op = self.take()[1]
            right = self.term()
            left = add(left, right) if op == "+" else add(left, neg(right))
        return left

    def term(self):
        left = self.unary()
        while self.is_op("*/"):
            op = self.take()
            right = self.unary()
            if op[1] == "*":
                left = mul(left, right)
            else:
                if right == ZERO:
                    self.fail("division by zero", op[2])
                left = mul(left, power(right, -1))
        return left

    def unary(self):
        if self.is_op("+-"):
            op = self.take()[1]
            val = self.unary()
            return neg(val) if op == "-" else val
        return self.power()

    def power(self):
        base = self.atom()
        if self.is_op("^"):
            tok = self.take()
            ex = self.unary()
            if ex[0] != "num":
                self.fail("exponents must be constant", tok[2])
            if base == ZERO and ex[1] <= 0:
                self.fail("zero to a non-positive power", tok[2])
            return power(base, ex[1])
        return base

    def atom(self):
        tok = self.peek()
        kind, text, pos = tok
        if kind == "num":
            self.take()
            return num(Fraction(text))
        if kind == "name":
            self.take()
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return func(text, arg)
            try:
                return var(var_index(text))
            except ValueError:
                self.fail(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            self.take()
            val = self.expr()
            self.expect_op(")")
            return val
        self.fail("unexpected end of input" if kind == "end" else f"unexpected {text!r}", pos)


# fields ---------------------------------------------------------------------


class ScalarField:
    """Real-valued expression on H^n."""

    __slots__ = ("expr", "n")

    def __init__(self, expr: tuple, n: int | None = None):
        used = variables(expr)
        needed = max(used) // 4 + 1 if used else 1
        if n is None:
            n = needed
        elif needed > n:
            raise ValueError(f"expression uses coordinates beyond H^{n}")
        self.expr = expr
        self.n = n

    @classmethod
    def constant(cls, value, n: int = 1) -> "ScalarField":
        return cls(num(value), n)

    @classmethod
    def coordinate(cls, index: int, n: int) -> "ScalarField":
        return cls(var(index), n)

    @classmethod
    def from_poly(cls, p: Poly) -> "ScalarField":
        return cls(poly_to_expr(p), p.nvars // 4)

    @property
    def nvars(self) -> int:
        return 4 * self.n

    def __str__(self):
        return to_text(self.expr)

    def __repr__(self):
        return f"ScalarField({self}, n={self.n})"

    def __eq__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        return self.expr == other.expr and self.n == other.n

    def __hash__(self):
        return hash((self.expr, self.n))

    def _lift(self, other) -> "ScalarField":
        if isinstance(other, ScalarField):
            if other.n != self.n:
                n = max(self.n, other.n)
                return ScalarField(other.expr, n)
            return other
        return ScalarField(num(other), self.n)

    def _n_with(self, other) -> int:
        return max(self.n, other.n) if isinstance(other, ScalarField) else self.n

    def __add__(self, other):
        o = self._lift(other)
        return ScalarField(add(self.expr, o.expr), self._n_with(other))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return ScalarField(add(self.expr, neg(o.expr)), self._n_with(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return ScalarField(neg(self.expr), self.n)

    def __mul__(self, other):
        o = self._lift(other)
        return ScalarField(mul(self.expr, o.expr), self._n_with(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return ScalarField(mul(self.expr, power(o.expr, -1)), self._n_with(other))

    def __pow__(self, exponent):
        return ScalarField(power(self.expr, Fraction(exponent)), self.n)

    def apply(self, name: str) -> "ScalarField":
        return ScalarField(func(name, self.expr), self.n)

    def with_n(self, n: int) -> "ScalarField":
        return ScalarField(self.expr, n)

    def diff(self, index: int) -> "ScalarField":
        return ScalarField(differentiate(self.expr, index), self.n)

    def is_polynomial(self) -> bool:
        return is_polynomial_expr(self.expr)

    def to_poly(self) -> Poly:
        return expr_to_poly(self.expr, self.nvars)

    def guards(self) -> list[tuple[str, tuple]]:
        return guards(self.expr)

    def guard_text(self) -> list[str]:
        return [f"{to_text(g)} > 0" if kind == "positive" else f"{to_text(g)} != 0" for kind, g in self.guards()]

    def guard_mask(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the open smooth domain."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        coords = [pts[:, i] for i in range(pts.shape[1])]
        ok = np.ones(len(pts), dtype=bool)
        with np.errstate(all="ignore"):
            for kind, g in self.guards():
                vals = np.broadcast_to(eval_float(g, coords), ok.shape)
                ok &= (vals > 0) if kind == "positive" else (vals != 0)
        return ok

    def check_guard(self, points: np.ndarray, limit: int = 10):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = self.guard_mask(pts)
        if not mask.all():
            bad = pts[~mask][:limit].tolist()
            raise GuardViolation(
                f"{int((~mask).sum())} point(s) violate the domain guard {self.guard_text()}", bad
            )

    def evaluate(self, point: Sequence):
        """Exact Fraction for rational points on rational expressions, else float."""
        if len(point) != self.nvars:
            raise ValueError(f"point needs {self.nvars} coordinates")
        if all(not isinstance(v, float) for v in point) and is_exact_evaluable(self.expr):
            return eval_exact(self.expr, [Fraction(v) for v in point])
        self.check_guard([float(v) for v in point])
        return float(eval_float(self.expr, [float(v) for v in point]))

    def evaluate_many(self, points: np.ndarray, check: bool = True) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.nvars:
            raise ValueError(f"points need {self.nvars} columns")
        if check:
            self.check_guard(pts)
        coords = [pts[:, i] for i in range(self.nvars)]
        with np.errstate(all="ignore"):
            out = eval_float(self.expr, coords)
        return np.broadcast_to(np.asarray(out, dtype=float), (len(pts),)).copy()


def parse_field(text: str, n: int | None = None) -> ScalarField:
    parser = _Parser(text)
    expr = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        parser.fail(f"unexpected {tok[1]!r}", tok[2])
    return ScalarField(expr, n)


# quaternion-valued fields -----------------------------------------------------


class QuaternionField:
    """Four scalar components in the basis ``1, i, j, k``."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[ScalarField]):
        if len(components) != 4:
            raise ValueError("quaternion fields have four components")
        n = max(c.n for c in components)
        self.components = tuple(c.with_n(n) for c in components)

    @classmethod
    def real(cls, f: ScalarField) -> "QuaternionField":
        z = ScalarField.constant(0, f.n)
        return cls([f, z, z, z])

    @property
    def n(self) -> int:
        return self.components[0].n

    def __add__(self, other: "QuaternionField") -> "QuaternionField":
        return QuaternionField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "QuaternionField") -> "QuaternionField":
        return QuaternionField([a - b for a, b in zip(self.components, other.components)])

    def diff(self, index: int) -> "QuaternionField":
        return QuaternionField([c.diff(index) for c in self.components])

    def conj(self) -> "QuaternionField":
        t, x, y, z = self.components
        return QuaternionField([t, -x, -y, -z])

    def _times(self, q: Quaternion, left: bool) -> "QuaternionField":
        # expand (q * F) or (F * q) through the basis products
        out = [ScalarField.constant(0, self.n) for _ in range(4)]
        for a, qa in enumerate(q.components):
            if qa == 0:
                continue
            for b, comp in enumerate(self.components):
                prod = quat_mul(BASIS[a], BASIS[b]) if left else quat_mul(BASIS[b], BASIS[a])
                for c, v in enumerate(prod.components):
                    if v:
                        out[c] = out[c] + comp * (qa * v)
        return QuaternionField(out)

    def left_mul(self, q: Quaternion) -> "QuaternionField":
        return self._times(q, left=True)

    def right_mul(self, q: Quaternion) -> "QuaternionField":
        return self._times(q, left=False)

    def evaluate(self, point: Sequence) -> Quaternion:
        return Quaternion(*(c.evaluate(point) for c in self.components))

    def __eq__(self, other):
        if not isinstance(other, QuaternionField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def _as_qfield(f) -> QuaternionField:
    return f if isinstance(f, QuaternionField) else QuaternionField.real(f)


def dirac_qbar(f, a: int) -> QuaternionField:
    """``dF/dt + i dF/dx + j dF/dy + k dF/dz`` in block ``a`` (0-based)."""
    F = _as_qfield(f)
    out = F.diff(4 * a)
    for unit in range(1, 4):
        out = out + F.diff(4 * a + unit).left_mul(BASIS[unit])
    return out


def dirac_q(f, a: int) -> QuaternionField:
    """``dF/dt - dF/dx i - dF/dy j - dF/dz k`` in block ``a`` (0-based)."""
    F = _as_qfield(f)
    out = F.diff(4 * a)
    for unit in range(1, 4):
        out = out - F.diff(4 * a + unit).right_mul(BASIS[unit])
    return out


# quaternionic Hessian ---------------------------------------------------------

# Entry (a, b) of the Hessian is sum_{c,d} e_c * conj(e_d) * d^2 f / du_{a,c} du_{b,d},
# i.e. (d/dq_b)(d/dqbar_a) f.
_UNIT_PAIRS = {(c, d): quat_mul(BASIS[c], BASIS[d].conj()).components for c in range(4) for d in range(4)}


def hessian_from_second_partials(second, n: int, exact: bool) -> HyperhermitianMatrix:
    """Assemble the quaternionic Hessian from the real 4n x 4n Hessian."""
    zero = Fraction(0) if exact else 0.0
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            comps = [zero] * 4
            for c in range(4):
                for d in range(4):
                    h = second[4 * a + c][4 * b + d]
                    if h:
                        for k, v in enumerate(_UNIT_PAIRS[(c, d)]):
                            if v:
                                comps[k] = comps[k] + v * h
            row.append(Quaternion(*comps))
        rows.append(row)
    return HyperhermitianMatrix(rows, atol=0.0 if exact else 1e-12)


class HessianField:
    """Quaternionic Hessian of a scalar field, stored via its real second partials.

    Only the upper triangle of the real Hessian is differentiated; the
    quaternionic entries are fixed linear combinations of these, so every
    evaluation is hyperhermitian.
    """

    def __init__(self, f: ScalarField):
        self.field = f
        self.n = f.n
        nv = f.nvars
        first = [f.diff(u) for u in range(nv)]
        self.second = [[None] * nv for _ in range(nv)]
        for u in range(nv):
            for v in range(u, nv):
                s = first[u].diff(v)
                self.second[u][v] = s
                self.second[v][u] = s

    def entry(self, a: int, b: int) -> QuaternionField:
        comps = [ScalarField.constant(0, self.n) for _ in range(4)]
        for c in range(4):
            for d in range(4):
                h = self.second[4 * a + c][4 * b + d]
                for k, v in enumerate(_UNIT_PAIRS[(c, d)]):
                    if v:
                        comps[k] = comps[k] + h * v
        return QuaternionField(comps)

    def is_constant(self) -> bool:
        return all(variables(s.expr) == set() for row in self.second for s in row)

    def evaluate(self, point: Sequence) -> HyperhermitianMatrix:
        vals = [[s.evaluate(point) for s in row] for row in self.second]
        exact = all(isinstance(v, Fraction) for row in vals for v in row)
        if not exact:
            vals = [[float(v) for v in row] for row in vals]
        return hessian_from_second_partials(vals, self.n, exact)

    def second_partials_many(self, points: np.ndarray, check: bool = True) -> np.ndarray:
        """Array of shape (N, 4n, 4n) of real second partials."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        nv = self.field.nvars
        out = np.empty((len(pts), nv, nv))
        if check:
            self.field.check_guard(pts)
        for u in range(nv):
            for v in range(u, nv):
                out[:, u, v] = self.second[u][v].evaluate_many(pts, check=False)
                out[:, v, u] = out[:, u, v]
        return out


def quat_hessian(f: ScalarField) -> HessianField:
    return HessianField(f)


def quaternion_hessian_arrays(second: np.ndarray, n: int) -> np.ndarray:
    """Vectorised Hessian assembly: (N, 4n, 4n) -> (N, n, n, 4) quaternion components."""
    out = np.zeros(second.shape[:1] + (n, n, 4))
    for a in range(n):
        for b in range(n):
            for c in range(4):
                for d in range(4):
                    h = second[:, 4 * a + c, 4 * b + d]
                    for k, v in enumerate(_UNIT_PAIRS[(c, d)]):
                        if v:
                            out[:, a, b, k] += float(v) * h
    return out


def ddj_potential(f: ScalarField):
    """The (2,0)-form del del_J f of a polynomial field."""
    from . import forms

    if not f.is_polynomial():
        raise ValueError("ddj_potential needs a polynomial field; use the grid route otherwise")
    return forms.del_(forms.del_J(forms.Form.scalar(f.n, f.to_poly())))


# grids ----------------------------------------------------------------------


@dataclass
class Grid:
    """Tensor grid on a box in R^{4n}; ``lo``, ``hi``, ``counts`` per axis."""

    lo: tuple
    hi: tuple
    counts: tuple

    def __post_init__(self):
        self.lo = tuple(float(v) for v in self.lo)
        self.hi = tuple(float(v) for v in self.hi)
        self.counts = tuple(int(c) for c in self.counts)
        if not (len(self.lo) == len(self.hi) == len(self.counts)):
            raise ValueError("lo, hi and counts need one entry per axis")
        if len(self.lo) % 4:
            raise ValueError("grid dimension must be a multiple of 4")
        for a, b, c in zip(self.lo, self.hi, self.counts):
            if not b > a:
                raise ValueError("grid boxes need hi > lo")
            if c < 3:
                raise ValueError("finite-difference grids need at least 3 samples per axis")

    @classmethod
    def cube(cls, n: int, lo: float, hi: float, samples: int) -> "Grid":
        dim = 4 * n
        return cls((lo,) * dim, (hi,) * dim, (samples,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def n(self) -> int:
        return self.dim // 4

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / (c - 1) for a, b, c in zip(self.lo, self.hi, self.counts))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, c) for a, b, c in zip(self.lo, self.hi, self.counts)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def interior_mask(self, margin: float = 0.0) -> np.ndarray:
        pts = self.points()
        lo = np.array(self.lo) + margin
        hi = np.array(self.hi) - margin
        return np.all((pts > lo - 1e-12) & (pts < hi + 1e-12), axis=1)


@dataclass
class GridSamples:
    points: np.ndarray
    values: np.ndarray
    method: str  # "symbolic" | "finite-difference" | "value"
    truncation_order: int | None = None
    one_sided: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def csv_rows(self) -> list[list]:
        rows = []
        flat = self.values.reshape(len(self.points), -1)
        for p, v in zip(self.points, flat):
            rows.append([*(float(c) for c in p), *(float(c) for c in v)])
        return rows


_CENTRAL_1 = ((-1, -0.5), (1, 0.5))
_FORWARD_1 = ((0, -1.5), (1, 2.0), (2, -0.5))
_CENTRAL_2 = ((-1, 1.0), (0, -2.0), (1, 1.0))
_FORWARD_2 = ((0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0))


def _stencil(kind: int, x: np.ndarray, lo: float, hi: float, h: float):
    """Per-point stencils (offsets in units of h, weights) and a one-sided flag."""
    central, forward = (_CENTRAL_1, _FORWARD_1) if kind == 1 else (_CENTRAL_2, _FORWARD_2)
    fits_lo = x - h >= lo - 1e-12
    fits_hi = x + h <= hi + 1e-12
    choice = np.where(fits_lo & fits_hi, 0, np.where(fits_hi, 1, 2))
    options = [central, forward, tuple((-o, w) for o, w in forward)]
    return choice, options


def fd_second_partials(f: ScalarField, points: np.ndarray, h: float, box=None):
    """Second-order finite-difference real Hessian at each point.

    Central stencils are used where they fit in ``box`` (lo, hi arrays);
    otherwise one-sided second-order stencils.  Returns the (N, d, d)
    array and a boolean (N,) mask of points that needed a one-sided stencil.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    npts, dim = pts.shape
    if box is None:
        lo = np.full(dim, -np.inf)
        hi = np.full(dim, np.inf)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in box)
    out = np.zeros((npts, dim, dim))
    one_sided = np.zeros(npts, dtype=bool)
    def sample(offsets: dict, rows: np.ndarray):
        shifted = pts[rows].copy()
        for axis, off in offsets.items():
            shifted[:, axis] += off * h
        return f.evaluate_many(shifted)

    for u in range(dim):
        ch2, opt2 = _stencil(2, pts[:, u], lo[u], hi[u], h)
        one_sided |= ch2 != 0
        for c, stencil in enumerate(opt2):
            rows = np.nonzero(ch2 == c)[0]
            if not len(rows):
                continue
            acc = np.zeros(len(rows))
            for off, w in stencil:
                acc += w * sample({u: off}, rows)
            out[rows, u, u] = acc / h**2
        ch_u, opt1 = _stencil(1, pts[:, u], lo[u], hi[u], h)
        for v in range(u + 1, dim):
            ch_v, _ = _stencil(1, pts[:, v], lo[v], hi[v], h)
            for cu in range(3):
                for cv in range(3):
                    rows = np.nonzero((ch_u == cu) & (ch_v == cv))[0]
                    if not len(rows):
                        continue
                    acc = np.zeros(len(rows))
                    for ou, wu in opt1[cu]:
                        for ov, wv in opt1[cv]:
                            acc += wu * wv * sample({u: ou, v: ov}, rows)
                    out[rows, u, v] = out[rows, v, u] = acc / h**2
    return out, one_sided


def eval_on_grid(obj, grid: Grid, method: str = "auto", h: float | None = None) -> GridSamples:
    """Sample a ScalarField or a HessianField on a grid.

    Hessians are returned as an (N, n, n, 4) array of quaternion components.
    ``method`` is "symbolic", "finite-difference" or "auto" (symbolic).
    """
    pts = grid.points()
    if isinstance(obj, ScalarField):
        if obj.nvars != grid.dim:
            raise ValueError("grid dimension does not match the field")
        return GridSamples(pts, obj.evaluate_many(pts), "value")
    if not isinstance(obj, HessianField):
        raise TypeError("eval_on_grid takes a ScalarField or a HessianField")
    f = obj.field
    if f.nvars != grid.dim:
        raise ValueError("grid dimension does not match the field")
    if method in ("auto", "symbolic"):
        second = obj.second_partials_many(pts)
        return GridSamples(pts, quaternion_hessian_arrays(second, obj.n), "symbolic")
    if method != "finite-difference":
        raise ValueError(f"unknown method {method!r}")
    step = h if h is not None else min(grid.spacing)
    f.check_guard(pts)
    second, one_sided = fd_second_partials(f, pts, step, (grid.lo, grid.hi))
    return GridSamples(
        pts,
        quaternion_hessian_arrays(second, obj.n),
        "finite-difference",
        truncation_order=2,
        one_sided=one_sided,
        extra={"h": step},
    )
