"""
Sparse polynomials in the four unknowns (Tx, Ty, Tz, t).

Monomials are exponent 4-tuples in the variable order (Tx, Ty, Tz, t).
Coefficients live in a plain dict keyed by monomial, so no ordering is baked
into storage: the Macaulay builder sorts columns by DRL while the normal-form
reduction uses the block order that eliminates the translation first.
"""

from functools import cmp_to_key
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

Monomial = Tuple[int, int, int, int]

VARIABLES = ("Tx", "Ty", "Tz", "t")
ONE: Monomial = (0, 0, 0, 0)
TX: Monomial = (1, 0, 0, 0)
TY: Monomial = (0, 1, 0, 0)
TZ: Monomial = (0, 0, 1, 0)
T: Monomial = (0, 0, 0, 1)


def monomial(tx: int = 0, ty: int = 0, tz: int = 0, t: int = 0) -> Monomial:
    return (tx, ty, tz, t)


def degree(m: Monomial) -> int:
    return sum(m)


def mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


def divides(a: Monomial, b: Monomial) -> bool:
    """True when monomial ``a`` divides ``b``."""
    return all(x <= y for x, y in zip(a, b))


def quotient(b: Monomial, a: Monomial) -> Monomial:
    return (b[0] - a[0], b[1] - a[1], b[2] - a[2], b[3] - a[3])


def format_monomial(m: Monomial) -> str:
    """
    Human-readable monomial.

    Examples:
        >>> format_monomial((0, 0, 2, 0))
        'Tz^2'
        >>> format_monomial((1, 0, 0, 3))
        'Tx*t^3'
    """
    parts = []
    for name, e in zip(VARIABLES, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def drl_compare(a: Monomial, b: Monomial) -> int:
    """
    Degree reverse lexicographic comparison for DRL(Tx, Ty, Tz, t).

    ``a ≺ b`` iff the last nonzero entry of
    ``(deg₁(b) − deg₁(a), …, deg₄(b) − deg₄(a), deg(a) − deg(b))`` is negative.

    Returns:
        -1 if a ≺ b, 1 if a ≻ b, 0 if equal

    Examples:
        >>> drl_compare(TX, TY)
        1
        >>> drl_compare(monomial(t=2), TZ)
        1
    """
    seq = [bj - aj for aj, bj in zip(a, b)] + [degree(a) - degree(b)]
    for entry in reversed(seq):
        if entry != 0:
            return -1 if entry < 0 else 1
    return 0


def drl_key(m: Monomial) -> Tuple[int, ...]:
    """Sort key agreeing with :func:`drl_compare` (larger key = larger monomial)."""
    return (degree(m), -m[3], -m[2], -m[1], -m[0])


drl_cmp_key = cmp_to_key(drl_compare)


def block_key(m: Monomial) -> Tuple[int, ...]:
    """
    Elimination order: DRL on the (Tx, Ty, Tz) part first, then the power of t.

    Under this order the reduced Gröbner basis of the coplanarity system has
    leading monomials Tx, Ty, Tz² and t⁶.
    """
    return drl_key((m[0], m[1], m[2], 0)) + (m[3],)


def sort_desc(monomials: Iterable[Monomial], key: Callable = drl_key) -> List[Monomial]:
    return sorted(set(monomials), key=key, reverse=True)


class Poly4:
    """
    Sparse real polynomial in (Tx, Ty, Tz, t).

    Zero coefficients are never stored.

    Examples:
        >>> f1 = Poly4({(2, 0, 0, 0): 1.0, (0, 2, 0, 0): 1.0, (0, 0, 2, 0): 1.0, ONE: -1.0})
        >>> f1.evaluate((1.0, 0.0, 0.0, 5.0))
        0.0
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, float] = None):
        self.terms: Dict[Monomial, float] = {}
        if terms:
            for m, c in terms.items():
                if c != 0:
                    self.terms[tuple(m)] = float(c)

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly4(0)"
        body = " + ".join(
            f"{c:.6g}*{format_monomial(m)}" for m, c in sorted(
                self.terms.items(), key=lambda kv: drl_key(kv[0]), reverse=True
            )
        )
        return f"Poly4({body})"

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly4) and self.terms == other.terms

    def copy(self) -> "Poly4":
        return Poly4(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, m: Monomial) -> float:
        return self.terms.get(tuple(m), 0.0)

    def monomials(self) -> List[Monomial]:
        return list(self.terms)

    def degree(self) -> int:
        return max((degree(m) for m in self.terms), default=-1)

    def __add__(self, other: "Poly4") -> "Poly4":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return Poly4(out)

    def __sub__(self, other: "Poly4") -> "Poly4":
        return self + other.scale(-1.0)

    def scale(self, k: float) -> "Poly4":
        return Poly4({m: k * c for m, c in self.terms.items()})

    def mul_monomial(self, u: Monomial) -> "Poly4":
        return Poly4({mul(m, u): c for m, c in self.terms.items()})

    def __mul__(self, other: "Poly4") -> "Poly4":
        out: Dict[Monomial, float] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                m = mul(a, b)
                out[m] = out.get(m, 0.0) + ca * cb
        return Poly4(out)

    def leading_monomial(self, key: Callable = drl_key) -> Monomial:
        if not self.terms:
            raise ValueError("Zero polynomial has no leading monomial")
        return max(self.terms, key=key)

    def monic(self, key: Callable = drl_key) -> "Poly4":
        return self.scale(1.0 / self.terms[self.leading_monomial(key)])

    def evaluate(self, x: Sequence[complex]):
        """Value at ``x = (Tx, Ty, Tz, t)``; works for real or complex points."""
        total = 0.0
        for (a, b, c, d), coef in self.terms.items():
            total += coef * x[0] ** a * x[1] ** b * x[2] ** c * x[3] ** d
        return total

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        """Partial derivatives with respect to (Tx, Ty, Tz, t) at ``x``."""
        g = np.zeros(4, dtype=np.result_type(*[np.asarray(v) for v in x], float))
        for m, coef in self.terms.items():
            for i in range(4):
                if m[i] == 0:
                    continue
                e = list(m)
                e[i] -= 1
                g[i] += coef * m[i] * x[0] ** e[0] * x[1] ** e[1] * x[2] ** e[2] * x[3] ** e[3]
        return g

    def coefficient_vector(self, columns: Mapping[Monomial, int], width: int) -> np.ndarray:
        """Dense row under the given column index; raises KeyError on a foreign monomial."""
        row = np.zeros(width)
        for m, c in self.terms.items():
            row[columns[m]] = c
        return row


def evaluate_all(polys: Sequence[Poly4], x: Sequence[float]) -> np.ndarray:
    return np.array([p.evaluate(x) for p in polys])


def jacobian(polys: Sequence[Poly4], x: Sequence[float]) -> np.ndarray:
    return np.vstack([p.gradient(x) for p in polys])
