"""
Macaulay matrices of the coplanarity system.

Three elimination templates are provided:

- ``compact``: 65 products ``m·f_i`` of degree at most 6 spanning 77
  monomials, columns sorted by decreasing DRL(Tx, Ty, Tz, t).
- ``full``: every product of degree at most 6 (175 rows), kept for checking
  the rank of the compact template.
- ``basis``: 67 products spanning 70 monomials, columns sorted by the block
  order of :func:`polynomials.block_key`. Its reduced row echelon form
  contains the reduced Gröbner basis of the system.

Elimination is Gauss-Jordan in column order with scaled partial pivoting.
Rows keep their template index, so the rows whose leading monomial changed
are still identified after pivoting; the reduced echelon form is unique, so
it does not depend on which row supplies a pivot.
"""

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from .coplanarity import CoplanaritySystem
from .exceptions import TemplateMismatchError
from .polynomials import (
    ONE,
    TX,
    TY,
    TZ,
    Monomial,
    Poly4,
    block_key,
    degree,
    drl_key,
    format_monomial,
    mul,
    sort_desc,
)

logger = logging.getLogger(__name__)

Product = Tuple[Monomial, int]

# Scaled pivot |R[r, c]| / max|M[r]| at or below this counts as zero
PIVOT_TOL = 1e-10
MAX_DEGREE = 6

ORDERS: Dict[str, Callable[[Monomial], Tuple[int, ...]]] = {
    "drl": drl_key,
    "block": block_key,
}

# Generic supports of f1 (normality) and f2..f4 (coplanarity)
SUPPORTS: Dict[int, Tuple[Monomial, ...]] = {
    1: ((2, 0, 0, 0), (0, 2, 0, 0), (0, 0, 2, 0), ONE),
    **{
        i: tuple(
            tuple(1 if v == var else 0 for v in range(3)) + (k,)
            for var in range(3)
            for k in range(3)
        )
        for i in (2, 3, 4)
    },
}
DEGREES = {1: 2, 2: 3, 3: 3, 4: 3}

_F_MULTIPLIERS = (
    "1 t Tz Ty Tx t*Tz t*Ty t*Tx Tz*Ty Tz*Tx Ty^2 Ty*Tx Tx^2 "
    "t*Tz*Ty t*Tz*Tx t*Ty^2 t*Ty*Tx t*Tx^2"
)
_COMPACT_LISTING = (
    (4, _F_MULTIPLIERS),
    (3, _F_MULTIPLIERS.replace("t*Tz*Ty ", "")),
    (2, _F_MULTIPLIERS.replace("t*Tz*Ty ", "")),
    (1, "1 t Tz Ty Tx t^2 t*Ty t*Tx t^3 t^2*Ty t^2*Tx t^3*Ty t^3*Tx"),
)


def parse_monomial(text: str) -> Monomial:
    """
    Parse ``"t^2*Ty"`` style monomials.

    Examples:
        >>> parse_monomial("t^3*Tx")
        (1, 0, 0, 3)
        >>> parse_monomial("1")
        (0, 0, 0, 0)
    """
    names = {"Tx": 0, "Ty": 1, "Tz": 2, "t": 3}
    e = [0, 0, 0, 0]
    if text.strip() == "1":
        return ONE
    for factor in text.split("*"):
        name, _, power = factor.partition("^")
        e[names[name.strip()]] += int(power) if power else 1
    return tuple(e)


@dataclass(frozen=True)
class MacaulayTemplate:
    """
    Ordered list of products ``multiplier · f_index`` and the column monomials
    they span, sorted decreasingly under the template's monomial order.

    Attributes:
        name: "compact", "full" or "basis"
        products: (multiplier, polynomial index in 1..4) pairs, in row order
        expected_shape: Asserted matrix shape, or None to skip the check
        order: Column order, "drl" or "block"
    """

    name: str
    products: Tuple[Product, ...]
    expected_shape: Optional[Tuple[int, int]] = None
    order: str = "drl"
    columns: Tuple[Monomial, ...] = field(init=False)
    scatter: Tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"Unknown monomial order '{self.order}'")
        support = set()
        for m, i in self.products:
            support.update(mul(m, s) for s in SUPPORTS[i])
        columns = tuple(sort_desc(support, key=ORDERS[self.order]))
        object.__setattr__(self, "columns", columns)

        # (row, column, polynomial, support slot) of every structural nonzero
        index = {m: j for j, m in enumerate(columns)}
        entries = [
            (r, index[mul(m, s)], i - 1, k)
            for r, (m, i) in enumerate(self.products)
            for k, s in enumerate(SUPPORTS[i])
        ]
        arr = np.array(entries, dtype=np.intp).reshape(-1, 4)
        object.__setattr__(self, "scatter", tuple(arr.T))

    @property
    def key(self) -> Callable[[Monomial], Tuple[int, ...]]:
        return ORDERS[self.order]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.products), len(self.columns)

    @property
    def max_degree(self) -> int:
        return max(degree(m) + DEGREES[i] for m, i in self.products)

    def column_index(self) -> Dict[Monomial, int]:
        return {m: j for j, m in enumerate(self.columns)}

    def row_of(self, multiplier: Monomial, index: int) -> int:
        return self.products.index((tuple(multiplier), index))

    def describe(self) -> List[str]:
        return [f"{format_monomial(m)}*f{i}" for m, i in self.products]


def compact_template() -> MacaulayTemplate:
    """The 65-product template, rows in listing order."""
    products = tuple(
        (parse_monomial(token), index)
        for index, listing in _COMPACT_LISTING
        for token in listing.split()
    )
    return MacaulayTemplate("compact", products, expected_shape=(65, 77))


def full_template() -> MacaulayTemplate:
    """
    Every product ``m·f_i`` with ``deg(m) ≤ 6 − deg(f_i)``: 175 rows.

    Rows are ordered by polynomial index, then by increasing DRL multiplier.
    """
    products: List[Product] = []
    for index in (1, 2, 3, 4):
        bound = MAX_DEGREE - DEGREES[index]
        multipliers = [e for e in product(range(bound + 1), repeat=4) if sum(e) <= bound]
        for m in sorted(multipliers, key=drl_key):
            products.append((tuple(m), index))
    return MacaulayTemplate("full", tuple(products))


def basis_template() -> MacaulayTemplate:
    """
    Products whose span holds the reduced Gröbner basis for ``block_key``.

    ``f1·tᵏ`` for k ≤ 6 and ``f_j·{1, Tx, Ty, Tz}·tᵏ`` for j = 2..4, k ≤ 4.
    They span the 70 monomials ``{Tx, Ty, Tz}·tᵏ``, ``{Tx, Ty, Tz}²·tᵏ`` and
    ``tᵏ`` with k ≤ 6. On generic input the odd part (15 rows) has full rank
    and the even part (52 rows) has rank 43, leaving the 12 standard
    monomials ``tᵏ``, ``Tz·tᵏ`` (k ≤ 5) as the only non-pivot columns.

    Rows are ordered by polynomial index, then by increasing block-order
    multiplier.
    """
    products: List[Product] = [((0, 0, 0, k), 1) for k in range(7)]
    multipliers = [mul(v, (0, 0, 0, k)) for v in (ONE, TX, TY, TZ) for k in range(5)]
    for index in (2, 3, 4):
        products.extend((m, index) for m in sorted(multipliers, key=block_key))
    return MacaulayTemplate("basis", tuple(products), expected_shape=(67, 70), order="block")


COMPACT_TEMPLATE = compact_template()
BASIS_TEMPLATE = basis_template()


@dataclass
class MacaulayMatrix:
    """
    Dense Macaulay matrix with its row products and ordered column labels.
    """

    matrix: np.ndarray
    template: MacaulayTemplate

    @property
    def columns(self) -> Tuple[Monomial, ...]:
        return self.template.columns

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def row_poly(self, r: int, values: Optional[np.ndarray] = None) -> Poly4:
        row = self.matrix[r] if values is None else values
        return Poly4({m: row[j] for j, m in enumerate(self.columns) if row[j] != 0})

    def leading_monomials(self) -> List[Optional[Monomial]]:
        return [leading_column(row, self.columns) for row in self.matrix]

    def reordered(self, order: str) -> "MacaulayMatrix":
        """Same rows with the columns re-sorted under another monomial order."""
        if order == self.template.order:
            return self
        tpl = replace(self.template, order=order)
        old = self.template.column_index()
        perm = [old[m] for m in tpl.columns]
        return MacaulayMatrix(self.matrix[:, perm], tpl)


def leading_column(row: np.ndarray, columns: Sequence[Monomial]) -> Optional[Monomial]:
    nz = np.flatnonzero(row)
    return columns[nz[0]] if nz.size else None


def build_macaulay(
    sys: CoplanaritySystem,
    tpl: MacaulayTemplate = COMPACT_TEMPLATE,
) -> MacaulayMatrix:
    """
    Stack the coefficient rows of every template product.

    Args:
        sys: Coplanarity system {f1..f4}
        tpl: Elimination template (default: the 65-product template)

    Returns:
        MacaulayMatrix of shape ``tpl.shape``

    Raises:
        TemplateMismatchError: If a polynomial has a monomial outside its
            generic support, or the shape differs from the asserted shape
    """
    if tpl.expected_shape is not None and tpl.shape != tpl.expected_shape:
        raise TemplateMismatchError(
            f"Template '{tpl.name}' spans {tpl.shape}, expected {tpl.expected_shape}"
        )
    coefs = np.zeros((4, max(len(s) for s in SUPPORTS.values())))
    for i, f in enumerate(sys.polys, start=1):
        support = SUPPORTS[i]
        foreign = [m for m in f.terms if m not in support]
        if foreign:
            raise TemplateMismatchError(
                f"f{i} has monomial {format_monomial(foreign[0])} "
                f"outside template '{tpl.name}'"
            )
        coefs[i - 1, : len(support)] = [f.coefficient(s) for s in support]

    rows, cols, poly, slot = tpl.scatter
    M = np.zeros(tpl.shape)
    M[rows, cols] = coefs[poly, slot]
    return MacaulayMatrix(M, tpl)


@dataclass
class TemplateElimination:
    """
    Reduced row echelon form of a Macaulay matrix.

    Attributes:
        reduced: Eliminated matrix, pivot entries equal to one
        pivots: Column index of each row's pivot, or -1 for dependent rows
        rank: Number of pivot rows
        changed_rows: Rows whose leading monomial differs before and after
        columns: Column monomials of the eliminated matrix
        order: Monomial order of the columns
    """

    reduced: np.ndarray
    pivots: List[int]
    rank: int
    changed_rows: List[int]
    columns: Tuple[Monomial, ...]
    order: str = "drl"

    @property
    def pivot_monomials(self) -> List[Monomial]:
        return [self.columns[c] for c in self.pivots if c >= 0]

    @property
    def basis(self) -> List[Poly4]:
        """Polynomials of the changed rows, monic."""
        return [self.row_poly(r) for r in self.changed_rows]

    def row_poly(self, r: int) -> Poly4:
        row = self.reduced[r]
        return Poly4({m: row[j] for j, m in enumerate(self.columns) if row[j] != 0})

    def row_with_pivot(self, m: Monomial) -> int:
        c = self.columns.index(m)
        return self.pivots.index(c)


def eliminate_template(M: MacaulayMatrix, tol: float = PIVOT_TOL) -> TemplateElimination:
    """
    Gauss-Jordan elimination in column order with scaled partial pivoting.

    For each column the pivot is the free row with the largest entry
    relative to that row's original max-norm. A column whose best scaled
    entry is at most ``tol`` is a non-pivot column; its entries in the free
    rows are set to zero. Rows left without a pivot are dependent and are
    cleared.

    Args:
        M: Macaulay matrix
        tol: Scaled pivot threshold

    Returns:
        TemplateElimination in reduced row echelon form
    """
    A = M.matrix
    R = A.astype(float, copy=True)
    n_rows, n_cols = R.shape
    scale = np.abs(A).max(axis=1)
    scale[scale == 0.0] = np.finfo(float).tiny
    free = np.ones(n_rows, dtype=bool)
    pivots = [-1] * n_rows
    rank = 0
    for c in range(n_cols):
        if rank == n_rows:
            break
        rows = np.flatnonzero(free)
        ratios = np.abs(R[rows, c]) / scale[rows]
        k = int(np.argmax(ratios))
        if ratios[k] <= tol:
            R[rows, c] = 0.0
            continue
        r = int(rows[k])
        pivot_row = R[r] / R[r, c]
        factors = R[:, c].copy()
        factors[r] = 0.0
        R -= np.outer(factors, pivot_row)
        R[r] = pivot_row
        free[r] = False
        pivots[r] = c
        rank += 1
    R[free] = 0.0

    before = M.leading_monomials()
    changed = [
        r for r, c in enumerate(pivots)
        if c >= 0 and M.columns[c] != before[r]
    ]
    logger.debug(
        "template '%s': rank %d of %d rows, %d leading monomials changed",
        M.template.name, rank, n_rows, len(changed),
    )
    return TemplateElimination(R, pivots, rank, changed, M.columns, M.template.order)
