"""
Algebraic solver for the coplanarity system.

Pipeline:

1. ``build_macaulay``: Macaulay matrix of the basis template (67×70, block
   order, see ``macaulay.basis_template``).
2. ``eliminate_to_groebner``: reduced row echelon form of the template. The
   minimal generators of the pivot monomials give the initial ideal; on
   generic input it is ⟨Tx, Ty, Tz², t⁶⟩ and the rows with those pivots are
   the reduced Gröbner basis

       Tx − Tz·a(t),  Ty − Tz·b(t),  Tz² − r(t),  t⁶ + p₅t⁵ + … + p₀

3. ``action_matrix``: multiplication by a generic linear form on the
   quotient basis {tᵏ, Tz·tᵏ : k = 0..5}, assembled from the companion
   matrix of the last element and the coefficients of a, b and r.
4. Eigenvectors of the transposed action matrix are evaluations of the
   quotient basis at the solutions, from which t and Tz are read directly.

The number of real solutions is checked against the real roots of
det A(t). Instances that leave the expected initial ideal (a real root with
Tz = 0), have an ill-conditioned basis, or fail that check are solved from
the roots of det A(t) and the null vectors of A(t) instead.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
import logging
import time

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import LinAlgError, eig

from .coplanarity import (
    Correspondence,
    CoplanaritySystem,
    Solution,
    build_system,
    determinant_polynomial,
    evaluate_matrix,
    null_direction,
    real_roots,
)
from .exceptions import (
    DegenerateConfigurationError,
    InvalidInputError,
    NonGenericPositionError,
    SelfTestError,
    TemplateMismatchError,
)
from .macaulay import (
    BASIS_TEMPLATE,
    COMPACT_TEMPLATE,
    MacaulayMatrix,
    TemplateElimination,
    build_macaulay,
    eliminate_template,
    full_template,
)
from .polynomials import (
    ONE,
    TX,
    TY,
    TZ,
    Monomial,
    Poly4,
    block_key,
    divides,
    format_monomial,
    mul,
    quotient,
)
from .pose import r_phi

logger = logging.getLogger(__name__)

GENERIC_FORM_SEED = 20100
# Per-solve wall time the benchmark expects, in microseconds
SOLVE_TIME_BUDGET_US = 1000.0

ROUTE_ACTION = "action-matrix"
ROUTE_DETERMINANT = "determinant"


class QuotientBasis:
    """
    The 12 standard monomials {1, t, …, t⁵, Tz, Tz·t, …, Tz·t⁵}, in this order.
    """

    monomials: Tuple[Monomial, ...] = tuple(
        [(0, 0, 0, k) for k in range(6)] + [(0, 0, 1, k) for k in range(6)]
    )

    def __init__(self):
        self.index: Dict[Monomial, int] = {m: i for i, m in enumerate(self.monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __contains__(self, m: Monomial) -> bool:
        return m in self.index

    def evaluate(self, Tz: complex, t: complex) -> np.ndarray:
        return np.array([Tz ** m[2] * t ** m[3] for m in self.monomials])


QUOTIENT_BASIS = QuotientBasis()
EXPECTED_LEADING = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 2, 0), (0, 0, 0, 6))


def minimal_generators(monomials: Iterable[Monomial]) -> List[Monomial]:
    """
    Monomials not divisible by another monomial of the set, in decreasing
    block order.

    Examples:
        >>> minimal_generators([(1, 0, 0, 0), (1, 0, 0, 2), (0, 0, 0, 6)])
        [(1, 0, 0, 0), (0, 0, 0, 6)]
    """
    ms = set(monomials)
    gens = [m for m in ms if not any(d != m and divides(d, m) for d in ms)]
    return sorted(gens, key=block_key, reverse=True)


def format_ideal(monomials: Iterable[Monomial]) -> str:
    return ", ".join(format_monomial(m) for m in sorted(monomials, key=block_key, reverse=True))


@dataclass
class GroebnerBasis:
    """
    Reduced Gröbner basis of the coplanarity ideal for ``block_key``.

    Attributes:
        elements: Monic rows of the eliminated template led by Tx, Ty, Tz², t⁶
        template: Reduced echelon form the elements were read from
        initial: Minimal generators of the template's pivot monomials
        det_poly: Ascending coefficients of the monic univariate element
        a, b, r: Ascending coefficients of a(t), b(t), r(t)
        condition: Largest tail coefficient of the elements (at least 1)
    """

    elements: List[Poly4]
    template: TemplateElimination
    initial: List[Monomial]
    det_poly: np.ndarray
    a: np.ndarray
    b: np.ndarray
    r: np.ndarray
    condition: float

    @property
    def leading_monomials(self) -> List[Monomial]:
        return [g.leading_monomial(block_key) for g in self.elements]

    def element_with_leading(self, m: Monomial) -> Poly4:
        for g in self.elements:
            if g.leading_monomial(block_key) == m:
                return g
        raise KeyError(format_monomial(m))

    @cached_property
    def companion(self) -> np.ndarray:
        """Multiplication by t on K[t]/⟨t⁶ + p(t)⟩ in the basis 1..t⁵."""
        C = np.zeros((6, 6))
        C[1:, :5] = np.eye(5)
        C[:, 5] = -self.det_poly[:6]
        return C

    @cached_property
    def tail_matrices(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Multiplication by a(t), b(t) and r(t) on K[t]/⟨t⁶ + p(t)⟩."""
        C = self.companion
        return tuple(_mult_matrix(C, q) for q in (self.a, self.b, self.r))


@dataclass
class SolverOptions:
    """
    Tunables of :func:`solve_system`.

    Attributes:
        form_seed: Seed of the generic linear form's coefficients
        imag_tol: Accept eigen read-offs with ``|Im| ≤ imag_tol·(1 + |Re|)``
        borderline_tol: Polish and re-test read-offs up to this imaginary part
        residual_tol: Discard solutions with ``max |f_i|`` above this
        polish_steps: Newton steps on the square system f1..f4
        cond_limit: Above this tail coefficient solutions come from det A(t)
        fallback: Solve from det A(t) when the action matrix route fails;
            when False the failure is raised
    """

    form_seed: int = GENERIC_FORM_SEED
    imag_tol: float = 1e-6
    borderline_tol: float = 1e-3
    residual_tol: float = 1e-6
    polish_steps: int = 2
    cond_limit: float = 1e8
    fallback: bool = True


@dataclass
class SolveOutcome:
    """
    Solutions of one system and how they were obtained.

    Attributes:
        solutions: Real solutions (Tx, Ty, Tz, t), sorted by (t, Tx, Ty, Tz)
        route: "action-matrix" or "determinant"
        reason: Why the determinant route was taken, if it was
        basis: Gröbner basis, when elimination succeeded
    """

    solutions: List[Solution]
    route: str
    reason: Optional[str] = None
    basis: Optional[GroebnerBasis] = field(default=None, repr=False)


def generic_form(seed: int = GENERIC_FORM_SEED) -> Poly4:
    """Linear form with fixed pseudo-random coefficients in [−1, 1] on (Tx, Ty, Tz, t)."""
    c = np.random.default_rng(seed).uniform(-1.0, 1.0, size=4)
    return Poly4({TX: c[0], TY: c[1], TZ: c[2], (0, 0, 0, 1): c[3]})


def _mult_matrix(C: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    """Matrix of multiplication by ``Σ cₖ tᵏ`` on K[t]/⟨p⟩, given C = mult by t."""
    out = np.zeros_like(C)
    for c in coefs[::-1]:
        out = out @ C + c * np.eye(C.shape[0])
    return out


_LINEAR_TERMS = (TX, TY, TZ, (0, 0, 0, 1), ONE)


def _form_coefficients(form: Union[Poly4, Sequence[float], None]) -> np.ndarray:
    """Coefficients (cTx, cTy, cTz, ct, c0) of a linear form."""
    if form is None:
        form = generic_form()
    if isinstance(form, Poly4):
        extra = [m for m in form.terms if m not in _LINEAR_TERMS]
        if extra:
            raise InvalidInputError(
                f"Action form must be linear, got term {format_monomial(extra[0])}"
            )
        return np.array([form.coefficient(m) for m in _LINEAR_TERMS])
    coefs = [float(c) for c in form]
    if len(coefs) > 5:
        raise InvalidInputError(f"Linear form has at most 5 coefficients, got {len(coefs)}")
    return np.array(coefs + [0.0] * (5 - len(coefs)))


def eliminate_to_groebner(M: MacaulayMatrix) -> GroebnerBasis:
    """
    Eliminate a Macaulay template and read the reduced Gröbner basis off it.

    Columns are re-sorted by the block order first when the template uses
    another order. The initial ideal is generated by the minimal pivot
    monomials of the reduced echelon form; the basis elements are the
    changed rows whose pivots are those generators.

    Args:
        M: Macaulay matrix built by :func:`build_macaulay`

    Returns:
        GroebnerBasis with leading monomials {Tx, Ty, Tz², t⁶}

    Raises:
        TemplateMismatchError: If the template has no column for one of
            Tx, Ty, Tz², t⁶
        DegenerateConfigurationError: If the template rank leaves more than
            12 standard monomials
        NonGenericPositionError: If the initial ideal is not
            ⟨Tx, Ty, Tz², t⁶⟩, as when a real solution has Tz = 0
    """
    M = M.reordered("block")
    missing = [m for m in EXPECTED_LEADING if m not in M.columns]
    if missing:
        raise TemplateMismatchError(
            f"Template '{M.template.name}' has no column for "
            f"{format_ideal(missing)}; it cannot hold the reduced basis"
        )

    elim = eliminate_template(M)
    initial = minimal_generators(elim.pivot_monomials)
    size = len(M.columns) - elim.rank
    if size > len(QUOTIENT_BASIS):
        raise DegenerateConfigurationError(
            f"Template rank {elim.rank} leaves {size} standard monomials; "
            f"the system has more than {len(QUOTIENT_BASIS)} solutions",
            rank=elim.rank,
        )
    if set(initial) != set(EXPECTED_LEADING):
        raise NonGenericPositionError(
            f"Initial ideal <{format_ideal(initial)}> instead of "
            f"<{format_ideal(EXPECTED_LEADING)}>",
            rank=elim.rank,
        )

    by_lead = {g.leading_monomial(block_key): g for g in elim.basis}
    elements = []
    for m in EXPECTED_LEADING:
        g = by_lead.get(m)
        if g is None:
            g = elim.row_poly(elim.row_with_pivot(m))
        elements.append(g)

    tails = [
        (m, c) for g, lead in zip(elements, EXPECTED_LEADING)
        for m, c in g.terms.items() if m != lead
    ]
    escaped = [m for m, _ in tails if m not in QUOTIENT_BASIS]
    if escaped:
        raise NonGenericPositionError(
            f"Basis tail leaves the quotient basis: {format_ideal(escaped)}",
            rank=elim.rank,
        )
    condition = max([1.0] + [abs(c) for _, c in tails])
    if not np.isfinite(condition):
        raise NonGenericPositionError("Non-finite Gröbner basis coefficients", rank=elim.rank)

    g_tx, g_ty, g_tz, g_t = elements
    a = np.array([-g_tx.coefficient((0, 0, 1, k)) for k in range(6)])
    b = np.array([-g_ty.coefficient((0, 0, 1, k)) for k in range(6)])
    r = np.array([-g_tz.coefficient((0, 0, 0, k)) for k in range(6)])
    p = np.array([g_t.coefficient((0, 0, 0, k)) for k in range(7)])
    return GroebnerBasis(elements, elim, initial, p, a, b, r, condition)


def normal_form(f: Poly4, G: Sequence[Poly4], B: QuotientBasis = QUOTIENT_BASIS) -> Poly4:
    """
    Remainder of ``f`` on division by the monic basis ``G`` (block order).

    Raises:
        TemplateMismatchError: If the remainder leaves the quotient basis
    """
    leads = [(g.leading_monomial(block_key), g) for g in G]
    work = dict(f.terms)
    remainder: Dict[Monomial, float] = {}
    while work:
        m = max(work, key=block_key)
        c = work.pop(m)
        if c == 0.0:
            continue
        for lead, g in leads:
            if divides(lead, m):
                u = quotient(m, lead)
                for gm, gc in g.terms.items():
                    if gm != lead:
                        key = mul(gm, u)
                        work[key] = work.get(key, 0.0) - c * gc
                break
        else:
            remainder[m] = remainder.get(m, 0.0) + c
    nf = Poly4(remainder)
    escaped = [m for m in nf.terms if m not in B]
    if escaped:
        raise TemplateMismatchError(
            "Normal form escapes the quotient basis: "
            + ", ".join(format_monomial(m) for m in escaped)
        )
    return nf


def multiplication_matrix(
    G: GroebnerBasis,
    f: Poly4,
    B: QuotientBasis = QUOTIENT_BASIS,
) -> np.ndarray:
    """
    Matrix of multiplication by any polynomial ``f``, column j holding the
    coordinates of ``NF(f · B_j)`` in B.
    """
    n = len(B)
    M = np.zeros((n, n))
    for j, bj in enumerate(B):
        nf = normal_form(f.mul_monomial(bj), G.elements, B)
        for m, c in nf.terms.items():
            M[B.index[m], j] = c
    return M


def action_matrix(
    G: GroebnerBasis,
    B: QuotientBasis = QUOTIENT_BASIS,
    form: Union[Poly4, Sequence[float]] = None,
) -> np.ndarray:
    """
    Matrix of multiplication by a linear ``form`` on the quotient ring.

    With the basis ordered (tᵏ, Tz·tᵏ) and Mq the multiplication by q(t) on
    K[t]/⟨t⁶ + p(t)⟩, multiplication by t is diag(C, C), by Tz is
    [[0, Mr], [I, 0]], and by Tx = Tz·a(t) is [[0, Mr·Ma], [Ma, 0]].

    Args:
        G: Gröbner basis
        B: Quotient basis
        form: Linear polynomial, or coefficients (cTx, cTy, cTz, ct[, c0])
    """
    c = _form_coefficients(form)
    if B.monomials != QUOTIENT_BASIS.monomials:
        f = Poly4(dict(zip(_LINEAR_TERMS, c)))
        return multiplication_matrix(G, f, B)
    C = G.companion
    Ma, Mb, Mr = G.tail_matrices
    I6 = np.eye(6)
    Z6 = np.zeros((6, 6))
    act = c[4] * np.eye(12) + c[3] * np.block([[C, Z6], [Z6, C]])
    for coef, tail in ((c[0], Ma), (c[1], Mb), (c[2], I6)):
        if coef != 0.0:
            act = act + coef * np.block([[Z6, Mr @ tail], [tail, Z6]])
    return act


def evaluate_system(A: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Values and Jacobians of f1..f4 at the rows of ``X``.

    Args:
        A: Translation matrix coefficients, shape (3, 3, 3)
        X: Points (Tx, Ty, Tz, t), shape (n, 4)

    Returns:
        F of shape (n, 4) and J of shape (n, 4, 4)
    """
    X = np.atleast_2d(X)
    T, t = X[:, :3], X[:, 3]
    one, zero = np.ones_like(t), np.zeros_like(t)
    At = np.einsum("jik,nk->nji", A, np.stack([one, t, t * t], axis=1))
    dAt = np.einsum("jik,nk->nji", A, np.stack([zero, one, 2.0 * t], axis=1))
    F = np.empty((len(X), 4))
    F[:, 0] = np.einsum("ni,ni->n", T, T) - 1.0
    F[:, 1:] = np.einsum("nji,ni->nj", At, T)
    J = np.zeros((len(X), 4, 4))
    J[:, 0, :3] = 2.0 * T
    J[:, 1:, :3] = At
    J[:, 1:, 3] = np.einsum("nji,ni->nj", dAt, T)
    return F, J


def _polish(A: np.ndarray, X: np.ndarray, steps: int) -> np.ndarray:
    for _ in range(steps):
        F, J = evaluate_system(A, X)
        try:
            dx = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            dx = np.einsum("nij,nj->ni", np.linalg.pinv(J), F)
        X = X - dx
    return X


def _is_real(z: complex, tol: float) -> bool:
    return abs(z.imag) <= tol * (1.0 + abs(z.real))


def _accept(A: np.ndarray, candidates: List[np.ndarray], opts: SolverOptions) -> List[np.ndarray]:
    """Polish candidates, then keep the new ones with a small residual."""
    if not candidates:
        return []
    X = _polish(A, np.array(candidates, dtype=float), opts.polish_steps)
    with np.errstate(invalid="ignore", divide="ignore"):
        X[:, :3] /= np.linalg.norm(X[:, :3], axis=1, keepdims=True)
    F, _ = evaluate_system(A, X)
    residuals = np.abs(F).max(axis=1)
    solutions: List[np.ndarray] = []
    for x, residual in zip(X, residuals):
        if not np.isfinite(residual) or residual > opts.residual_tol:
            logger.debug("discarded candidate t=%.6g (residual %.3g)", x[3], residual)
            continue
        if any(np.allclose(x, s, rtol=0.0, atol=1e-8) for s in solutions):
            continue
        solutions.append(x)
    return solutions


def _solve_by_determinant(
    A: np.ndarray,
    roots: np.ndarray,
    opts: SolverOptions,
) -> List[np.ndarray]:
    """Null vectors ±T of A(t) at the real roots of det A(t)."""
    candidates = []
    for t in roots:
        n = null_direction(evaluate_matrix(A, t))
        candidates.extend([np.array([*n, t]), np.array([*(-n), t])])
    return _accept(A, candidates, opts)


def _read_off(G: GroebnerBasis, act: np.ndarray, opts: SolverOptions) -> List[np.ndarray]:
    """Real candidates (Tx, Ty, Tz, t) from the eigenvectors of ``act.T``."""
    B = QUOTIENT_BASIS
    i_t, i_tz = B.index[(0, 0, 0, 1)], B.index[(0, 0, 1, 0)]
    _, vecs = eig(act.T)
    candidates = []
    for v in vecs.T:
        if abs(v[0]) < 1e-14 * np.abs(v).max():
            continue
        t, Tz = v[i_t] / v[0], v[i_tz] / v[0]
        if not (_is_real(t, opts.borderline_tol) and _is_real(Tz, opts.borderline_tol)):
            continue
        if not (_is_real(t, opts.imag_tol) and _is_real(Tz, opts.imag_tol)):
            logger.debug("borderline read-off t=%s, Tz=%s", t, Tz)
        t, Tz = t.real, Tz.real
        candidates.append(np.array([Tz * P.polyval(t, G.a), Tz * P.polyval(t, G.b), Tz, t]))
    return candidates


def _solve_by_action_matrix(
    sys: CoplanaritySystem,
    A: np.ndarray,
    expected: int,
    opts: SolverOptions,
) -> Tuple[List[np.ndarray], GroebnerBasis]:
    """
    Raises:
        NonGenericPositionError: If the basis is unusable or the route does
            not recover ``expected`` real solutions
    """
    G = eliminate_to_groebner(build_macaulay(sys, BASIS_TEMPLATE))
    if G.condition > opts.cond_limit:
        raise NonGenericPositionError(
            f"Gröbner basis coefficient {G.condition:.3g} above limit {opts.cond_limit:.3g}",
            rank=G.template.rank,
        )
    try:
        act = action_matrix(G, form=generic_form(opts.form_seed))
        solutions = _accept(A, _read_off(G, act, opts), opts)
    except (LinAlgError, ValueError) as e:
        raise NonGenericPositionError(f"Action matrix eigendecomposition failed: {e}") from e
    if len(solutions) != expected:
        raise NonGenericPositionError(
            f"Action matrix gave {len(solutions)} real solutions, det A(t) gives {expected}",
            rank=G.template.rank,
        )
    return solutions, G


def solve_system_detailed(
    sys: CoplanaritySystem,
    options: Optional[SolverOptions] = None,
) -> SolveOutcome:
    """
    Solve the system and report which route produced the solutions.

    Args:
        sys: System {f1..f4}
        options: Solver tunables

    Returns:
        SolveOutcome

    Raises:
        DegenerateConfigurationError: If det A(t) vanishes identically
        NonGenericPositionError: If the action matrix route fails and
            ``options.fallback`` is False
    """
    opts = options or SolverOptions()
    A = sys.translation_matrix()
    roots = real_roots(determinant_polynomial(A), opts.imag_tol)
    try:
        solutions, G = _solve_by_action_matrix(sys, A, 2 * len(roots), opts)
        outcome = SolveOutcome([], ROUTE_ACTION, None, G)
    except (DegenerateConfigurationError, TemplateMismatchError) as e:
        if not opts.fallback:
            raise
        logger.debug("%s; solving from det A(t)", e)
        solutions = _solve_by_determinant(A, roots, opts)
        outcome = SolveOutcome([], ROUTE_DETERMINANT, str(e))

    solutions.sort(key=lambda s: (s[3], s[0], s[1], s[2]))
    outcome.solutions = [tuple(float(v) for v in s) for s in solutions]
    return outcome


def solve_system(
    sys: CoplanaritySystem,
    options: Optional[SolverOptions] = None,
) -> List[Solution]:
    """
    All real solutions (Tx, Ty, Tz, t) of the coplanarity system.

    Solutions are read from the eigenvectors of the action matrix. Instances
    outside the generic initial ideal, with an ill-conditioned basis, or
    whose solution count disagrees with the real roots of det A(t) are
    solved from those roots instead.

    Args:
        sys: System {f1..f4}
        options: Solver tunables (default: fixed form seed, fallback on)

    Returns:
        At most 12 solutions sorted by (t, Tx, Ty, Tz); an empty list is a
        valid result

    Raises:
        DegenerateConfigurationError: If det A(t) vanishes identically
    """
    return solve_system_detailed(sys, options).solutions


def solve_correspondences(
    samples: Sequence[Correspondence],
    options: Optional[SolverOptions] = None,
) -> List[Solution]:
    """Convenience: ``solve_system(build_system(samples))``."""
    return solve_system(build_system(samples), options)


def synthetic_samples(rng: np.random.Generator) -> Tuple[List[Correspondence], Solution]:
    """
    Three exact gravity-aligned correspondences and their generating solution.

    The yaw is drawn within ±30°, the baseline uniformly on the sphere and the
    points in front of camera 1 at depths 1..3.
    """
    t = float(np.tan(np.radians(rng.uniform(-30.0, 30.0)) / 2.0))
    T = rng.normal(size=3)
    T /= np.linalg.norm(T)
    R = r_phi(t)
    samples = []
    for _ in range(3):
        X = np.array([rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 1.0]) * rng.uniform(1, 3)
        samples.append(Correspondence(X / X[2], R @ X + 0.3 * T))
    return samples, (float(T[0]), float(T[1]), float(T[2]), t)


@dataclass
class SelfTestFact:
    name: str
    expected: str
    observed: str
    passed: bool


@dataclass
class SelfTestReport:
    """
    Structural facts checked by :func:`selftest` plus timing.

    Attributes:
        rank: Rank of the compact 65×77 template
        basis_rank: Rank of the basis template
        full_rank: Rank of the 175-product template
        route: Route that solved the instance
    """

    seed: int
    facts: List[SelfTestFact]
    rank: int
    basis_rank: int
    full_rank: int
    solutions: int
    route: str
    mean_solve_us: float
    repeats: int
    time_budget_us: float = SOLVE_TIME_BUDGET_US

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.facts)

    @property
    def within_time_budget(self) -> bool:
        return self.mean_solve_us <= self.time_budget_us

    def failures(self) -> List[SelfTestFact]:
        return [f for f in self.facts if not f.passed]


def selftest(seed: int = 0, repeats: int = 200, strict: bool = False) -> SelfTestReport:
    """
    Check the solver's structural facts on a random instance and time it.

    Facts: template degree 6, Macaulay shape 65×77, initial ideal
    {Tx, Ty, Tz², t⁶} and quotient dimension 12 as read from the eliminated
    basis template, and agreement of the assembled action matrix with
    normal-form reduction.

    Args:
        seed: Seed of the random instance
        repeats: Number of timed solves
        strict: Raise SelfTestError on the first violated fact

    Returns:
        SelfTestReport
    """
    rng = np.random.default_rng(seed)
    samples, _ = synthetic_samples(rng)
    sys = build_system(samples)
    compact = build_macaulay(sys, COMPACT_TEMPLATE)
    basis = build_macaulay(sys, BASIS_TEMPLATE)
    elim = eliminate_template(basis)
    initial = minimal_generators(elim.pivot_monomials)
    dimension = len(basis.columns) - elim.rank

    def fact(name, expected, observed):
        return SelfTestFact(name, str(expected), str(observed), expected == observed)

    facts = [
        fact("max template degree", 6, COMPACT_TEMPLATE.max_degree),
        fact("Macaulay matrix shape", "65x77", "{}x{}".format(*compact.shape)),
        fact("initial ideal", format_ideal(EXPECTED_LEADING), format_ideal(initial)),
        fact("quotient dimension", len(QUOTIENT_BASIS), dimension),
    ]
    try:
        G = eliminate_to_groebner(basis)
        form = generic_form()
        reference = multiplication_matrix(G, form)
        err = float(np.abs(action_matrix(G, form=form) - reference).max())
        scale = max(1.0, float(np.abs(reference).max()))
        observed = "normal form" if err <= 1e-8 * scale else f"differs by {err:.2g}"
    except (DegenerateConfigurationError, TemplateMismatchError) as e:
        observed = f"unavailable: {e}"
    facts.append(fact("action matrix", "normal form", observed))

    if strict:
        for f in facts:
            if not f.passed:
                raise SelfTestError(f"{f.name}: expected {f.expected}, observed {f.observed}")

    outcome = solve_system_detailed(sys)
    runs = max(repeats, 1)
    start = time.perf_counter()
    for _ in range(runs):
        solve_system(sys)
    mean_us = (time.perf_counter() - start) / runs * 1e6
    report = SelfTestReport(
        seed=seed,
        facts=facts,
        rank=eliminate_template(compact).rank,
        basis_rank=elim.rank,
        full_rank=eliminate_template(build_macaulay(sys, full_template())).rank,
        solutions=len(outcome.solutions),
        route=outcome.route,
        mean_solve_us=mean_us,
        repeats=runs,
    )
    if not report.within_time_budget:
        logger.warning(
            "mean solve time %.0f us exceeds the %.0f us budget",
            mean_us, report.time_budget_us,
        )
    return report
