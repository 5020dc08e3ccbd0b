"""
Coplanarity polynomial system for three gravity-aligned correspondences.

With both views aligned to the vertical the relative rotation is a yaw
``R_φ`` about Y. Substituting ``t = tan(φ/2)`` and clearing the
``1 + t²`` denominator turns each coplanarity constraint into a polynomial
that is linear in the translation and quadratic in t:

    (1 + t²) m2ᵀ [T] R_φ(t) m1 = T · (m2 × u(t)),
    u(t) = ((1 − t²) m1x − 2t m1z,  (1 + t²) m1y,  2t m1x + (1 − t²) m1z)

The coefficients are derived from this expansion rather than transcribed;
see docs/coplanarity_derivation.md.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import companion, eigvals, svd

from .exceptions import DegenerateConfigurationError, InvalidInputError
from .polynomials import ONE, Poly4

logger = logging.getLogger(__name__)

Solution = Tuple[float, float, float, float]

# Imaginary part accepted as zero for univariate roots: 1e-8 * (1 + |Re|)
ORACLE_IMAG_TOL = 1e-8
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class Correspondence:
    """A pair of homologous rays, view 1 and view 2."""

    m1: np.ndarray
    m2: np.ndarray

    def __post_init__(self):
        for name in ("m1", "m2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)) or not np.any(v):
                raise InvalidInputError(f"Correspondence {name} must be a nonzero 3-vector")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class CoplanaritySystem:
    """The normality constraint f1 and three coplanarity polynomials f2..f4."""

    f1: Poly4
    f2: Poly4
    f3: Poly4
    f4: Poly4

    @property
    def polys(self) -> List[Poly4]:
        return [self.f1, self.f2, self.f3, self.f4]

    def residuals(self, x: Sequence[float]) -> np.ndarray:
        return np.array([abs(p.evaluate(x)) for p in self.polys])

    def translation_matrix(self) -> np.ndarray:
        """
        Coefficients of ``A(t)`` with ``(f2, f3, f4) = A(t) (Tx, Ty, Tz)ᵀ``.

        Returns:
            Array of shape (3, 3, 3) indexed ``[row, T component, power of t]``
        """
        return translation_matrix([self.f2, self.f3, self.f4])


def normality_constraint() -> Poly4:
    """``f1 = Tx² + Ty² + Tz² − 1``."""
    return Poly4({(2, 0, 0, 0): 1.0, (0, 2, 0, 0): 1.0, (0, 0, 2, 0): 1.0, ONE: -1.0})


def coplanarity_coefficients(c: Correspondence) -> np.ndarray:
    """
    Coefficient array ``w[i, k]`` of ``T_i t^k`` in the coplanarity polynomial.

    Row i is the T component, column k the power of t (0..2).
    """
    m1x, m1y, m1z = c.m1
    # u(t) = (1 + t²) R_φ(t) m1, rows are components, columns powers of t
    u = np.array([
        [m1x, -2.0 * m1z, -m1x],
        [m1y, 0.0, m1y],
        [m1z, 2.0 * m1x, -m1z],
    ])
    return np.cross(c.m2[None, :], u.T).T


def coplanarity_poly(c: Correspondence) -> Poly4:
    """
    Coplanarity polynomial of one gravity-aligned correspondence.

    Examples:
        >>> z = np.array([0.0, 0.0, 1.0])
        >>> coplanarity_poly(Correspondence(z, z))
        Poly4(-2*Ty*t)
    """
    w = coplanarity_coefficients(c)
    terms = {}
    for i in range(3):
        for k in range(3):
            e = [0, 0, 0, k]
            e[i] = 1
            terms[tuple(e)] = w[i, k]
    return Poly4(terms)


def build_system(samples: Sequence[Correspondence]) -> CoplanaritySystem:
    """
    Instance the system {f1, f2, f3, f4} from exactly three correspondences.

    Raises:
        InvalidInputError: If the sample does not hold three correspondences
    """
    if len(samples) != 3:
        raise InvalidInputError(f"Expected exactly 3 correspondences, got {len(samples)}")
    f2, f3, f4 = (coplanarity_poly(c) for c in samples)
    return CoplanaritySystem(normality_constraint(), f2, f3, f4)


def translation_matrix(rows: Sequence[Poly4]) -> np.ndarray:
    A = np.zeros((3, 3, 3))
    for j, f in enumerate(rows):
        for m, coef in f.terms.items():
            if sum(m[:3]) != 1 or m[3] > 2:
                raise InvalidInputError(f"Polynomial is not linear in T / quadratic in t: {f}")
            A[j, m[:3].index(1), m[3]] = coef
    return A


def _det3(A: np.ndarray) -> np.ndarray:
    """Determinant of a 3x3 matrix of polynomials in t (ascending coefficients)."""
    def minor(r1, r2, c1, c2):
        return P.polysub(P.polymul(A[r1, c1], A[r2, c2]), P.polymul(A[r1, c2], A[r2, c1]))

    det = P.polymul(A[0, 0], minor(1, 2, 1, 2))
    det = P.polysub(det, P.polymul(A[0, 1], minor(1, 2, 0, 2)))
    det = P.polyadd(det, P.polymul(A[0, 2], minor(1, 2, 0, 1)))
    out = np.zeros(7)
    out[: len(det)] = det
    return out


def determinant_polynomial(A: np.ndarray) -> np.ndarray:
    """
    ``det A(t)`` as ascending coefficients of degree at most 6.

    Raises:
        DegenerateConfigurationError: If the determinant vanishes identically
    """
    det = _det3(A)
    scale = float(np.prod([max(np.abs(A[j]).max(), 1e-300) for j in range(3)]))
    if np.abs(det).max() <= DEGENERATE_TOL * scale:
        raise DegenerateConfigurationError(
            "Determinant of A(t) vanishes identically: degenerate correspondences"
        )
    return det


def trim_leading(coefs: np.ndarray, rel_tol: float = DEGENERATE_TOL) -> np.ndarray:
    """Drop negligible leading (highest-power) coefficients."""
    coefs = np.asarray(coefs, dtype=float)
    cutoff = rel_tol * np.abs(coefs).max()
    n = len(coefs)
    while n > 1 and abs(coefs[n - 1]) <= cutoff:
        n -= 1
    return coefs[:n]


def real_roots(coefs: np.ndarray, imag_tol: float = ORACLE_IMAG_TOL) -> np.ndarray:
    """
    Real roots of an ascending-coefficient polynomial via companion eigenvalues.
    """
    c = trim_leading(coefs)
    if len(c) < 2:
        return np.zeros(0)
    roots = eigvals(companion(c[::-1]))
    keep = np.abs(roots.imag) <= imag_tol * (1.0 + np.abs(roots.real))
    return np.sort(roots.real[keep])


def evaluate_matrix(A: np.ndarray, t: float) -> np.ndarray:
    return A[:, :, 0] + A[:, :, 1] * t + A[:, :, 2] * t * t


def null_direction(M: np.ndarray) -> np.ndarray:
    """Unit right null vector of a rank-deficient 3x3 matrix, sign canonicalised."""
    _, _, vt = svd(M)
    v = vt[-1]
    pivot = int(np.argmax(np.abs(v)))
    return v if v[pivot] >= 0 else -v


def solve_det_oracle(sys: CoplanaritySystem) -> List[Solution]:
    """
    Independent solver exploiting that f2..f4 are linear in T.

    Real roots t* of ``det A(t)`` are found from the companion matrix; each
    contributes the unit null vectors ±T of ``A(t*)``.

    Returns:
        Up to 12 real solutions (Tx, Ty, Tz, t)

    Raises:
        DegenerateConfigurationError: If ``det A(t)`` vanishes identically
    """
    A = sys.translation_matrix()
    det = determinant_polynomial(A)
    solutions: List[Solution] = []
    for t in real_roots(det):
        n = null_direction(evaluate_matrix(A, t))
        for sign in (1.0, -1.0):
            Tv = sign * n
            solutions.append((float(Tv[0]), float(Tv[1]), float(Tv[2]), float(t)))
    logger.debug("determinant oracle: %d real t-roots", len(solutions) // 2)
    return solutions
