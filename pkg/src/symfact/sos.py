"""Difference-of-squares certificates for even univariate polynomials.

An even-degree polynomial is the quadratic form of a specific Hankel matrix
(coefficients spread uniformly across anti-diagonals); factoring that matrix
as B B* - C C* turns its columns into the linear forms of a certificate
p(x) = sum |l_j(x)|^2 - sum |m_j(x)|^2, which is checked by expanding the
squares back into coefficients.
"""

from dataclasses import dataclass

import numpy as np

from .core import HankelGen
from .errors import DimensionError, PreconditionError
from .hankel import hankel_factor

_DROP_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Real coefficients in ascending degree order."""

    coeffs: np.ndarray
    degree: int = -1

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise DimensionError("coefficients must be a nonempty 1-D sequence")
        d = self.degree if self.degree >= 0 else c.size - 1
        if d + 1 < c.size and np.any(c[d + 1:] != 0):
            raise PreconditionError("nonzero coefficients beyond the marked degree")
        padded = np.zeros(d + 1)
        padded[: min(c.size, d + 1)] = c[: d + 1]
        padded.setflags(write=False)
        object.__setattr__(self, "coeffs", padded)
        object.__setattr__(self, "degree", d)

    def __call__(self, x):
        return np.polyval(self.coeffs[::-1], x)


@dataclass(frozen=True, eq=False)
class SquareTerm:
    """One |l(x)|^2 contribution with its sign."""

    coeffs: np.ndarray
    sign: int

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if self.sign not in (+1, -1):
            raise PreconditionError("sign must be +1 or -1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def expand(self):
        """Real coefficients of |l(x)|^2 for real x."""
        return np.convolve(self.coeffs, np.conj(self.coeffs)).real


def gram_hankel(p):
    """The Hankel matrix (as a generator) whose quadratic form is p.

    Entry (i, j), 1-based, is a_{i+j-2} divided by the number of cells on its
    anti-diagonal, min(i+j-1, 2k+3-i-j), so x^T H x = p(x) identically with
    x the monomial vector (1, x, ..., x^k).
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(np.atleast_1d(np.asarray(p, dtype=float)))
    d = p.degree
    if d % 2:
        raise PreconditionError("degree must be even")
    k = d // 2
    dd = np.arange(2 * k + 1)
    counts = np.minimum(dd + 1, 2 * k + 1 - dd)
    return HankelGen(k + 1, p.coeffs / counts)


def sos_decompose(p):
    """Certificate terms with p(x) = sum_+ |l(x)|^2 - sum_- |m(x)|^2 for real x."""
    if not isinstance(p, Polynomial):
        p = Polynomial(np.atleast_1d(np.asarray(p, dtype=float)))
    h = gram_hankel(p)
    pair = hankel_factor(h)
    terms = []
    scale = max(float(np.abs(p.coeffs).max()), 1e-300)
    for node, sign in ((pair.B, +1), (pair.C, -1)):
        cols = node.materialize()[: pair.source_order]
        for j in range(cols.shape[1]):
            col = cols[:, j]
            if np.abs(col).max(initial=0.0) <= _DROP_TOL * np.sqrt(scale):
                continue
            terms.append(SquareTerm(col, sign))
    return terms


def verify_decomposition(p, terms):
    """Max-abs coefficient residual of the certificate against p."""
    if not isinstance(p, Polynomial):
        p = Polynomial(np.atleast_1d(np.asarray(p, dtype=float)))
    width = p.degree + 1
    for term in terms:
        width = max(width, 2 * term.coeffs.size - 1)
    acc = np.zeros(width)
    acc[: p.degree + 1] -= p.coeffs
    for term in terms:
        e = term.expand()
        acc[: e.size] += term.sign * e
    return float(np.abs(acc).max(initial=0.0))


def evaluate_terms(terms, x):
    """Signed certificate value at real points x."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x, dtype=float)
    for term in terms:
        lx = np.polyval(term.coeffs[::-1], x)
        total += term.sign * np.abs(lx) ** 2
    return total
