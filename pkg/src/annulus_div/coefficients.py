"""Boundary-correction polynomials and their coefficient algebra.

For every sphere direction ``w`` the correction is a radial polynomial

    Q(rho w) = sum_alpha C_alpha(w) rho**alpha

matching prescribed boundary data on the two spheres and having zero
``rho**(n-1)``-weighted moment over ``[r1, r2]``.  Two independent routes
produce the coefficients:

* closed-form rational functions of ``mu = r2/r1 - 1`` (value data only),
* a dense solve of the underlying linear system (values, and optionally
  radial derivatives).

Exact arithmetic uses :class:`fractions.Fraction`; floating evaluation is
64-bit.  Conversion only ever goes exact -> float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Sequence

import numpy as np
from scipy import linalg

from .exceptions import DomainError, ShapeError

__all__ = [
    "PolynomialExact",
    "psi_polynomial",
    "psi_tilde_polynomial",
    "eval_psi",
    "psi_taylor_coeffs",
    "eval_psi_tilde",
    "eval_psi_tilde_binomial",
    "correction_denominator",
    "rational_q",
    "rational_load_matrix",
    "system_matrix",
    "solve_correction_oracle",
    "oracle_load_matrix",
    "CorrectionCoefficients",
    "build_correction",
]


def _check_dim(n):
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    return int(n)


def _check_order(l):
    if l not in (0, 1):
        raise DomainError(f"correction order l must be 0 or 1, got {l!r}")
    return l


class PolynomialExact:
    """Univariate polynomial with :class:`~fractions.Fraction` coefficients.

    ``coeffs[i]`` multiplies ``x**i``.  Trailing zeros are trimmed, so the
    zero polynomial has ``coeffs == ()`` and degree ``-1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, power, coeff=1):
        return cls([0] * power + [coeff])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __repr__(self):
        return f"PolynomialExact({[str(c) for c in self.coeffs]})"

    def __eq__(self, other):
        if not isinstance(other, PolynomialExact):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        # Horner; exact for Fraction/int input, float otherwise
        acc = 0 if isinstance(x, Rational) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Rational) else float(c))
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        m = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (m - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (m - len(other.coeffs))
        return PolynomialExact([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return PolynomialExact([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return PolynomialExact()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolynomialExact(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = PolynomialExact([1])
        for _ in range(k):
            out = out * self
        return out

    def derivative(self):
        return PolynomialExact([i * c for i, c in enumerate(self.coeffs)][1:])

    def shift(self, a):
        """Coefficients of ``p(x + a)`` in powers of ``x``."""
        a = Fraction(a)
        out = [Fraction(0)] * len(self.coeffs)
        for i, c in enumerate(self.coeffs):
            for j in range(i + 1):
                out[j] += c * comb(i, j) * a ** (i - j)
        return PolynomialExact(out)


def _as_poly(x):
    return x if isinstance(x, PolynomialExact) else PolynomialExact([x])


def psi_polynomial(n) -> PolynomialExact:
    """The degree ``n+4`` polynomial whose positivity drives the l=1 solve."""
    n = _check_dim(n)
    t = PolynomialExact.monomial(1)
    one = PolynomialExact([1])
    return (
        Fraction(1, (n + 3) * (n + 4)) * (t ** (n + 4) - one)
        + Fraction(1, n * (n + 1)) * t**2 * (t**n - one)
        - Fraction(2, (n + 1) * (n + 3)) * t * (t ** (n + 2) - one)
    )


def psi_tilde_polynomial(n) -> PolynomialExact:
    """Monomial form ``n t^(n+2) - (n+2) t^(n+1) + (n+2) t - n``."""
    n = _check_dim(n)
    coeffs = [0] * (n + 3)
    coeffs[n + 2] = n
    coeffs[n + 1] = -(n + 2)
    coeffs[1] = n + 2
    coeffs[0] = -n
    return PolynomialExact(coeffs)


def eval_psi(n, t):
    """Evaluate the ``n+4`` degree polynomial; exact for rational ``t``."""
    n = _check_dim(n)
    if isinstance(t, Rational):
        return psi_polynomial(n)(Fraction(t))
    t = np.asarray(t, dtype=float)
    return (
        (t ** (n + 4) - 1.0) / ((n + 3) * (n + 4))
        + t**2 * (t**n - 1.0) / (n * (n + 1))
        - 2.0 * t * (t ** (n + 2) - 1.0) / ((n + 1) * (n + 3))
    )


def psi_taylor_coeffs(n) -> list[Fraction]:
    """Exact Taylor coefficients of the ``n+4`` degree polynomial about ``t = 1``.

    Entry ``k`` is the k-th derivative at 1 divided by ``k!`` for
    ``k = 0 .. n+4``.
    """
    coeffs = list(psi_polynomial(n).shift(1).coeffs)
    return coeffs + [Fraction(0)] * (n + 5 - len(coeffs))


def eval_psi_tilde(n, t):
    n = _check_dim(n)
    if isinstance(t, Rational):
        return psi_tilde_polynomial(n)(Fraction(t))
    t = np.asarray(t, dtype=float)
    return n * t ** (n + 2) - (n + 2) * t ** (n + 1) + (n + 2) * t - n


def eval_psi_tilde_binomial(n, t):
    """Same polynomial written as ``sum_a C(n+2, a) (a-2) (t-1)**a``."""
    n = _check_dim(n)
    u = Fraction(t) - 1 if isinstance(t, Rational) else np.asarray(t, dtype=float) - 1.0
    return sum(comb(n + 2, a) * (a - 2) * u**a for a in range(2, n + 3))


def correction_denominator(n, mu):
    """Common denominator of the rational coefficients, positive for ``mu > 0``."""
    return sum(comb(n + 2, a) * (a - 2) * mu**a for a in range(2, n + 3))


def _numerator(k, a, n, mu, exact):
    frac = Fraction if exact else (lambda p, q=1: p / q)
    if (k, a) == (0, 1):
        mid = sum(comb(n + 2, al) * frac(n * n + 3 * n, al + 1) * mu**al for al in range(2, n + 2))
        return n * mu ** (n + 2) + mid + frac((n + 2) * (n + 1) * n, 2) * mu
    if (k, a) == (0, 2):
        return sum(b * n * comb(n + 2, b + 1) * mu**b for b in range(1, n + 2))
    if (k, a) == (1, 1):
        tail = sum(comb(n + 2, al) * mu ** (al - 1) for al in range(3, n + 3))
        return (n + 2) * (n + 1) * n * mu + 2 * (n + 1) * tail
    if (k, a) == (1, 2):
        return sum(comb(n + 2, al) * (al - 1) * (2 * n + 2 - al) * mu ** (al - 1) for al in range(2, n + 3))
    if (k, a) == (2, 1):
        return (n + 2) * sum(comb(n + 1, b + 1) * mu**b for b in range(1, n + 1))
    if (k, a) == (2, 2):
        return (n + 2) * sum(comb(n + 1, b + 1) * b * mu**b for b in range(1, n + 1))
    raise DomainError(f"no rational coefficient Q_({k},{a}); need k in 0..2 and a in 1..2")


def rational_q(k, a, n, mu):
    """Rational coefficient ``Q_{k,a}(mu)`` of the degree-2 correction.

    The coefficient of ``rho**k`` in the correction for unit data on sphere
    ``a`` (1 = inner, 2 = outer) is ``(-1/r1)**k * rational_q(k, a, n, mu)``.
    Returns a :class:`~fractions.Fraction` when ``mu`` is rational, a float
    otherwise.  All sums involved have nonnegative terms, so floating
    evaluation is free of cancellation.
    """
    n = _check_dim(n)
    exact = isinstance(mu, Rational)
    if not exact:
        mu = float(mu)
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")
    if exact:
        mu = Fraction(mu)
    num = _numerator(k, a, n, mu, exact)
    return num / correction_denominator(n, mu)


def rational_load_matrix(n, r1, r2):
    """3x2 map from ``(f(r1 w), f(r2 w))`` to ``(C_0, C_1, C_2)``."""
    _check_radii(r1, r2)
    mu = r2 / r1 - 1.0
    out = np.empty((3, 2))
    for k in range(3):
        for a in (1, 2):
            out[k, a - 1] = (-1.0 / r1) ** k * rational_q(k, a, n, mu)
    return out


def _check_radii(r1, r2):
    if not (0 < r1 < r2 < np.inf):
        raise DomainError(f"need 0 < r1 < r2 < inf, got r1={r1!r}, r2={r2!r}")


def system_matrix(l, n, r1, r2):
    """The ``(2l+3)``-square system: boundary values, derivatives, zero moment.

    Rows are ordered ``Q(r1), Q(r2), [Q'(r1), Q'(r2),] moment``.  Entries are
    Fractions when both radii are rational, floats otherwise.
    """
    l = _check_order(l)
    n = _check_dim(n)
    _check_radii(r1, r2)
    size = 2 * l + 3
    rows = [[r1**k for k in range(size)], [r2**k for k in range(size)]]
    if l == 1:
        rows.append([k * r1 ** (k - 1) if k else 0 * r1 for k in range(size)])
        rows.append([k * r2 ** (k - 1) if k else 0 * r2 for k in range(size)])
    if isinstance(r1, Rational) and isinstance(r2, Rational):
        r1, r2 = Fraction(r1), Fraction(r2)
    rows.append([(r2 ** (n + k) - r1 ** (n + k)) / (n + k) for k in range(size)])
    return rows


def _solve_exact(rows, rhs):
    # plain Gaussian elimination over the rationals
    m = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    size = len(m)
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col] != 0), None)
        if piv is None:
            raise DomainError("correction system is singular")
        m[col], m[piv] = m[piv], m[col]
        for r in range(size):
            if r != col and m[r][col] != 0:
                factor = m[r][col] / m[col][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return [m[i][-1] / m[i][i] for i in range(size)]


def _scaled_lu(l, n, r1, r2):
    """LU factors of the system written in ``s = rho / r1`` with column scaling.

    The raw matrix is Vandermonde-like and badly conditioned for extreme
    radius ratios; working on ``[1, t]`` and equilibrating the columns keeps
    the factorization accurate for ``mu`` from 1e-3 to 1e3.
    """
    t = r2 / r1
    size = 2 * l + 3
    rows = [[1.0] * size, [t**k for k in range(size)]]
    if l == 1:
        rows.append([float(k) for k in range(size)])
        rows.append([k * t ** (k - 1) if k else 0.0 for k in range(size)])
    # moment row divided through by r1**n; (t**m - 1)/m via expm1 for small mu
    lt = np.log(t)
    rows.append([np.expm1((n + k) * lt) / (n + k) for k in range(size)])
    a = np.array(rows, dtype=float)
    colscale = np.max(np.abs(a), axis=0)
    a = a / colscale
    rowscale = np.max(np.abs(a), axis=1)
    a = a / rowscale[:, None]
    lu = linalg.lu_factor(a, check_finite=True)
    piv_min = np.min(np.abs(np.diag(lu[0])))
    if not piv_min > 1e3 * np.finfo(float).eps:
        raise DomainError("correction system is numerically singular")
    return lu, colscale, rowscale


def oracle_load_matrix(l, n, r1, r2):
    """Dense-solve map from boundary loads to coefficients ``C_0..C_{2l+2}``.

    Loads are ordered ``(A10, A20)`` for ``l = 0`` and
    ``(A10, A20, A11, A21)`` for ``l = 1``.
    """
    l = _check_order(l)
    n = _check_dim(n)
    _check_radii(r1, r2)
    lu, colscale, rowscale = _scaled_lu(l, n, float(r1), float(r2))
    nload = 2 * l + 2
    rhs = np.zeros((2 * l + 3, nload))
    for j in range(nload):
        rhs[j, j] = 1.0
    # derivative rows in the scaled variable carry a factor r1
    if l == 1:
        rhs[2, 2] = rhs[3, 3] = float(r1)
    d = linalg.lu_solve(lu, rhs / rowscale[:, None]) / colscale[:, None]
    powers = float(r1) ** -np.arange(2 * l + 3)
    return d * powers[:, None]


def solve_correction_oracle(l, n, r1, r2, a_values, exact=False):
    """Solve the correction system for given boundary loads.

    ``a_values`` holds ``(A10, A20)`` or ``(A10, A20, A11, A21)``; each entry
    may be a scalar or an array of per-direction samples (all of one shape).
    With ``exact=True`` the loads and radii are converted to Fractions and
    the system is solved over the rationals (scalar loads only).
    """
    l = _check_order(l)
    n = _check_dim(n)
    if len(a_values) != 2 * l + 2:
        raise ShapeError(f"l={l} needs {2 * l + 2} boundary loads, got {len(a_values)}")
    if exact:
        fr1, fr2 = Fraction(r1), Fraction(r2)
        _check_radii(fr1, fr2)
        rows = system_matrix(l, n, fr1, fr2)
        loads = [Fraction(a) for a in a_values]
        # RHS order matches the row order of system_matrix
        return _solve_exact(rows, loads + [Fraction(0)])
    k = oracle_load_matrix(l, n, float(r1), float(r2))
    loads = np.asarray([np.asarray(a, dtype=float) for a in a_values])
    return np.tensordot(k, loads, axes=(1, 0))


@dataclass(frozen=True)
class CorrectionCoefficients:
    """Correction polynomial data for one annulus and one set of loads.

    ``load_matrix`` maps boundary loads to coefficients; ``c_funcs`` holds the
    coefficient functions sampled on the loads' sphere grid, with shape
    ``(2l+3,) + grid_shape``.  ``q_values[k, a-1]`` stores ``Q_{k,a}(mu)``
    when the closed forms exist (``l = 0``) and is ``None`` otherwise.
    """

    l: int
    n: int
    r1: float
    r2: float
    load_matrix: np.ndarray
    c_funcs: np.ndarray
    q_values: np.ndarray | None = None
    grid: object = field(default=None, compare=False)

    @property
    def mu(self):
        return self.r2 / self.r1 - 1.0

    @property
    def degree(self):
        return 2 * self.l + 2

    def coefficients_for(self, loads):
        """Coefficients for loads sampled at arbitrary directions."""
        loads = np.asarray(loads, dtype=float)
        return np.tensordot(self.load_matrix, loads, axes=(1, 0))

    def radial_values(self, rho, coeffs=None):
        """``Q(rho w)`` for every grid direction ``w`` (or for given coefficients)."""
        c = self.c_funcs if coeffs is None else coeffs
        rho = float(rho)
        return sum(c[k] * rho**k for k in range(c.shape[0]))

    def radial_derivative(self, rho, coeffs=None):
        c = self.c_funcs if coeffs is None else coeffs
        rho = float(rho)
        return sum(k * c[k] * rho ** (k - 1) for k in range(1, c.shape[0]))


def build_correction(l, n, r1, r2, a_funcs, method="oracle"):
    """Build the correction coefficients from boundary data on a sphere grid.

    ``a_funcs`` is a sequence of sphere scalars (objects with ``values`` and
    ``grid``) or plain arrays, ordered like the loads of
    :func:`solve_correction_oracle`.  ``method="oracle"`` uses one dense
    factorization for all directions; ``method="rational"`` uses the closed
    forms (``l = 0`` only).
    """
    l = _check_order(l)
    n = _check_dim(n)
    _check_radii(r1, r2)
    if len(a_funcs) != 2 * l + 2:
        raise ShapeError(f"l={l} needs {2 * l + 2} boundary functions, got {len(a_funcs)}")
    grids = [getattr(a, "grid", None) for a in a_funcs]
    values = [np.asarray(getattr(a, "values", a), dtype=float) for a in a_funcs]
    if any(v.shape != values[0].shape for v in values):
        raise ShapeError("boundary functions are sampled on grids of different shapes")
    if any(g is not grids[0] and g != grids[0] for g in grids):
        raise ShapeError("boundary functions are sampled on different grids")

    q_values = None
    if l == 0:
        mu = r2 / r1 - 1.0
        q_values = np.array([[rational_q(k, a, n, mu) for a in (1, 2)] for k in range(3)])
    if method == "rational":
        if l != 0:
            raise DomainError("closed-form coefficients exist only for l = 0")
        kmat = rational_load_matrix(n, r1, r2)
    elif method == "oracle":
        kmat = oracle_load_matrix(l, n, r1, r2)
    else:
        raise ValueError(f"unknown method {method!r}")
    c = np.tensordot(kmat, np.asarray(values), axes=(1, 0))
    return CorrectionCoefficients(
        l=l, n=n, r1=float(r1), r2=float(r2), load_matrix=kmat, c_funcs=c, q_values=q_values, grid=grids[0]
    )
