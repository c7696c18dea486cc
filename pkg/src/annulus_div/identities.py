"""Exact-arithmetic identity suite for the correction polynomials.

For each dimension n the suite checks, with :class:`fractions.Fraction`:

* the Taylor coefficients of the degree ``n+4`` polynomial at ``t = 1``
  vanish for ``k <= 4`` and are positive for ``5 <= k <= n+4``;
* the monomial and binomial forms of the degree ``n+2`` polynomial agree;
* the closed-form coefficients equal an exact dense solve of the 3x3 system;
* the 3x3 and 5x5 system determinants factor through those two polynomials,
  so both systems are nonsingular for every ``R2 > R1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .coefficients import (
    eval_psi,
    eval_psi_tilde,
    eval_psi_tilde_binomial,
    psi_taylor_coeffs,
    rational_q,
    solve_correction_oracle,
    system_matrix,
)
from .exceptions import DomainError

__all__ = ["IdentityResult", "DEFAULT_SAMPLES", "exact_determinant", "check_dimension", "run_identities"]

DEFAULT_SAMPLES = (Fraction(11, 10), Fraction(3, 2), Fraction(2), Fraction(7, 3), Fraction(11))


@dataclass
class IdentityResult:
    n: int
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def line(self):
        failed = [k for k, ok in self.checks.items() if not ok]
        status = "PASS" if not failed else "FAIL (" + ", ".join(failed) + ")"
        return f"n={self.n:<3d} {status}"


def exact_determinant(rows):
    m = [[Fraction(v) for v in r] for r in rows]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, size):
            factor = m[r][col] / m[col][col]
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def _taylor(n):
    c = psi_taylor_coeffs(n)
    return all(v == 0 for v in c[:5]), all(v > 0 for v in c[5 : n + 5])


def _closed_form_matches_solve(n, t, r1):
    mu = t - 1
    for a in (1, 2):
        loads = [Fraction(int(a == 1)), Fraction(int(a == 2))]
        solved = solve_correction_oracle(0, n, r1, r1 * t, loads, exact=True)
        closed = [(-1 / r1) ** k * rational_q(k, a, n, mu) for k in range(3)]
        if solved != closed:
            return False
    return True


def _determinants(n, t, r1):
    d3 = exact_determinant(system_matrix(0, n, r1, r1 * t))
    d5 = exact_determinant(system_matrix(1, n, r1, r1 * t))
    e3 = -(t - 1) * r1 ** (n + 3) * eval_psi_tilde(n, t) / (n * (n + 1) * (n + 2))
    e5 = -2 * (t - 1) ** 4 * r1 ** (n + 8) * eval_psi(n, t) / (n + 2)
    return d3 == e3 and d3 != 0, d5 == e5 and d5 != 0


def check_dimension(n, samples=DEFAULT_SAMPLES, r1=Fraction(2)):
    """Run every exact identity for one dimension ``n`` at rational ``t = R2/R1``."""
    if n < 2:
        raise DomainError(f"identities are stated for n >= 2, got {n}")
    res = IdentityResult(n)
    vanish, positive = _taylor(n)
    res.checks["taylor_vanishing"] = vanish
    res.checks["taylor_positive"] = positive
    res.checks["dual_forms"] = all(eval_psi_tilde(n, t) == eval_psi_tilde_binomial(n, t) for t in samples)
    res.checks["closed_form_vs_solve"] = all(_closed_form_matches_solve(n, t, r1) for t in samples if t > 1)
    dets = [_determinants(n, t, r1) for t in samples if t > 1]
    res.checks["det_3x3"] = all(d[0] for d in dets)
    res.checks["det_5x5"] = all(d[1] for d in dets)
    return res


def run_identities(max_n, samples=DEFAULT_SAMPLES):
    if max_n < 2:
        raise DomainError(f"max_n must be at least 2, got {max_n}")
    return [check_dimension(n, samples) for n in range(2, max_n + 1)]
