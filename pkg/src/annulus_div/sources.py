"""Catalog of mean-zero sources on the annulus.

Every catalog source is a finite sum of separable terms
``weight * angular(y) * (p(rho) - shift)``, where ``angular`` is a circular
or spherical harmonic and ``p`` is a radial profile whose moments are known
in closed form.  Terms with a non-constant angular factor integrate to zero
over the annulus; constant-angle terms use ``shift`` = the exact annulus
mean of ``p``, so the whole source is mean-zero by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._legendre import lm_index, real_sph_harm
from .exceptions import ConfigurationError, DomainError
from .sphere import SphereScalar, sphere_area, to_angles

__all__ = [
    "RadialProfile",
    "SourceTerm",
    "SourceSpec",
    "CATALOG",
    "make_source",
]


@dataclass(frozen=True)
class RadialProfile:
    """``poly``: sum c_j rho^j.  ``bump``: w^2 / (w^2 + (rho - center)^2)."""

    kind: str
    coeffs: tuple = ()
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("poly", "bump"):
            raise ConfigurationError(f"unknown radial profile {self.kind!r}")
        if self.kind == "bump" and not self.width > 0:
            raise ConfigurationError("bump width must be positive")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", "poly")
        try:
            return cls(kind, **d)
        except TypeError as exc:
            raise ConfigurationError(f"bad radial profile {d}: {exc}") from None

    def to_dict(self):
        if self.kind == "poly":
            return {"kind": "poly", "coeffs": list(self.coeffs)}
        return {"kind": "bump", "center": self.center, "width": self.width}

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind == "poly":
            return np.polynomial.polynomial.polyval(rho, self.coeffs) if self.coeffs else np.zeros_like(rho)
        w2 = self.width**2
        return w2 / (w2 + (rho - self.center) ** 2)

    def moment(self, n, r1, r2):
        """``int_{r1}^{r2} p(rho) rho^(n-1) d rho`` in closed form."""
        if self.kind == "poly":
            return sum(c * (r2 ** (j + n) - r1 ** (j + n)) / (j + n) for j, c in enumerate(self.coeffs))
        c, w = self.center, self.width
        u1, u2 = r1 - c, r2 - c
        # differences of the primitives, formed without cancellation
        dlog = math.log1p((r2 - r1) * (u1 + u2) / (w * w + u1 * u1))
        datan = math.atan2((r2 - r1) * w, w * w + u1 * u2)
        if n == 2:
            return w * w * (0.5 * dlog + (c / w) * datan)
        if n == 3:
            return w * w * ((r2 - r1) + c * dlog + ((c * c - w * w) / w) * datan)
        raise DomainError(f"bump moments are implemented for n = 2, 3, got {n}")


def shell_moment(n, r1, r2):
    """``int_{r1}^{r2} rho^(n-1) d rho``."""
    return (r2**n - r1**n) / n


def angular_harmonic(n, l, m, directions):
    """Circular (n=2, mode ``m``) or real spherical (n=3, ``Y_lm``) harmonic.

    On S^1, ``m > 0`` gives cos(m t), ``m < 0`` gives sin(|m| t), ``m = 0``
    gives 1; ``l`` is ignored.
    """
    if n == 2:
        t = to_angles(directions)
        if m > 0:
            return np.cos(m * t)
        if m < 0:
            return np.sin(-m * t)
        return np.ones_like(t)
    theta, phi = to_angles(directions)
    return real_sph_harm(l, theta, phi)[..., lm_index(l, m)]


@dataclass(frozen=True)
class SourceTerm:
    weight: float
    profile: RadialProfile
    l: int = 0
    m: int = 0
    subtract_mean: bool = False

    def is_constant_angle(self, n):
        return self.m == 0 and (n == 2 or self.l == 0)

    def shift(self, n, r1, r2):
        if not self.subtract_mean:
            return 0.0
        return self.profile.moment(n, r1, r2) / shell_moment(n, r1, r2)

    def to_dict(self):
        return {
            "weight": self.weight,
            "profile": self.profile.to_dict(),
            "l": self.l,
            "m": self.m,
            "subtract_mean": self.subtract_mean,
        }


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """A catalog source on the annulus ``r1 < |x| < r2`` in R^n.

    Callable on arrays of points with shape ``(..., n)``.  ``rotation`` is an
    optional orthogonal matrix R; the source is then ``x -> f(R^T x)``.
    """

    kind: str
    n: int
    r1: float
    r2: float
    terms: tuple = ()
    params: dict = field(default_factory=dict)
    rotation: np.ndarray | None = None

    def __post_init__(self):
        for t in self.terms:
            if self.n == 3 and not (0 <= abs(t.m) <= t.l):
                raise ConfigurationError(f"invalid harmonic (l={t.l}, m={t.m})")
            if t.is_constant_angle(self.n) and not t.subtract_mean:
                raise ConfigurationError(
                    "a constant-angle term must subtract its annulus mean (the source must be mean-zero)"
                )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DomainError(f"expected points in R^{self.n}, got shape {x.shape}")
        if self.rotation is not None:
            x = x @ self.rotation
        rho = np.linalg.norm(x, axis=-1)
        if np.any(rho == 0):
            raise DomainError("sources are not evaluated at the origin")
        y = x / rho[..., None]
        out = np.zeros(x.shape[:-1])
        for t in self.terms:
            out = out + t.weight * angular_harmonic(self.n, t.l, t.m, y) * (
                t.profile(rho) - t.shift(self.n, self.r1, self.r2)
            )
        return out

    def exact_mean(self):
        """Annulus mean from closed-form moments (zero up to rounding)."""
        total = 0.0
        for t in self.terms:
            if t.is_constant_angle(self.n):
                mom = t.profile.moment(self.n, self.r1, self.r2)
                total += t.weight * (mom - t.shift(self.n, self.r1, self.r2) * shell_moment(self.n, self.r1, self.r2))
        return total / shell_moment(self.n, self.r1, self.r2)

    def exact_integral(self):
        return self.exact_mean() * sphere_area(self.n) * shell_moment(self.n, self.r1, self.r2)

    def traces(self, grid):
        """Boundary traces ``f(r1 y)``, ``f(r2 y)`` on a sphere grid."""
        if grid.n != self.n:
            raise DomainError(f"grid on S^{grid.n - 1} does not match n={self.n}")
        return (
            SphereScalar(grid, self(self.r1 * grid.points)),
            SphereScalar(grid, self(self.r2 * grid.points)),
        )

    def rotated(self, matrix):
        r = np.asarray(matrix, dtype=float)
        if r.shape != (self.n, self.n) or not np.allclose(r.T @ r, np.eye(self.n), atol=1e-12):
            raise DomainError("rotation must be an orthogonal n x n matrix")
        total = r if self.rotation is None else r @ self.rotation
        return SourceSpec(self.kind, self.n, self.r1, self.r2, self.terms, self.params, total)

    def _combine(self, other, alpha, beta):
        if not isinstance(other, SourceSpec):
            return NotImplemented
        if (self.n, self.r1, self.r2) != (other.n, other.r1, other.r2):
            raise DomainError("sources live on different annuli")
        if self.rotation is not None or other.rotation is not None:
            raise DomainError("rotated sources cannot be combined")
        terms = tuple(_scaled(t, alpha) for t in self.terms) + tuple(_scaled(t, beta) for t in other.terms)
        return SourceSpec("combination", self.n, self.r1, self.r2, terms)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, alpha):
        return SourceSpec(self.kind, self.n, self.r1, self.r2, tuple(_scaled(t, alpha) for t in self.terms), self.params, self.rotation)

    __rmul__ = __mul__

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}


def _scaled(term, alpha):
    return SourceTerm(term.weight * alpha, term.profile, term.l, term.m, term.subtract_mean)


def _default_bump(r1, r2, center=None):
    return RadialProfile("bump", center=0.5 * (r1 + r2) if center is None else center, width=0.1 * (r2 - r1))


def _profile(params, r1, r2):
    spec = params.get("profile")
    return _default_bump(r1, r2) if spec is None else RadialProfile.from_dict(spec)


def _zero(n, r1, r2, params):
    return ()


def _harmonic_radial(n, r1, r2, params):
    if n == 2:
        l, m = 0, int(params.get("m", 1))
        if m == 0:
            raise ConfigurationError("harmonic_radial needs a non-constant mode (m != 0) on S^1")
    else:
        l, m = int(params.get("l", 2)), int(params.get("m", 1))
        if l < 1:
            raise ConfigurationError("harmonic_radial needs degree l >= 1")
    return (SourceTerm(float(params.get("amplitude", 1.0)), _profile(params, r1, r2), l, m),)


def _radial_bump_meansub(n, r1, r2, params):
    return (SourceTerm(float(params.get("amplitude", 1.0)), _profile(params, r1, r2), subtract_mean=True),)


def _boundary_loaded(n, r1, r2, params):
    a = float(params.get("amplitude", 1.0))
    linear = RadialProfile("poly", (1.0, 1.0))
    edge = _default_bump(r1, r2, center=r2)
    if n == 2:
        first, second = (0, 1), (0, -2)
    else:
        first, second = (1, 0), (2, -2)
    return (
        SourceTerm(a, linear, *first),
        SourceTerm(a, edge, *second),
        SourceTerm(0.5 * a, _default_bump(r1, r2), subtract_mean=True),
    )


CATALOG = {
    "zero": _zero,
    "harmonic_radial": _harmonic_radial,
    "radial_bump_meansub": _radial_bump_meansub,
    "boundary_loaded": _boundary_loaded,
}


def make_source(kind, n, r1, r2, params=None):
    """Build a catalog source; unknown kinds raise :class:`ConfigurationError`."""
    params = dict(params or {})
    if kind not in CATALOG:
        raise ConfigurationError(f"unknown source kind {kind!r}; choose from {sorted(CATALOG)}")
    if n not in (2, 3):
        raise ConfigurationError(f"n must be 2 or 3, got {n}")
    if not 0 < r1 < r2:
        raise ConfigurationError(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    return SourceSpec(kind, n, float(r1), float(r2), CATALOG[kind](n, float(r1), float(r2), params), params)
