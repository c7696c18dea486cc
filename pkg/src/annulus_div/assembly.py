"""Explicit solution of div U = f on an annulus with U = 0 on both spheres.

The field is the sum of three parts:

* the cumulative radial moment ``H(x) x / |x|^n`` of the boundary-free
  source f~, with ``div = f~``;
* ``lambda(x) x / |x|``, whose divergence is the subtracted correction
  polynomial ``f - f~`` and which vanishes on both spheres;
* a divergence-free correction built from the mean-zero solution of a
  Poisson problem on the unit sphere; it cancels the first part on the
  outer sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._parallel import map_chunks
from .coefficients import CorrectionCoefficients, build_correction
from .exceptions import ConfigurationError, DomainError, SolvabilityError
from .sphere import (
    MEAN_TOL,
    SphereGrid,
    SphereScalar,
    SphereSpectrum,
    circle_antiderivative,
    poisson_solve,
    sphere_area,
)

__all__ = [
    "CORRECTION_SIGN",
    "AnnulusDomain",
    "Resolution",
    "TildeSource",
    "SolutionField",
    "cutoff_chi",
    "cutoff_chi_prime",
    "build_tilde_f",
    "radial_moment_g",
    "cumulative_moment",
    "lambda_field",
    "correction_field",
    "correction_potential",
    "assemble_solution",
]

# Sign of the divergence-free term in U.  It is fixed by boundary
# cancellation: on the outer sphere the correction must equal minus the
# radial-moment term g(y) y / R2^(n-1).
CORRECTION_SIGN = {2: 1.0, 3: -1.0}

# U is defined for |x| >= r1 * (1 - INNER_MARGIN) so that stencils may poke
# slightly inside the inner sphere.
INNER_MARGIN = 1e-3


@dataclass(frozen=True)
class AnnulusDomain:
    n: int
    r1: float
    r2: float

    def __post_init__(self):
        if self.n not in (2, 3):
            raise DomainError(f"n must be 2 or 3, got {self.n}")
        if not (np.isfinite(self.r1) and np.isfinite(self.r2) and 0 < self.r1 < self.r2):
            raise DomainError(f"need 0 < r1 < r2 < inf, got r1={self.r1}, r2={self.r2}")
        object.__setattr__(self, "r1", float(self.r1))
        object.__setattr__(self, "r2", float(self.r2))

    @property
    def width(self):
        return self.r2 - self.r1

    def shell_moment(self):
        """``int_{r1}^{r2} rho^(n-1) d rho``."""
        return (self.r2**self.n - self.r1**self.n) / self.n

    def volume(self):
        return sphere_area(self.n) * self.shell_moment()

    def contains(self, x, closed=True):
        rho = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        if closed:
            return (rho >= self.r1) & (rho <= self.r2)
        return (rho > self.r1) & (rho < self.r2)


@dataclass(frozen=True)
class Resolution:
    """Discretization knobs; ``None`` picks the defaults for the domain."""

    band: int | None = None
    radial_nodes: int = 64
    fd_step: float | None = None

    def resolved(self, domain):
        band = self.band if self.band is not None else (32 if domain.n == 3 else 64)
        step = self.fd_step if self.fd_step is not None else 1e-4 * domain.width
        if band < 1 or self.radial_nodes < 1 or not step > 0:
            raise ConfigurationError(f"invalid resolution band={band}, nodes={self.radial_nodes}, step={step}")
        return Resolution(int(band), int(self.radial_nodes), float(step))


def _split(x):
    x = np.asarray(x, dtype=float)
    rho = np.linalg.norm(x, axis=-1)
    if np.any(rho == 0):
        raise DomainError("evaluation at the origin is undefined")
    return x, rho, x / rho[..., None]


def cutoff_chi(rho, r1, r2, l=0):
    """``sin^(l+3)(pi (rho - r1) / (2 (r2 - r1)))`` on [r1, r2]; 0 below, 1 above."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("cutoff needs rho > 0")
    arg = np.pi * (np.clip(rho, r1, r2) - r1) / (2.0 * (r2 - r1))
    return np.sin(arg) ** (l + 3)


def cutoff_chi_prime(rho, r1, r2, l=0):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("cutoff needs rho > 0")
    inside = (rho > r1) & (rho < r2)
    arg = np.pi * (np.clip(rho, r1, r2) - r1) / (2.0 * (r2 - r1))
    d = (l + 3) * np.sin(arg) ** (l + 2) * np.cos(arg) * np.pi / (2.0 * (r2 - r1))
    return np.where(inside, d, 0.0)


@dataclass(frozen=True, eq=False)
class TildeSource:
    """``f~ = f - Q`` where Q is the correction polynomial built from f's traces.

    Callable on points; zero outside the closed annulus.
    """

    source: object
    domain: AnnulusDomain
    correction: CorrectionCoefficients

    def coefficients(self, directions):
        """Correction-polynomial coefficients ``C_k(y)``, shape ``(3,) + lead``."""
        d = self.domain
        loads = np.stack([self.source(d.r1 * directions), self.source(d.r2 * directions)])
        return self.correction.coefficients_for(loads)

    def polynomial(self, x):
        """The subtracted polynomial ``Q(x) = sum_k C_k(y) rho^k``."""
        _, rho, y = _split(x)
        c = self.coefficients(y)
        return sum(c[k] * rho**k for k in range(c.shape[0]))

    def on_rays(self, directions, radii):
        """``f~(radii[..., j] * directions)``; ``radii`` has shape ``lead + (N,)``."""
        directions = np.asarray(directions, dtype=float)
        radii = np.asarray(radii, dtype=float)
        c = self.coefficients(directions)
        pts = radii[..., None] * directions[..., None, :]
        q = sum(c[k][..., None] * radii**k for k in range(c.shape[0]))
        return self.source(pts) - q

    def __call__(self, x):
        x, rho, y = _split(x)
        val = self.on_rays(y, rho[..., None])[..., 0]
        return np.where(self.domain.contains(x), val, 0.0)


def build_tilde_f(source, domain, coeffs):
    """Subtract the correction polynomial from ``source`` (value traces, l = 0)."""
    if coeffs.l != 0:
        raise ConfigurationError("the assembly uses value-trace corrections (l = 0) only")
    if (coeffs.n, coeffs.r1, coeffs.r2) != (domain.n, domain.r1, domain.r2):
        raise ConfigurationError("correction coefficients were built for a different annulus")
    if (source.n, source.r1, source.r2) != (domain.n, domain.r1, domain.r2):
        raise ConfigurationError("source lives on a different annulus")
    tilde = TildeSource(source, domain, coeffs)
    if coeffs.grid is not None:
        expected = tilde.coefficients(coeffs.grid.points)
        scale = max(1.0, float(np.max(np.abs(expected))) if expected.size else 0.0)
        if not np.allclose(expected, coeffs.c_funcs, rtol=0.0, atol=1e-12 * scale):
            raise ConfigurationError("correction coefficients were not built from this source's traces")
    return tilde


def _gauss_nodes(count):
    x, w = np.polynomial.legendre.leggauss(count)
    return (1.0 + x) / 2.0, w / 2.0


def _moment_nodes(r1, upper, count):
    """Gauss-Legendre radii and weights on [r1, upper] (vectorized in ``upper``)."""
    t, w = _gauss_nodes(count)
    length = np.asarray(upper, dtype=float)[..., None] - r1
    return r1 + length * t, length * w


def radial_moment_g(tilde_f, domain, grid, nodes=64):
    """``g(y) = int_{r1}^{r2} f~(rho y) rho^(n-1) d rho`` on the grid nodes."""
    if grid.n != domain.n:
        raise DomainError("grid dimension does not match the domain")
    radii, weights = _moment_nodes(domain.r1, np.full(grid.shape, domain.r2), nodes)
    vals = tilde_f.on_rays(grid.points, radii) if hasattr(tilde_f, "on_rays") else tilde_f(radii[..., None] * grid.points[..., None, :])
    return SphereScalar(grid, np.sum(weights * vals * radii ** (domain.n - 1), axis=-1))


def cumulative_moment(tilde_f, x, domain, tol=1e-12):
    """``|x|^(-n) int_{r1}^{min(|x|, r2)} f~(rho x/|x|) rho^(n-1) d rho`` by adaptive quadrature.

    This is the reference implementation used by tests; the assembled field
    uses fixed Gauss nodes so that it stays smooth under finite differences.
    """
    x = np.asarray(x, dtype=float)
    rho = float(np.linalg.norm(x))
    if rho == 0:
        raise DomainError("cumulative moment is undefined at the origin")
    if rho <= domain.r1:
        return 0.0
    y = x / rho
    upper = min(rho, domain.r2)
    val, _ = integrate.quad(
        lambda s: float(tilde_f(s * y)) * s ** (domain.n - 1), domain.r1, upper, epsabs=0.0, epsrel=tol, limit=200
    )
    return val / rho**domain.n


def _lambda_from_coeffs(c, rho, n, r1):
    total = sum(c[k] * (rho ** (n + k) - r1 ** (n + k)) / (n + k) for k in range(c.shape[0]))
    return total * rho ** (1 - n)


def lambda_field(source, coeffs, domain, x):
    """Radial coefficient ``lambda(x)`` of the correction-polynomial term."""
    x, rho, y = _split(x)
    tol = 1e-12 * domain.r2
    if np.any((rho < domain.r1 - tol) | (rho > domain.r2 + tol)):
        raise DomainError("lambda is evaluated on the closed annulus only")
    return _lambda_from_coeffs(TildeSource(source, domain, coeffs).coefficients(y), rho, domain.n, domain.r1)


def _cart_theta(y):
    return np.stack([-y[..., 1], y[..., 0]], axis=-1)


def correction_field(spectrum, domain, x, l=0):
    """Divergence-free correction term (before the global sign).

    n=2: the 90-degree rotation of grad(chi(|x|) h(x/|x|)).
    n=3: the curl of ``chi(|x|) beta(x/|x|) / |x|`` with ``beta = grad(phi) x y``.
    """
    x, rho, y = _split(x)
    chi = cutoff_chi(rho, domain.r1, domain.r2, l)
    dchi = cutoff_chi_prime(rho, domain.r1, domain.r2, l)
    if domain.n == 2:
        h = spectrum.evaluate(y)
        dh = spectrum.evaluate(y, "derivative")
        return (dchi * h)[..., None] * _cart_theta(y) - (chi * dh / rho)[..., None] * y
    _, grad, lap = spectrum.evaluate_fields(y)
    return (-chi * lap / rho**2)[..., None] * y + (dchi / rho)[..., None] * grad


def correction_potential(spectrum, domain, x, l=0):
    """Potential of :func:`correction_field`: ``chi h`` (n=2) or ``chi beta / |x|`` (n=3)."""
    x, rho, y = _split(x)
    chi = cutoff_chi(rho, domain.r1, domain.r2, l)
    if domain.n == 2:
        return chi * spectrum.evaluate(y)
    grad = spectrum.evaluate(y, "gradient")
    return (chi / rho)[..., None] * np.cross(grad, y)


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Assembled solution; callable on points of shape ``(..., n)``."""

    domain: AnnulusDomain
    source: object
    tilde_f: TildeSource
    correction: CorrectionCoefficients
    spectrum: SphereSpectrum
    g: SphereScalar
    resolution: Resolution
    sign: float
    chi_l: int = 0
    source_scale: float = 0.0
    meta: dict = field(default_factory=dict)

    def _check(self, x):
        x, rho, y = _split(x)
        if np.any(rho < self.domain.r1 * (1.0 - INNER_MARGIN)):
            raise DomainError("U is defined for |x| >= r1 (up to a thin inner margin)")
        return x, rho, y

    def moment_part(self, x):
        """``H(x) x / |x|^n`` with H the Gauss-Legendre cumulative moment of f~."""
        x, rho, y = self._check(x)
        d = self.domain
        upper = np.clip(rho, d.r1, d.r2)
        radii, weights = _moment_nodes(d.r1, upper, self.resolution.radial_nodes)
        h = np.sum(weights * self.tilde_f.on_rays(y, radii) * radii ** (d.n - 1), axis=-1)
        return (h / rho**d.n)[..., None] * x

    def lambda_value(self, x):
        x, rho, y = self._check(x)
        return _lambda_from_coeffs(self.tilde_f.coefficients(y), rho, self.domain.n, self.domain.r1)

    def lambda_part(self, x):
        x, rho, y = self._check(x)
        return self.lambda_value(x)[..., None] * y

    def correction_part(self, x):
        self._check(x)
        return self.sign * correction_field(self.spectrum, self.domain, x, self.chi_l)

    def _evaluate_block(self, x):
        return self.moment_part(x) + self.lambda_part(x) + self.correction_part(x)

    def evaluate(self, x, threads=None):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.domain.n:
            raise DomainError(f"expected points in R^{self.domain.n}, got shape {x.shape}")
        flat = x.reshape(-1, self.domain.n)
        out = map_chunks(self._evaluate_block, flat, threads)
        return out.reshape(x.shape)

    __call__ = evaluate


def _source_scale(source, grid, domain, nodes):
    radii, _ = _moment_nodes(domain.r1, np.full(grid.shape, domain.r2), nodes)
    samples = source(radii[..., None] * grid.points[..., None, :])
    traces = [source(r * grid.points) for r in (domain.r1, domain.r2)]
    return float(max(np.max(np.abs(samples)), *(np.max(np.abs(t)) for t in traces)))


def assemble_solution(source, domain, resolution=None, mean_tol=MEAN_TOL, correction_sign=None):
    """Build U with div U = source and U = 0 on both boundary spheres.

    ``correction_sign`` overrides :data:`CORRECTION_SIGN` (mutation testing only).
    """
    res = (resolution or Resolution()).resolved(domain)
    if (source.n, source.r1, source.r2) != (domain.n, domain.r1, domain.r2):
        raise ConfigurationError("source and domain disagree on (n, r1, r2)")
    grid = SphereGrid.for_band(domain.n, res.band)
    scale = _source_scale(source, grid, domain, res.radial_nodes)
    mean = source.exact_mean()
    if abs(mean) > mean_tol * max(scale, np.finfo(float).tiny):
        raise SolvabilityError(f"source has nonzero annulus mean {mean:.3e}", mean=mean)

    coeffs = build_correction(0, domain.n, domain.r1, domain.r2, source.traces(grid), method="rational")
    tilde = build_tilde_f(source, domain, coeffs)
    g = radial_moment_g(tilde, domain, grid, res.radial_nodes)
    # The exact mean was checked above; any sphere mean left in g is radial
    # quadrature error, so it is projected out and recorded instead.
    solve = poisson_solve if domain.n == 3 else circle_antiderivative
    spectrum = solve(g, res.band, mean_tol=np.inf)
    sign = CORRECTION_SIGN[domain.n] if correction_sign is None else float(correction_sign)
    return SolutionField(
        domain=domain,
        source=source,
        tilde_f=tilde,
        correction=coeffs,
        spectrum=spectrum,
        g=g,
        resolution=res,
        sign=sign,
        source_scale=scale,
        meta={"projected_mean": spectrum.projected_mean, "grid_shape": list(grid.shape)},
    )
